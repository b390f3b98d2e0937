#ifndef SEGOPT_CORE_LENGTH_HPP
#define SEGOPT_CORE_LENGTH_HPP

#include <vector>

#include "core/grid.hpp"

namespace segopt {

/// Regularized Dirac impulse, 1/(2e)[1 + cos(pi t / e)] on [-e, e], 0 outside.
double dirac(double t, double epsilon);

/// Boundary length of the zero level set of phi: sum of dirac(phi) * |grad phi|
/// over the grid (unit spacing, central differences, replicated borders).
double length_continuous(const ScalarField& phi, double epsilon);

/// Grid edge weights making cut cost approximate Euclidean boundary length via
/// the Cauchy-Crofton formula. Directions are undirected families.
struct CroftonStencil {
  struct Direction {
    int dx;
    int dy;
    double weight;
  };
  int order = 16;  // 4, 8 or 16
  std::vector<Direction> directions;
};

CroftonStencil crofton_weights(int order);

/// Sum of stencil weights over neighbor pairs with differing labels.
double crofton_cut_cost(const Labeling& s, const CroftonStencil& stencil);

}  // namespace segopt

#endif
