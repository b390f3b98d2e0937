#ifndef SEGOPT_CORE_TRUST_REGION_HPP
#define SEGOPT_CORE_TRUST_REGION_HPP

#include "core/functionals.hpp"
#include "core/grid.hpp"
#include "core/length.hpp"
#include "core/trace.hpp"

namespace segopt {

struct TrustRegionConfig {
  double initial_radius = 10.0;  // d0, pixels
  double alpha = 2.0;            // region multiplier, > 1
  double tau1 = 0.0;             // acceptance threshold on the reduction ratio
  double tau2 = 0.25;            // growth threshold
  int max_iters = 1000;
  double min_radius = 1.0;  // stop once d falls below this after a rejection
  bool record_masks = false;
};

void validate_config(const TrustRegionConfig& cfg);

/// Per-pixel cost field of the first-order Taylor approximation of the
/// regional terms at S_j; linear unaries enter exactly.
ScalarField taylor_unary(const EnergyTerms& terms, const Image& img,
                         const Labeling& s_j);

/// Exact global minimizer of
///   <u,S> + lambda_len * L_crofton(S)
///   + lambda_dist * sum_{x in S xor S_j} |signed_distance(S_j)(x)|
/// by one graph cut. Ties go to the sink (excluded) side.
Labeling solve_subproblem(const ScalarField& u, double lambda_len,
                          const CroftonStencil& stencil, const Labeling& s_j,
                          double lambda_dist);

/// Fast trust region: Taylor unary at S_j, Lagrangian move penalty with
/// lambda_dist = mean|u| / d_j (so d_j is a move radius in pixels), one cut
/// per candidate, radius adapted from the actual/predicted reduction ratio.
/// Accepted energies strictly decrease.
RunResult run_trust_region(const Image& img, const Labeling& initial,
                           const EnergyTerms& terms,
                           const TrustRegionConfig& cfg, EvalCounter& counter);

}  // namespace segopt

#endif
