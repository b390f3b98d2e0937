#ifndef SEGOPT_CORE_LEVEL_SET_HPP
#define SEGOPT_CORE_LEVEL_SET_HPP

#include "core/functionals.hpp"
#include "core/grid.hpp"
#include "core/length.hpp"
#include "core/trace.hpp"

namespace segopt {

/// Embedding function with S = { x : phi(x) <= 0 }.
struct LevelSetField {
  ScalarField phi;
  int iteration = 0;
};

struct LevelSetConfig {
  double dt = 1.0;
  double epsilon = 1.5;  // Dirac width
  double mu = 0.05;      // distance-function penalty weight
  int max_iters = 10000;
  int convergence_window = 50;
  double convergence_tol = 1e-6;
  double min_dt = 1e-6;  // backtracking underflow bound (adaptive mode)
  bool record_masks = false;
  /// Dump phi every N iterations when positive; files <prefix><iter>.sfld.
  int snapshot_every = 0;
  std::string snapshot_prefix;
};

void validate_config(const LevelSetConfig& cfg);

/// phi = signed distance of the mask; requires a non-degenerate mask.
LevelSetField init_phi(const Labeling& s);

Labeling extract(const LevelSetField& field);

/// Curvature of phi's level lines, div(grad phi / |grad phi|), central
/// differences with replicated borders and gradient norm floored at 1e-8.
double curvature(const ScalarField& phi, int x, int y);
ScalarField curvature_field(const ScalarField& phi);

/// One explicit update phi += dt * A(phi) with
///   A = mu * (laplacian(phi) - kappa) + (g + lambda_length * kappa) * dirac(phi).
/// g is the combined regional/unary derivative field; with S = {phi <= 0} a
/// positive g pushes phi up, expelling the pixel, which descends the energy.
/// Throws Numeric if A or the updated phi is non-finite anywhere.
LevelSetField step(const LevelSetField& field, const ScalarField& g,
                   double lambda_length, const LevelSetConfig& cfg);

/// Fixed time-step gradient descent. Traces every iteration, stops on the
/// moving-average convergence test or the iteration cap, and returns the
/// best-energy labeling seen.
RunResult run_level_set(const Image& img, const Labeling& initial,
                        const EnergyTerms& terms, const LevelSetConfig& cfg,
                        EvalCounter& counter);

/// Backtracking variant: dt is halved until the discrete energy of the
/// candidate decreases, and reset after every accepted step. Terminates with
/// Stalled when dt underflows; reproduces the early-stagnation behavior of
/// backtracking on the discretized energy.
RunResult run_level_set_adaptive(const Image& img, const Labeling& initial,
                                 const EnergyTerms& terms,
                                 const LevelSetConfig& cfg,
                                 EvalCounter& counter);

}  // namespace segopt

#endif
