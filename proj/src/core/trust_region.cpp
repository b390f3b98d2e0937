#include "core/trust_region.hpp"

#include <algorithm>
#include <cmath>

#include "core/maxflow.hpp"

namespace segopt {

void validate_config(const TrustRegionConfig& cfg) {
  require(std::isfinite(cfg.initial_radius) && cfg.initial_radius > 0.0,
          ErrorCode::InvalidArgument, "initial trust radius must be positive");
  require(std::isfinite(cfg.alpha) && cfg.alpha > 1.0,
          ErrorCode::InvalidArgument, "trust region multiplier must be > 1");
  require(0.0 <= cfg.tau1 && cfg.tau1 <= cfg.tau2 && cfg.tau2 < 1.0,
          ErrorCode::InvalidArgument,
          "thresholds must satisfy 0 <= tau1 <= tau2 < 1");
  require(cfg.max_iters >= 0, ErrorCode::InvalidArgument,
          "max_iters must be >= 0");
  require(cfg.min_radius > 0.0, ErrorCode::InvalidArgument,
          "min_radius must be positive");
}

ScalarField taylor_unary(const EnergyTerms& terms, const Image& img,
                         const Labeling& s_j) {
  return combined_gradient(terms, img, s_j);
}

Labeling solve_subproblem(const ScalarField& u, double lambda_len,
                          const CroftonStencil& stencil, const Labeling& s_j,
                          double lambda_dist) {
  require_same_dims(u.width(), u.height(), s_j.width(), s_j.height(),
                    "solve_subproblem");
  require(std::isfinite(lambda_len) && lambda_len >= 0.0,
          ErrorCode::InvalidArgument, "lambda_len must be >= 0");
  require(std::isfinite(lambda_dist) && lambda_dist >= 0.0,
          ErrorCode::InvalidArgument, "lambda_dist must be >= 0");

  const int w = s_j.width();
  const int h = s_j.height();
  const ScalarField dist = signed_distance(s_j).field;

  FlowNetwork net(static_cast<std::size_t>(w) * h);

  // Source side = inside S. A pixel pays u(x) for membership plus the move
  // penalty when its label differs from S_j; per-pixel constant shift keeps
  // capacities nonnegative without changing the argmin.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t node = static_cast<std::size_t>(y) * w + x;
      const double move = lambda_dist * std::abs(dist.at(x, y));
      const bool inside = s_j.get(x, y);
      const double cost_in = u.at(x, y) + (inside ? 0.0 : move);
      const double cost_out = inside ? move : 0.0;
      const double shift = std::min(cost_in, cost_out);
      net.add_terminal(node, cost_out - shift, cost_in - shift);
    }
  }

  for (const auto& dir : stencil.directions) {
    const double cap = lambda_len * dir.weight;
    if (cap == 0.0) continue;
    const int x0 = std::max(0, -dir.dx);
    const int x1 = std::min(w, w - dir.dx);
    const int y0 = std::max(0, -dir.dy);
    const int y1 = std::min(h, h - dir.dy);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const std::size_t a = static_cast<std::size_t>(y) * w + x;
        const std::size_t b =
            static_cast<std::size_t>(y + dir.dy) * w + (x + dir.dx);
        net.add_edge(a, b, cap, cap);
      }
    }
  }

  net.max_flow();
  Labeling result(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t node = static_cast<std::size_t>(y) * w + x;
      if (net.cut_side(node) == FlowNetwork::Side::Source) {
        result.set(x, y, true);
      }
    }
  }
  return result;
}

RunResult run_trust_region(const Image& img, const Labeling& initial,
                           const EnergyTerms& terms,
                           const TrustRegionConfig& cfg, EvalCounter& counter) {
  validate_config(cfg);
  validate_terms(terms);
  require(!initial.empty() && !initial.full(), ErrorCode::DegenerateMask,
          "trust region requires a non-degenerate initial mask");

  const CroftonStencil stencil = crofton_weights(terms.crofton_order);
  RunResult result{initial, {}, RunStatus::IterationCap, "", 0, 0.0, {}};
  result.trace.trust_region_columns = true;

  Labeling current = initial;
  EnergyReport report = composite_energy(terms, img, current, &counter);
  double energy = report.total;
  double radius = cfg.initial_radius;

  const double t0 = thread_cpu_ms();

  const auto approx_energy = [&](const Labeling& s, const ScalarField& u) {
    return linear_sum(u, s) +
           terms.length_weight * crofton_cut_cost(s, stencil);
  };

  for (int j = 1; j <= cfg.max_iters; ++j) {
    bool accepted = false;
    bool grow = false;
    try {
      const ScalarField u = taylor_unary(terms, img, current);
      // Scale-aware Lagrangian multiplier: a pixel at boundary distance t
      // flips only when |u| outweighs scale * t / d, so d is the move radius
      // in pixels whatever the magnitude of the regional gradients.
      double scale = 0.0;
      for (double v : u.data()) scale += std::abs(v);
      scale /= static_cast<double>(u.data().size());
      const double lambda_dist = scale > 0.0 ? scale / radius : 0.0;
      const Labeling candidate = solve_subproblem(
          u, terms.length_weight, stencil, current, lambda_dist);

      const double predicted =
          approx_energy(current, u) - approx_energy(candidate, u);
      const EnergyReport candidate_report =
          composite_energy(terms, img, candidate, &counter);
      const double actual = energy - candidate_report.total;

      if (predicted > 0.0) {
        const double rho = actual / predicted;
        accepted = rho > cfg.tau1;
        grow = rho > cfg.tau2;
      } else {
        // Approximation predicted no improvement; still take a real descent.
        accepted = actual > 0.0;
        grow = false;
        if (accepted) result.message = "accept-with-shrink at iter " +
                                       std::to_string(j);
      }
      if (accepted && !(actual > 0.0)) {
        // tau1 == 0 makes acceptance equivalent to actual descent; any other
        // combination is a bug or a NaN leak.
        accepted = false;
      }

      if (accepted) {
        require(candidate_report.total < energy, ErrorCode::Numeric,
                "accepted trust-region energy failed to decrease");
        current = candidate;
        report = candidate_report;
        energy = report.total;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numeric) throw;
      result.status = RunStatus::Aborted;
      result.message = e.what();
      break;
    }

    const double next_radius = grow ? radius * cfg.alpha : radius / cfg.alpha;

    TraceRow row;
    row.iter = static_cast<std::uint64_t>(j);
    row.cpu_ms = thread_cpu_ms() - t0;
    row.evals = counter.count();
    row.energy = energy;
    row.regional = report.regional;
    row.length_cont = report.length_cont;
    row.length_crofton = report.length_crofton;
    row.area = current.area();
    row.accepted = accepted;
    row.trust_radius = radius;
    result.trace.rows.push_back(row);
    if (cfg.record_masks) result.trace.masks.push_back(current);
    result.iterations = static_cast<std::uint64_t>(j);

    if (!accepted && next_radius < cfg.min_radius) {
      result.status = RunStatus::Converged;
      break;
    }
    radius = next_radius;
  }

  result.labeling = current;
  result.cpu_ms = thread_cpu_ms() - t0;
  return result;
}

}  // namespace segopt
