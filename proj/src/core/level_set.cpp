#include "core/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/io.hpp"

namespace segopt {

namespace {

constexpr double kGradFloor = 1e-8;

inline double clamped(const ScalarField& f, int x, int y) {
  x = std::clamp(x, 0, f.width() - 1);
  y = std::clamp(y, 0, f.height() - 1);
  return f.at(x, y);
}

// Unit-ish normal n = grad phi / max(|grad phi|, floor) by central differences.
inline void normal_at(const ScalarField& phi, int x, int y, double& nx,
                      double& ny) {
  const double gx = 0.5 * (clamped(phi, x + 1, y) - clamped(phi, x - 1, y));
  const double gy = 0.5 * (clamped(phi, x, y + 1) - clamped(phi, x, y - 1));
  const double norm = std::max(std::sqrt(gx * gx + gy * gy), kGradFloor);
  nx = gx / norm;
  ny = gy / norm;
}

}  // namespace

void validate_config(const LevelSetConfig& cfg) {
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, ErrorCode::InvalidArgument,
          "time step dt must be positive");
  require(cfg.epsilon > 0.0, ErrorCode::InvalidArgument,
          "dirac epsilon must be positive");
  require(std::isfinite(cfg.mu) && cfg.mu >= 0.0, ErrorCode::InvalidArgument,
          "distance penalty mu must be >= 0");
  require(cfg.max_iters >= 0, ErrorCode::InvalidArgument,
          "max_iters must be >= 0");
  require(cfg.convergence_window >= 1, ErrorCode::InvalidArgument,
          "convergence window must be >= 1");
  require(cfg.convergence_tol >= 0.0, ErrorCode::InvalidArgument,
          "convergence tolerance must be >= 0");
}

LevelSetField init_phi(const Labeling& s) {
  SignedDistance sd = signed_distance(s);
  require(!sd.degenerate, ErrorCode::DegenerateMask,
          "init_phi requires a mask that is neither empty nor full");
  return {std::move(sd.field), 0};
}

Labeling extract(const LevelSetField& field) {
  Labeling s(field.phi.width(), field.phi.height());
  for (int y = 0; y < field.phi.height(); ++y) {
    for (int x = 0; x < field.phi.width(); ++x) {
      if (field.phi.at(x, y) <= 0.0) s.set(x, y, true);
    }
  }
  return s;
}

double curvature(const ScalarField& phi, int x, int y) {
  const int xp = std::min(x + 1, phi.width() - 1);
  const int xm = std::max(x - 1, 0);
  const int yp = std::min(y + 1, phi.height() - 1);
  const int ym = std::max(y - 1, 0);
  double nxp, nyp, nxm, nym, dummy;
  normal_at(phi, xp, y, nxp, dummy);
  normal_at(phi, xm, y, nxm, dummy);
  normal_at(phi, x, yp, dummy, nyp);
  normal_at(phi, x, ym, dummy, nym);
  return 0.5 * (nxp - nxm) + 0.5 * (nyp - nym);
}

ScalarField curvature_field(const ScalarField& phi) {
  const int w = phi.width();
  const int h = phi.height();
  ScalarField nx(w, h), ny(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      normal_at(phi, x, y, nx.at(x, y), ny.at(x, y));
    }
  }
  ScalarField kappa(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dnx = 0.5 * (clamped(nx, x + 1, y) - clamped(nx, x - 1, y));
      const double dny = 0.5 * (clamped(ny, x, y + 1) - clamped(ny, x, y - 1));
      kappa.at(x, y) = dnx + dny;
    }
  }
  return kappa;
}

LevelSetField step(const LevelSetField& field, const ScalarField& g,
                   double lambda_length, const LevelSetConfig& cfg) {
  const ScalarField& phi = field.phi;
  require_same_dims(phi.width(), phi.height(), g.width(), g.height(),
                    "level set step");
  const int w = phi.width();
  const int h = phi.height();
  const ScalarField kappa = curvature_field(phi);

  LevelSetField next{ScalarField(w, h), field.iteration + 1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = phi.at(x, y);
      const double lap = clamped(phi, x + 1, y) + clamped(phi, x - 1, y) +
                         clamped(phi, x, y + 1) + clamped(phi, x, y - 1) -
                         4.0 * center;
      const double k = kappa.at(x, y);
      const double velocity =
          cfg.mu * (lap - k) +
          (g.at(x, y) + lambda_length * k) * dirac(center, cfg.epsilon);
      const double updated = center + cfg.dt * velocity;
      if (!std::isfinite(velocity) || !std::isfinite(updated)) {
        std::ostringstream msg;
        msg << "level set update is non-finite at (" << x << "," << y
            << "): phi=" << center << " lap=" << lap << " kappa=" << k
            << " g=" << g.at(x, y) << " dt=" << cfg.dt
            << " iter=" << field.iteration + 1;
        fail(ErrorCode::Numeric, msg.str());
      }
      next.phi.at(x, y) = updated;
    }
  }
  return next;
}

namespace {

struct ConvergenceTest {
  int window;
  double tol;
  std::vector<double> energies;

  // Relative change of the trailing moving average across one window.
  bool push(double e) {
    energies.push_back(e);
    const std::size_t w = static_cast<std::size_t>(window);
    if (energies.size() < 2 * w) return false;
    const auto tail = energies.end();
    const double now = std::accumulate(tail - w, tail, 0.0) / window;
    const double prev = std::accumulate(tail - 2 * w, tail - w, 0.0) / window;
    const double scale = std::max(std::abs(prev), 1e-300);
    return std::abs(now - prev) / scale <= tol;
  }
};

void maybe_snapshot(const LevelSetConfig& cfg, const LevelSetField& field,
                    int iter) {
  if (cfg.snapshot_every <= 0 || iter % cfg.snapshot_every != 0) return;
  save_field(field.phi, cfg.snapshot_prefix + std::to_string(iter) + ".sfld");
}

// Discrete approximation of the continuous energy used by the backtracking
// acceptance rule: regional/unary terms on the extracted mask, length from
// the live embedding. Counted as one energy evaluation.
double backtracking_energy(const EnergyTerms& terms, const Image& img,
                           const Labeling& s, const ScalarField& phi,
                           EvalCounter& counter) {
  double e = 0.0;
  for (const auto& term : terms.regional) {
    e += term.weight * term.model->value_at(term.model->features(img, s));
  }
  if (terms.unary) e += terms.unary_weight * linear_sum(*terms.unary, s);
  e += terms.length_weight * length_continuous(phi, terms.dirac_epsilon);
  counter.bump();
  return e;
}

}  // namespace

RunResult run_level_set(const Image& img, const Labeling& initial,
                        const EnergyTerms& terms, const LevelSetConfig& cfg,
                        EvalCounter& counter) {
  validate_config(cfg);
  validate_terms(terms);
  LevelSetField field = init_phi(initial);

  RunResult result{initial, {}, RunStatus::IterationCap, "", 0, 0.0, {}};
  double best_energy =
      composite_energy(terms, img, initial, &counter).total;

  ConvergenceTest conv{cfg.convergence_window, cfg.convergence_tol, {}};
  const double t0 = thread_cpu_ms();

  Labeling current = initial;
  for (int j = 1; j <= cfg.max_iters; ++j) {
    const ScalarField g = combined_gradient(terms, img, current);
    try {
      field = step(field, g, terms.length_weight, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numeric) throw;
      result.status = RunStatus::Aborted;
      result.message = e.what();
      break;
    }
    current = extract(field);
    const EnergyReport report = composite_energy(terms, img, current, &counter);

    TraceRow row;
    row.iter = static_cast<std::uint64_t>(j);
    row.cpu_ms = thread_cpu_ms() - t0;
    row.evals = counter.count();
    row.energy = report.total;
    row.regional = report.regional;
    row.length_cont = report.length_cont;
    row.length_crofton = report.length_crofton;
    row.area = current.area();
    result.trace.rows.push_back(row);
    if (cfg.record_masks) result.trace.masks.push_back(current);
    maybe_snapshot(cfg, field, j);

    result.iterations = static_cast<std::uint64_t>(j);
    if (report.total < best_energy) {
      best_energy = report.total;
      result.labeling = current;
    }
    if (conv.push(report.total)) {
      result.status = RunStatus::Converged;
      break;
    }
  }

  result.cpu_ms = thread_cpu_ms() - t0;
  return result;
}

RunResult run_level_set_adaptive(const Image& img, const Labeling& initial,
                                 const EnergyTerms& terms,
                                 const LevelSetConfig& cfg,
                                 EvalCounter& counter) {
  validate_config(cfg);
  validate_terms(terms);
  LevelSetField field = init_phi(initial);

  RunResult result{initial, {}, RunStatus::IterationCap, "", 0, 0.0, {}};
  Labeling current = initial;
  double e_current =
      backtracking_energy(terms, img, current, field.phi, counter);
  double best_energy = composite_energy(terms, img, initial, &counter).total;

  const double t0 = thread_cpu_ms();

  for (int j = 1; j <= cfg.max_iters; ++j) {
    const ScalarField g = combined_gradient(terms, img, current);
    LevelSetConfig trial_cfg = cfg;
    LevelSetField accepted_field = field;
    Labeling accepted_mask = current;
    bool accepted = false;

    while (trial_cfg.dt >= cfg.min_dt) {
      LevelSetField trial{ScalarField(1, 1), 0};
      try {
        trial = step(field, g, terms.length_weight, trial_cfg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Numeric) throw;
        result.status = RunStatus::Aborted;
        result.message = e.what();
        result.cpu_ms = thread_cpu_ms() - t0;
        return result;
      }
      Labeling trial_mask = extract(trial);
      const double e_trial =
          backtracking_energy(terms, img, trial_mask, trial.phi, counter);
      if (e_trial < e_current) {
        accepted_field = std::move(trial);
        accepted_mask = std::move(trial_mask);
        e_current = e_trial;
        accepted = true;
        break;
      }
      trial_cfg.dt *= 0.5;
    }

    if (!accepted) {
      result.status = RunStatus::Stalled;
      result.message = "backtracking step size underflow";
      break;
    }

    field = std::move(accepted_field);
    current = std::move(accepted_mask);
    result.accepted_energies.push_back(e_current);

    const EnergyReport report = composite_energy(terms, img, current, &counter);
    TraceRow row;
    row.iter = static_cast<std::uint64_t>(j);
    row.cpu_ms = thread_cpu_ms() - t0;
    row.evals = counter.count();
    row.energy = report.total;
    row.regional = report.regional;
    row.length_cont = report.length_cont;
    row.length_crofton = report.length_crofton;
    row.area = current.area();
    result.trace.rows.push_back(row);
    if (cfg.record_masks) result.trace.masks.push_back(current);
    maybe_snapshot(cfg, field, j);

    result.iterations = static_cast<std::uint64_t>(j);
    if (report.total < best_energy) {
      best_energy = report.total;
      result.labeling = current;
    }
  }

  result.cpu_ms = thread_cpu_ms() - t0;
  return result;
}

}  // namespace segopt
