#include "core/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace segopt {

namespace {

// Guard added to counts inside logs and square roots so that distribution
// functionals stay finite (and provably nonnegative) on degenerate segments.
constexpr double kCountGuard = 1e-10;
// Probability floor in log-likelihood unaries.
constexpr double kProbFloor = 1e-8;

double normalized_coord(int x, int extent) {
  return extent > 1 ? static_cast<double>(x) / (extent - 1) : 0.0;
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

class VolumeModel final : public RegionalModel {
 public:
  explicit VolumeModel(double v0) : v0_(v0) {
    require(std::isfinite(v0) && v0 > 0.0, ErrorCode::InvalidArgument,
            "volume target V0 must be positive");
  }

  const char* kind() const noexcept override { return "volume"; }
  std::size_t feature_count() const noexcept override { return 1; }

  std::vector<double> features(const Image& img,
                               const Labeling& s) const override {
    require_same_dims(img.width(), img.height(), s.width(), s.height(),
                      "volume features");
    return {static_cast<double>(s.area())};
  }

  double value_at(std::span<const double> v) const override {
    const double d = v[0] - v0_;
    return d * d;
  }

  std::vector<double> gradient_at(std::span<const double> v) const override {
    return {2.0 * (v[0] - v0_)};
  }

  ScalarField gradient_field(const Image& img,
                             const Labeling& s) const override {
    const double g = gradient_at(features(img, s))[0];
    return ScalarField(s.width(), s.height(), g);
  }

 private:
  double v0_;
};

class MomentsModel final : public RegionalModel {
 public:
  MomentsModel(std::vector<MomentTarget> targets, int order)
      : targets_(std::move(targets)), order_(order) {
    require(order >= 0, ErrorCode::InvalidArgument,
            "moment order must be nonnegative");
    require(!targets_.empty(), ErrorCode::InvalidArgument,
            "moments model needs at least one target");
    std::set<std::pair<int, int>> seen;
    for (const auto& t : targets_) {
      require(t.p >= 0 && t.q >= 0 && t.p + t.q <= order,
              ErrorCode::InvalidArgument,
              "moment target (p,q) must satisfy 0 <= p+q <= order");
      require(std::isfinite(t.value), ErrorCode::InvalidArgument,
              "moment target value must be finite");
      require(seen.insert({t.p, t.q}).second, ErrorCode::InvalidArgument,
              "duplicate moment target (p,q)");
    }
  }

  const char* kind() const noexcept override { return "moments"; }
  std::size_t feature_count() const noexcept override {
    return targets_.size();
  }

  std::vector<double> features(const Image& img,
                               const Labeling& s) const override {
    require_same_dims(img.width(), img.height(), s.width(), s.height(),
                      "moments features");
    std::vector<double> v(targets_.size(), 0.0);
    for (int y = 0; y < s.height(); ++y) {
      const double yn = normalized_coord(y, s.height());
      for (int x = 0; x < s.width(); ++x) {
        if (!s.get(x, y)) continue;
        const double xn = normalized_coord(x, s.width());
        for (std::size_t t = 0; t < targets_.size(); ++t) {
          v[t] += ipow(xn, targets_[t].p) * ipow(yn, targets_[t].q);
        }
      }
    }
    return v;
  }

  double value_at(std::span<const double> v) const override {
    double sum = 0.0;
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      const double d = v[t] - targets_[t].value;
      sum += d * d;
    }
    return sum;
  }

  std::vector<double> gradient_at(std::span<const double> v) const override {
    std::vector<double> g(targets_.size());
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      g[t] = 2.0 * (v[t] - targets_[t].value);
    }
    return g;
  }

  ScalarField gradient_field(const Image& img,
                             const Labeling& s) const override {
    const auto coef = gradient_at(features(img, s));
    ScalarField field(s.width(), s.height());
    for (int y = 0; y < s.height(); ++y) {
      const double yn = normalized_coord(y, s.height());
      for (int x = 0; x < s.width(); ++x) {
        const double xn = normalized_coord(x, s.width());
        double g = 0.0;
        for (std::size_t t = 0; t < targets_.size(); ++t) {
          g += coef[t] * ipow(xn, targets_[t].p) * ipow(yn, targets_[t].q);
        }
        field.at(x, y) = g;
      }
    }
    return field;
  }

  const std::vector<MomentTarget>& targets() const { return targets_; }

 private:
  std::vector<MomentTarget> targets_;
  int order_;
};

/// Shared base of the histogram-matching functionals; features are the
/// per-channel bin counts of the segment, flattened channel-major.
class HistogramModel : public RegionalModel {
 public:
  explicit HistogramModel(const Histogram& target)
      : target_(target), channels_(target.channels()), bins_(target.bins()) {}

  std::size_t feature_count() const noexcept override {
    return static_cast<std::size_t>(channels_) * bins_;
  }

  std::vector<double> features(const Image& img,
                               const Labeling& s) const override {
    require(img.channels() == channels_, ErrorCode::DimensionMismatch,
            "image channel count does not match the model target");
    Histogram h = bin_counts(img, s, bins_);
    return std::vector<double>(h.data().begin(), h.data().end());
  }

  ScalarField gradient_field(const Image& img,
                             const Labeling& s) const override {
    const auto coef = gradient_at(features(img, s));
    ScalarField field(s.width(), s.height());
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) {
        double g = 0.0;
        for (int c = 0; c < channels_; ++c) {
          g += coef[static_cast<std::size_t>(c) * bins_ +
                    intensity_bin(img.at(x, y, c), bins_)];
        }
        field.at(x, y) = g;
      }
    }
    return field;
  }

 protected:
  Histogram target_;
  int channels_;
  int bins_;
};

class L2BinsModel final : public HistogramModel {
 public:
  explicit L2BinsModel(const Histogram& target) : HistogramModel(target) {
    for (double q : target.data()) {
      require(std::isfinite(q) && q >= 0.0, ErrorCode::InvalidArgument,
              "L2 bin targets must be finite and nonnegative");
    }
  }

  const char* kind() const noexcept override { return "l2_bins"; }

  double value_at(std::span<const double> v) const override {
    double total = 0.0;
    for (int c = 0; c < channels_; ++c) {
      double ss = 0.0;
      for (int b = 0; b < bins_; ++b) {
        const double d = v[static_cast<std::size_t>(c) * bins_ + b] -
                         target_.at(c, b);
        ss += d * d;
      }
      total += std::sqrt(ss);
    }
    return total;
  }

  std::vector<double> gradient_at(std::span<const double> v) const override {
    std::vector<double> g(feature_count(), 0.0);
    for (int c = 0; c < channels_; ++c) {
      double ss = 0.0;
      for (int b = 0; b < bins_; ++b) {
        const double d = v[static_cast<std::size_t>(c) * bins_ + b] -
                         target_.at(c, b);
        ss += d * d;
      }
      const double norm = std::sqrt(ss);
      if (norm == 0.0) continue;  // minimal-norm subgradient at the kink
      for (int b = 0; b < bins_; ++b) {
        const std::size_t i = static_cast<std::size_t>(c) * bins_ + b;
        g[i] = (v[i] - target_.at(c, b)) / norm;
      }
    }
    return g;
  }
};

/// Guarded per-channel probabilities: p_b = (v_b + eps) / sum_b (v_b + eps),
/// and the target renormalized the same way, so both stay proper
/// distributions and the divergences keep their sign and identity properties.
struct GuardedChannel {
  std::vector<double> p;
  std::vector<double> q;
  double mass;  // sum of guarded counts
};

GuardedChannel guard_channel(std::span<const double> v, const Histogram& target,
                             int channel, int bins) {
  GuardedChannel g;
  g.p.resize(bins);
  g.q.resize(bins);
  double vsum = 0.0;
  double qsum = 0.0;
  for (int b = 0; b < bins; ++b) {
    g.p[b] = v[static_cast<std::size_t>(channel) * bins + b] + kCountGuard;
    g.q[b] = target.at(channel, b) + kCountGuard;
    vsum += g.p[b];
    qsum += g.q[b];
  }
  for (int b = 0; b < bins; ++b) {
    g.p[b] /= vsum;
    g.q[b] /= qsum;
  }
  g.mass = vsum;
  return g;
}

class KlModel final : public HistogramModel {
 public:
  explicit KlModel(const Histogram& target) : HistogramModel(target) {
    target_.validate_distribution();
  }

  const char* kind() const noexcept override { return "kl"; }

  double value_at(std::span<const double> v) const override {
    double total = 0.0;
    for (int c = 0; c < channels_; ++c) {
      const GuardedChannel g = guard_channel(v, target_, c, bins_);
      for (int b = 0; b < bins_; ++b) {
        total += g.p[b] * std::log(g.p[b] / g.q[b]);
      }
    }
    return total;
  }

  std::vector<double> gradient_at(std::span<const double> v) const override {
    std::vector<double> grad(feature_count());
    for (int c = 0; c < channels_; ++c) {
      const GuardedChannel g = guard_channel(v, target_, c, bins_);
      double kl = 0.0;
      for (int b = 0; b < bins_; ++b) kl += g.p[b] * std::log(g.p[b] / g.q[b]);
      for (int b = 0; b < bins_; ++b) {
        grad[static_cast<std::size_t>(c) * bins_ + b] =
            (std::log(g.p[b] / g.q[b]) - kl) / g.mass;
      }
    }
    return grad;
  }
};

class BhattacharyyaModel final : public HistogramModel {
 public:
  explicit BhattacharyyaModel(const Histogram& target)
      : HistogramModel(target) {
    target_.validate_distribution();
  }

  const char* kind() const noexcept override { return "bhattacharyya"; }

  double value_at(std::span<const double> v) const override {
    double total = 0.0;
    for (int c = 0; c < channels_; ++c) {
      const GuardedChannel g = guard_channel(v, target_, c, bins_);
      double coeff = 0.0;
      for (int b = 0; b < bins_; ++b) coeff += std::sqrt(g.p[b] * g.q[b]);
      total += -std::log(coeff);
    }
    return total;
  }

  std::vector<double> gradient_at(std::span<const double> v) const override {
    std::vector<double> grad(feature_count());
    for (int c = 0; c < channels_; ++c) {
      const GuardedChannel g = guard_channel(v, target_, c, bins_);
      double coeff = 0.0;
      for (int b = 0; b < bins_; ++b) coeff += std::sqrt(g.p[b] * g.q[b]);
      for (int b = 0; b < bins_; ++b) {
        grad[static_cast<std::size_t>(c) * bins_ + b] =
            (coeff - std::sqrt(g.q[b] / g.p[b])) / (2.0 * g.mass * coeff);
      }
    }
    return grad;
  }
};

}  // namespace

double RegionalModel::evaluate(const Image& img, const Labeling& s,
                               EvalCounter* counter) const {
  const double value = value_at(features(img, s));
  require(std::isfinite(value), ErrorCode::Numeric,
          std::string(kind()) + " functional produced a non-finite value");
  if (counter) counter->bump();
  return value;
}

std::shared_ptr<const RegionalModel> make_volume(double v0) {
  return std::make_shared<VolumeModel>(v0);
}

std::shared_ptr<const RegionalModel> make_moments(
    std::vector<MomentTarget> targets, int order) {
  return std::make_shared<MomentsModel>(std::move(targets), order);
}

std::shared_ptr<const RegionalModel> make_l2_bins(const Histogram& target) {
  return std::make_shared<L2BinsModel>(target);
}

std::shared_ptr<const RegionalModel> make_kl(const Histogram& target) {
  return std::make_shared<KlModel>(target);
}

std::shared_ptr<const RegionalModel> make_bhattacharyya(
    const Histogram& target) {
  return std::make_shared<BhattacharyyaModel>(target);
}

ScalarField make_loglikelihood(const Image& img, const Histogram& fg,
                               const Histogram& bg) {
  require(fg.normalized() && bg.normalized(), ErrorCode::InvalidArgument,
          "log-likelihood histograms must be normalized");
  require(fg.channels() == img.channels() && bg.channels() == img.channels(),
          ErrorCode::DimensionMismatch,
          "log-likelihood histograms must match the image channels");
  require(fg.bins() == bg.bins(), ErrorCode::DimensionMismatch,
          "fg/bg histograms must share the binning");
  ScalarField f(img.width(), img.height());
  const int bins = fg.bins();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double v = 0.0;
      for (int c = 0; c < img.channels(); ++c) {
        const int b = intensity_bin(img.at(x, y, c), bins);
        v += -std::log(fg.at(c, b) + kProbFloor) +
             std::log(bg.at(c, b) + kProbFloor);
      }
      f.at(x, y) = v;
    }
  }
  return f;
}

std::vector<MomentTarget> load_moments(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, path + ": cannot open for reading");
  std::vector<MomentTarget> targets;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    MomentTarget t;
    require(static_cast<bool>(ls >> t.p >> t.q >> t.value), ErrorCode::Io,
            path + ": malformed moment line: " + line);
    targets.push_back(t);
  }
  return targets;
}

void save_moments(const std::vector<MomentTarget>& targets,
                  const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io, path + ": cannot open for writing");
  int order = 0;
  for (const auto& t : targets) order = std::max(order, t.p + t.q);
  out << "# moments order=" << order << "\n";
  char buf[64];
  for (const auto& t : targets) {
    std::snprintf(buf, sizeof buf, "%.17g", t.value);
    out << t.p << " " << t.q << " " << buf << "\n";
  }
  require(static_cast<bool>(out), ErrorCode::Io, path + ": write failed");
}

void validate_terms(const EnergyTerms& terms) {
  bool any = terms.length_weight != 0.0 || terms.unary.has_value();
  for (const auto& w : terms.regional) {
    require(w.model != nullptr, ErrorCode::InvalidArgument,
            "regional term without a model");
    require(std::isfinite(w.weight) && w.weight >= 0.0,
            ErrorCode::InvalidArgument, "term weights must be >= 0");
    any = true;
  }
  require(std::isfinite(terms.length_weight) && terms.length_weight >= 0.0,
          ErrorCode::InvalidArgument, "length weight must be >= 0");
  require(std::isfinite(terms.unary_weight) && terms.unary_weight >= 0.0,
          ErrorCode::InvalidArgument, "unary weight must be >= 0");
  require(terms.dirac_epsilon > 0.0, ErrorCode::InvalidArgument,
          "dirac epsilon must be positive");
  require(any, ErrorCode::InvalidArgument,
          "composite energy needs at least one term");
}

EnergyReport composite_energy(const EnergyTerms& terms, const Image& img,
                              const Labeling& s, EvalCounter* counter) {
  validate_terms(terms);
  require_same_dims(img.width(), img.height(), s.width(), s.height(),
                    "composite_energy");

  EnergyReport report;
  report.convention = terms.convention;

  for (const auto& term : terms.regional) {
    const double raw = term.model->value_at(term.model->features(img, s));
    require(std::isfinite(raw), ErrorCode::Numeric,
            std::string(term.model->kind()) +
                " functional produced a non-finite value");
    report.regional += term.weight * raw;
    report.contributions.push_back(
        {term.model->kind(), term.weight, raw, term.weight * raw});
  }

  if (terms.unary) {
    const double raw = linear_sum(*terms.unary, s);
    report.unary = terms.unary_weight * raw;
    report.contributions.push_back(
        {"unary", terms.unary_weight, raw, report.unary});
  }

  // Both length conventions are always reported; only one defines the total.
  const SignedDistance sd = signed_distance(s);
  report.length_cont =
      sd.degenerate ? 0.0 : length_continuous(sd.field, terms.dirac_epsilon);
  report.length_crofton =
      crofton_cut_cost(s, crofton_weights(terms.crofton_order));
  report.length_used = terms.convention == LengthConvention::Continuous
                           ? report.length_cont
                           : report.length_crofton;
  if (terms.length_weight != 0.0) {
    report.contributions.push_back({"length", terms.length_weight,
                                    report.length_used,
                                    terms.length_weight * report.length_used});
  }

  report.total = report.regional + report.unary +
                 terms.length_weight * report.length_used;
  require(std::isfinite(report.total), ErrorCode::Numeric,
          "composite energy is non-finite");

  if (counter) counter->bump();
  report.evaluations = counter ? counter->count() : 0;
  return report;
}

ScalarField combined_gradient(const EnergyTerms& terms, const Image& img,
                              const Labeling& s) {
  validate_terms(terms);
  require_same_dims(img.width(), img.height(), s.width(), s.height(),
                    "combined_gradient");
  ScalarField g(s.width(), s.height(), 0.0);
  for (const auto& term : terms.regional) {
    const ScalarField part = term.model->gradient_field(img, s);
    for (std::size_t i = 0; i < g.data().size(); ++i) {
      g.data()[i] += term.weight * part.data()[i];
    }
  }
  if (terms.unary) {
    require_same_dims(terms.unary->width(), terms.unary->height(), s.width(),
                      s.height(), "combined_gradient unary");
    for (std::size_t i = 0; i < g.data().size(); ++i) {
      g.data()[i] += terms.unary_weight * terms.unary->data()[i];
    }
  }
  return g;
}

}  // namespace segopt
