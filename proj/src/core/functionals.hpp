#ifndef SEGOPT_CORE_FUNCTIONALS_HPP
#define SEGOPT_CORE_FUNCTIONALS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/length.hpp"

namespace segopt {

/// Counts whole-energy evaluations ("updates"); one per composite_energy or
/// RegionalModel::evaluate call. Owned by the run that uses it.
class EvalCounter {
 public:
  void bump() noexcept { ++count_; }
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_ = 0;
};

struct MomentTarget {
  int p;
  int q;
  double value;
};

/// Non-linear regional functional R(S) = F(<f_1,S>, ..., <f_k,S>). The model
/// exposes F and dF/dv on the feature vector v(S) = (<f_i,S>)_i so callers can
/// evaluate R, probe F numerically, and build the per-pixel derivative field.
class RegionalModel {
 public:
  virtual ~RegionalModel() = default;

  virtual const char* kind() const noexcept = 0;
  virtual std::size_t feature_count() const noexcept = 0;

  virtual std::vector<double> features(const Image& img,
                                       const Labeling& s) const = 0;
  virtual double value_at(std::span<const double> v) const = 0;
  virtual std::vector<double> gradient_at(std::span<const double> v) const = 0;

  /// R(S) = F(v(S)); bumps the evaluation counter when one is supplied.
  double evaluate(const Image& img, const Labeling& s,
                  EvalCounter* counter = nullptr) const;

  /// g(x) = sum_i dF/dv_i(v(S)) * f_i(x), the per-pixel first-order
  /// functional derivative of R at S.
  virtual ScalarField gradient_field(const Image& img,
                                     const Labeling& s) const = 0;
};

std::shared_ptr<const RegionalModel> make_volume(double v0);
std::shared_ptr<const RegionalModel> make_moments(
    std::vector<MomentTarget> targets, int order);
std::shared_ptr<const RegionalModel> make_l2_bins(const Histogram& target);
std::shared_ptr<const RegionalModel> make_kl(const Histogram& target);
std::shared_ptr<const RegionalModel> make_bhattacharyya(const Histogram& target);

/// Log-likelihood appearance unary: f(x) = -log(Pr(I(x)|fg) + eps)
///                                        + log(Pr(I(x)|bg) + eps),
/// summed over channels; D(S) = <f,S> is lower where foreground is likely.
ScalarField make_loglikelihood(const Image& img, const Histogram& fg,
                               const Histogram& bg);

/// "p q value" per line, '#' comments allowed.
std::vector<MomentTarget> load_moments(const std::string& path);
void save_moments(const std::vector<MomentTarget>& targets,
                  const std::string& path);

enum class LengthConvention { Continuous, Crofton };

/// Weighted term list of the composite energy
///   E(S) = sum_m w_m R_m(S) + w_u <u,S> + lambda L(S).
struct EnergyTerms {
  struct Weighted {
    std::shared_ptr<const RegionalModel> model;
    double weight = 1.0;
  };
  std::vector<Weighted> regional;
  std::optional<ScalarField> unary;
  double unary_weight = 1.0;
  double length_weight = 0.0;
  /// Which length measure defines E for decisions and traces.
  LengthConvention convention = LengthConvention::Crofton;
  double dirac_epsilon = 1.5;
  int crofton_order = 16;
};

struct EnergyReport {
  double total = 0.0;
  double regional = 0.0;
  double unary = 0.0;
  double length_cont = 0.0;
  double length_crofton = 0.0;
  double length_used = 0.0;
  LengthConvention convention = LengthConvention::Crofton;
  struct Contribution {
    std::string name;
    double weight;
    double raw;
    double weighted;
  };
  std::vector<Contribution> contributions;
  std::uint64_t evaluations = 0;
};

/// Full energy of a labeling under both length conventions; exactly one
/// counted evaluation per call.
EnergyReport composite_energy(const EnergyTerms& terms, const Image& img,
                              const Labeling& s, EvalCounter* counter = nullptr);

/// Sum of weighted regional derivative fields plus linear unaries (no length
/// term): the gradient-flow force and the trust-region Taylor unary.
ScalarField combined_gradient(const EnergyTerms& terms, const Image& img,
                              const Labeling& s);

void validate_terms(const EnergyTerms& terms);

}  // namespace segopt

#endif
