#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Core>

#include "drope/linear_models.hpp"
#include "drope/types.hpp"

namespace drope {

/// Floor on estimated propensities, classifier probabilities, and source
/// terms in reciprocal weights. Prevents infinite weights while perturbing
/// well-covered regions negligibly.
inline constexpr double kProbFloor = 1e-3;

/// Estimated logging policy: multinomial logistic on (context -> action),
/// probabilities floored at kProbFloor and renormalized.
class PropensityModel {
 public:
  PropensityModel() = default;
  explicit PropensityModel(LinearClassifier clf) : clf_(std::move(clf)) {}

  /// Fits on the logged (context, action) pairs. Throws if the data holds
  /// fewer than 2 distinct actions.
  static PropensityModel fit(const BanditDataset& ds, std::uint64_t seed = 0);

  /// Floored-and-renormalized probability vector over the action set.
  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;

  double propensity(const Eigen::VectorXd& x, int action) const {
    return probabilities(x)[action];
  }

  const LinearClassifier& classifier() const { return clf_; }

 private:
  LinearClassifier clf_;
};

/// Source-vs-target discriminator yielding the context density ratio
/// P_s(x)/P_t(x) through the Bayes identity, with a prior correction of
/// n_target/n_source when the two samples differ in size.
class ContextRatioModel {
 public:
  ContextRatioModel() = default;
  ContextRatioModel(LinearClassifier clf, double prior_correction)
      : clf_(std::move(clf)), prior_correction_(prior_correction) {}

  /// Source rows are labeled 1, target rows 0.
  static ContextRatioModel fit(const Eigen::MatrixXd& source_contexts,
                               const Eigen::MatrixXd& target_contexts, std::uint64_t seed = 0);

  /// p(source|x)/p(target|x) * prior_correction, probabilities clamped to
  /// [kProbFloor, 1 - kProbFloor].
  double ratio(const Eigen::VectorXd& x) const;

  /// The Bayes identity on a given classifier output.
  static double ratio_from_probability(double p_source, double prior_correction = 1.0);

  double prior_correction() const { return prior_correction_; }
  const LinearClassifier& classifier() const { return clf_; }

 private:
  LinearClassifier clf_;
  double prior_correction_ = 1.0;
};

enum class RatioKind { kKnownPs, kKnownGcs, kFittedPs, kFittedGcs };

/// Supplies the density ratio W(x,a) = P_s(x,a)/P_t(x,a) and its reciprocal
/// (the importance weight), from ground truth or fitted models.
struct RatioModel {
  RatioKind kind = RatioKind::kKnownPs;
  /// beta(a|x) — the true logging policy for known kinds, the fitted
  /// propensity for fitted kinds.
  std::function<double(const Eigen::VectorXd&, int)> logging_prob;
  /// P_s(x)/P_t(x); required by the GCS kinds, ignored otherwise.
  std::function<double(const Eigen::VectorXd&)> context_ratio;

  bool is_gcs() const { return kind == RatioKind::kKnownGcs || kind == RatioKind::kFittedGcs; }
};

RatioModel known_ps_ratio(const StochasticPolicy& logging_policy);
RatioModel fitted_ps_ratio(PropensityModel propensity);
RatioModel known_gcs_ratio(const StochasticPolicy& logging_policy,
                           std::function<double(const Eigen::VectorXd&)> context_ratio);
RatioModel fitted_gcs_ratio(PropensityModel propensity, ContextRatioModel context_ratio);

/// W(x,a): beta(a|x)/pi(a|x) for PS kinds, multiplied by P_s(x)/P_t(x) for
/// GCS kinds. pi is floored at kProbFloor in the denominator; a zero
/// numerator yields W = 0 (the base-distribution fallback in predict).
double ratio_w(const RatioModel& model, const Eigen::VectorXd& x, int action,
               const StochasticPolicy& target_policy);

/// Importance weight in the reciprocal direction: pi(a|x)/beta(a|x) for PS,
/// P_t(x,a)/P_s(x,a) for GCS, with beta and source terms floored at
/// kProbFloor.
double ips_weight(const RatioModel& model, const Eigen::VectorXd& x, int action,
                  const StochasticPolicy& target_policy);

}  // namespace drope
