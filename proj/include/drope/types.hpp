#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace drope {

/// One logged interaction: context, chosen action, observed reward, and
/// (when the logging policy is known) the probability it assigned.
struct LoggedSample {
  Eigen::VectorXd context;
  int action = 0;
  double reward = 0.0;
  std::optional<double> logging_propensity;
};

/// Per-feature affine transform fitted on logging data. Zero-variance
/// features keep scale 1 and are listed in clamped_features.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<int> clamped_features;

  static Standardizer fit(const Eigen::MatrixXd& contexts);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& contexts) const;
};

/// Logged bandit feedback with action-space/feature-space metadata.
/// Immutable after construction; safe to share across threads.
class BanditDataset {
 public:
  BanditDataset(std::vector<LoggedSample> samples, int num_actions, int num_features);

  int num_actions() const { return num_actions_; }
  int num_features() const { return num_features_; }
  int size() const { return static_cast<int>(samples_.size()); }
  const std::vector<LoggedSample>& samples() const { return samples_; }
  const LoggedSample& operator[](int i) const { return samples_[static_cast<std::size_t>(i)]; }

  /// Row-per-sample context matrix.
  Eigen::MatrixXd contexts() const;
  Eigen::VectorXd rewards() const;
  std::vector<int> actions() const;

  const std::optional<Standardizer>& standardization() const { return standardization_; }

  friend BanditDataset standardize(const BanditDataset& ds);

 private:
  std::vector<LoggedSample> samples_;
  int num_actions_ = 0;
  int num_features_ = 0;
  std::optional<Standardizer> standardization_;
};

/// Standardizes every feature to empirical mean 0 and (population) scale 1,
/// keeping the fitted parameters on the returned dataset for reuse on
/// evaluation-time contexts. Requires at least 2 samples.
BanditDataset standardize(const BanditDataset& ds);

/// Family tag plus parameters, kept for reporting and scenario export.
struct PolicyDescriptor {
  std::string family;
  std::vector<std::pair<std::string, double>> params;

  std::string to_string() const;
};

/// Maps a context to a probability vector over the action set.
struct StochasticPolicy {
  int num_actions = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluator;
  PolicyDescriptor descriptor;

  Eigen::VectorXd probs(const Eigen::VectorXd& x) const { return evaluator(x); }
  double prob(const Eigen::VectorXd& x, int action) const { return evaluator(x)[action]; }
};

}  // namespace drope
