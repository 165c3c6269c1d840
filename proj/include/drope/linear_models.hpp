#pragma once

#include <vector>

#include <Eigen/Core>

#include "drope/sgd.hpp"

namespace drope {

/// Multinomial logistic classifier on raw context features; a bias term is
/// appended internally, so weights are k x (d+1).
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(Eigen::MatrixXd weights) : weights_(std::move(weights)) {}

  /// Fits by mini-batch gradient descent on the softmax cross-entropy.
  static LinearClassifier fit(const Eigen::MatrixXd& contexts, const std::vector<int>& labels,
                              int num_classes, const SgdOptions& opt);

  /// Softmax probabilities (no flooring).
  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;

  /// Argmax class; ties resolve to the lowest index.
  int predict(const Eigen::VectorXd& x) const;

  int num_classes() const { return static_cast<int>(weights_.rows()); }
  int num_features() const { return static_cast<int>(weights_.cols()) - 1; }
  const Eigen::MatrixXd& weights() const { return weights_; }

 private:
  Eigen::MatrixXd weights_;  // k x (d+1)
};

/// Full-batch defaults shared by the propensity, context-ratio, and policy
/// classifiers: 200 epochs, lr 0.1 with the standard decay schedule.
inline SgdOptions classifier_sgd_defaults(int n_samples, std::uint64_t seed) {
  SgdOptions opt;
  opt.learning_rate = 0.1;
  opt.batch_size = n_samples;
  opt.epochs = 200;
  opt.lr_decay = true;
  opt.seed = seed;
  return opt;
}

/// Linear least-squares on caller-provided feature rows, trained by the
/// shared SGD machinery.
class LinearRegressor {
 public:
  LinearRegressor() = default;
  explicit LinearRegressor(Eigen::VectorXd weights) : weights_(std::move(weights)) {}

  static LinearRegressor fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                             const SgdOptions& opt);

  double predict(const Eigen::VectorXd& feature_row) const { return weights_.dot(feature_row); }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::VectorXd weights_;
};

}  // namespace drope
