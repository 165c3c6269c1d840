#include "drope/linear_models.hpp"

#include <cmath>
#include <stdexcept>

namespace drope {

namespace {

Eigen::VectorXd with_bias(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out[x.size()] = 1.0;
  return out;
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace

LinearClassifier LinearClassifier::fit(const Eigen::MatrixXd& contexts, const std::vector<int>& labels,
                                       int num_classes, const SgdOptions& opt) {
  const int n = static_cast<int>(contexts.rows());
  const int d = static_cast<int>(contexts.cols());
  if (n < 1) throw std::invalid_argument("LinearClassifier::fit: empty training set");
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("LinearClassifier::fit: labels/contexts size mismatch");
  }
  if (num_classes < 2) throw std::invalid_argument("LinearClassifier::fit: need at least 2 classes");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("LinearClassifier::fit: label out of range");
  }

  Eigen::MatrixXd features(n, d + 1);
  features.leftCols(d) = contexts;
  features.col(d).setOnes();

  const int p = num_classes * (d + 1);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(p);
  auto weight_view = [&](Eigen::VectorXd& v) {
    return Eigen::Map<Eigen::MatrixXd>(v.data(), num_classes, d + 1);
  };

  minibatch_sgd(params, n, opt, [&](std::span<const int> rows, Eigen::VectorXd& grad) {
    grad.setZero();
    auto w = weight_view(params);
    auto g = weight_view(grad);
    for (int i : rows) {
      const Eigen::VectorXd xi = features.row(i).transpose();
      Eigen::VectorXd p_i = stable_softmax(w * xi);
      p_i[labels[static_cast<std::size_t>(i)]] -= 1.0;
      g.noalias() += p_i * xi.transpose();
    }
    grad /= static_cast<double>(rows.size());
  });

  return LinearClassifier(Eigen::Map<Eigen::MatrixXd>(params.data(), num_classes, d + 1));
}

Eigen::VectorXd LinearClassifier::probabilities(const Eigen::VectorXd& x) const {
  return stable_softmax(weights_ * with_bias(x));
}

int LinearClassifier::predict(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd logits = weights_ * with_bias(x);
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

LinearRegressor LinearRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                     const SgdOptions& opt) {
  const int n = static_cast<int>(features.rows());
  if (n < 1) throw std::invalid_argument("LinearRegressor::fit: empty training set");
  if (targets.size() != n) throw std::invalid_argument("LinearRegressor::fit: targets size mismatch");

  Eigen::VectorXd params = Eigen::VectorXd::Zero(features.cols());
  minibatch_sgd(params, n, opt, [&](std::span<const int> rows, Eigen::VectorXd& grad) {
    grad.setZero();
    for (int i : rows) {
      const double residual = features.row(i).dot(params) - targets[i];
      grad.noalias() += residual * features.row(i).transpose();
    }
    grad *= 2.0 / static_cast<double>(rows.size());
  });
  return LinearRegressor(std::move(params));
}

}  // namespace drope
