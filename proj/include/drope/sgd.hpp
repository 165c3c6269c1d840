#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drope/rng.hpp"

namespace drope {

struct SgdOptions {
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 50;
  bool lr_decay = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("SgdOptions: learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("SgdOptions: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("SgdOptions: epochs must be >= 1");
  }
};

/// Per-epoch schedule: base_lr * 10 / (10 + sqrt(epoch - 1)), epoch 1-based.
inline double decayed_learning_rate(double base_lr, int epoch, bool decay) {
  if (!decay) return base_lr;
  return base_lr * 10.0 / (10.0 + std::sqrt(static_cast<double>(epoch - 1)));
}

/// Mini-batch SGD minimizer over n samples. grad_fn(batch_rows, grad_out)
/// must fill grad_out with the descent gradient on the given rows. Shuffles
/// once per epoch with the seeded generator; the trailing partial batch is
/// used. Throws std::runtime_error on a non-finite gradient, reporting the
/// offending epoch and batch index.
template <typename GradFn>
void minibatch_sgd(Eigen::VectorXd& params, int n_samples, const SgdOptions& opt, GradFn&& grad_fn) {
  opt.validate();
  if (n_samples < 1) throw std::invalid_argument("minibatch_sgd: need at least 1 sample");

  Rng rng(opt.seed, "sgd-shuffle");
  std::vector<int> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd grad(params.size());

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    const double lr = decayed_learning_rate(opt.learning_rate, epoch, opt.lr_decay);
    rng.shuffle(order);
    int batch_index = 0;
    for (int start = 0; start < n_samples; start += opt.batch_size, ++batch_index) {
      const int len = std::min(opt.batch_size, n_samples - start);
      grad_fn(std::span<const int>(order.data() + start, static_cast<std::size_t>(len)), grad);
      if (!grad.allFinite()) {
        throw std::runtime_error("minibatch_sgd: non-finite gradient at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      params -= lr * grad;
    }
  }
}

}  // namespace drope
