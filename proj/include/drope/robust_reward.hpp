#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drope/feature_map.hpp"
#include "drope/types.hpp"

namespace drope {

/// Gaussian fallback predictor N(mu0, sigma0_sq); the reward model reduces
/// to it wherever the density ratio gives the logging data no authority.
struct BaseDistribution {
  double mu0 = 0.6;
  double sigma0_sq = 1.0;

  void validate() const;
};

/// Predictive mean and variance for one (context, action) pair.
struct GaussianPrediction {
  double mu = 0.0;
  double sigma_sq = 1.0;
};

/// Model parameters: the scalar multiplier on r^2 and the vector paired
/// with the joint feature map.
struct RobustParams {
  double theta_r = 0.0;
  Eigen::VectorXd theta_x;
};

/// Floor on the predictive precision 2*W*theta_r + 1/sigma0_sq. Keeps the
/// Gaussian likelihood defined when theta_r drifts negative during training
/// without touching the feasible region.
inline constexpr double kPrecisionFloor = 1e-6;

/// Predictive distribution for a pair whose density ratio is `ratio`:
///   sigma_sq = 1 / max(2*ratio*theta_r + 1/sigma0_sq, kPrecisionFloor)
///   mu       = sigma_sq * (-2*ratio*(theta_x . phi) + mu0/sigma0_sq)
/// ratio == 0 returns (mu0, sigma0_sq) exactly, for every theta.
GaussianPrediction predict(const RobustParams& params, const BaseDistribution& base,
                           double ratio, double theta_dot_phi);

GaussianPrediction predict(const RobustParams& params, const BaseDistribution& base,
                           const FeatureMap& fm, const Eigen::VectorXd& x, int action,
                           double ratio);

/// Training rows with precomputed joint features.
struct RewardBatch {
  Eigen::MatrixXd phi;     // n x output_dim
  Eigen::VectorXd reward;  // n
  Eigen::VectorXd ratio;   // n, each >= 0
};

RewardBatch make_reward_batch(const BanditDataset& ds, const std::vector<double>& ratios,
                              const FeatureMap& fm);

/**
 * Ascent gradient of the ratio-weighted Gaussian log-likelihood on a
 * mini-batch, in closed form:
 *
 *   g_theta_r = mean_i( mu_i^2 + sigma_i^2 - r_i^2 )        - 2*l2_reg*theta_r
 *   g_theta_x = mean_i( 2*(mu_i - r_i) * phi_i )            - 2*l2_reg*theta_x
 *
 * Matches central finite differences of the batch NLL (see batch_nll) to
 * numerical precision; the training step ascends along it.
 */
void batch_gradient(const RobustParams& params, const BaseDistribution& base,
                    const RewardBatch& batch, double l2_reg, double& g_theta_r,
                    Eigen::VectorXd& g_theta_x);

/// Ratio-weighted negative log-likelihood of a batch:
///   mean_i (1/W_i) * ( 0.5*log(2*pi*sigma_i^2) + (r_i - mu_i)^2 / (2*sigma_i^2) ).
/// Requires every ratio strictly positive. batch_gradient is its exact
/// negated gradient (at l2_reg = 0).
double batch_nll(const RobustParams& params, const BaseDistribution& base, const RewardBatch& batch);

/// Unweighted predictive Gaussian NLL; the grid-selection criterion.
double predictive_nll(const RobustParams& params, const BaseDistribution& base, const RewardBatch& batch);

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 50;
  bool lr_decay = true;
  double l2_reg = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mini-batch SGD on the ratio-weighted log-likelihood; `ratios` aligns with
/// the dataset samples. Initialization is N(0, 0.01^2) from cfg.seed, and
/// identical seeds yield bit-identical parameters.
RobustParams train(const BanditDataset& ds, const std::vector<double>& ratios,
                   const BaseDistribution& base, const FeatureMap& fm, const TrainConfig& cfg);

/// Hyperparameter grid searched by validation NLL on a held-out slice of the
/// logging data, then refit on the full data with the winning setting.
struct TrainGrid {
  std::vector<double> learning_rates{0.001, 0.0005};
  std::vector<int> batch_sizes{8, 32, 64, 256};
  double validation_fraction = 0.1;
};

RobustParams train_grid(const BanditDataset& ds, const std::vector<double>& ratios,
                        const BaseDistribution& base, const FeatureMap& fm,
                        const TrainConfig& base_cfg, const TrainGrid& grid);

/// Trained parameters bundled with their base distribution and feature map,
/// serializable to a JSON record {theta_r, theta_x, mu0, sigma0_sq,
/// feature_map_mode, num_features, num_actions}.
class RobustRewardModel {
 public:
  RobustRewardModel(RobustParams params, BaseDistribution base, FeatureMapMode mode,
                    int num_features, int num_actions);

  GaussianPrediction predict(const Eigen::VectorXd& x, int action, double ratio) const;

  const RobustParams& params() const { return params_; }
  const BaseDistribution& base() const { return base_; }
  const FeatureMap& feature_map() const { return fm_; }

  std::string to_json() const;
  static RobustRewardModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static RobustRewardModel load(const std::string& path);

 private:
  RobustParams params_;
  BaseDistribution base_;
  FeatureMap fm_;
};

}  // namespace drope
