#include "drope/robust_reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "drope/rng.hpp"
#include "drope/sgd.hpp"

namespace drope {

void BaseDistribution::validate() const {
  if (!std::isfinite(mu0)) throw std::invalid_argument("BaseDistribution: mu0 must be finite");
  if (!(sigma0_sq > 0.0)) throw std::invalid_argument("BaseDistribution: sigma0_sq must be positive");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (l2_reg < 0.0) throw std::invalid_argument("TrainConfig: l2_reg must be >= 0");
}

GaussianPrediction predict(const RobustParams& params, const BaseDistribution& base,
                           double ratio, double theta_dot_phi) {
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("predict: ratio must be finite and >= 0");
  }
  if (ratio == 0.0) return {base.mu0, base.sigma0_sq};  // exact base fallback
  const double inv_s0 = 1.0 / base.sigma0_sq;
  const double precision = std::max(2.0 * ratio * params.theta_r + inv_s0, kPrecisionFloor);
  const double sigma_sq = 1.0 / precision;
  const double mu = sigma_sq * (-2.0 * ratio * theta_dot_phi + base.mu0 * inv_s0);
  return {mu, sigma_sq};
}

GaussianPrediction predict(const RobustParams& params, const BaseDistribution& base,
                           const FeatureMap& fm, const Eigen::VectorXd& x, int action,
                           double ratio) {
  if (ratio == 0.0) return {base.mu0, base.sigma0_sq};
  return predict(params, base, ratio, params.theta_x.dot(fm(x, action)));
}

RewardBatch make_reward_batch(const BanditDataset& ds, const std::vector<double>& ratios,
                              const FeatureMap& fm) {
  if (static_cast<int>(ratios.size()) != ds.size()) {
    throw std::invalid_argument("make_reward_batch: ratios must align with samples");
  }
  RewardBatch batch;
  batch.phi.resize(ds.size(), fm.output_dim());
  batch.reward.resize(ds.size());
  batch.ratio.resize(ds.size());
  for (int i = 0; i < ds.size(); ++i) {
    const LoggedSample& s = ds[i];
    batch.phi.row(i) = fm(s.context, s.action).transpose();
    batch.reward[i] = s.reward;
    const double w = ratios[static_cast<std::size_t>(i)];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("make_reward_batch: ratio " + std::to_string(i) +
                                  " must be finite and >= 0");
    }
    batch.ratio[i] = w;
  }
  return batch;
}

namespace {

// mu and sigma_sq for one precomputed row.
inline void predict_row(const RobustParams& params, double inv_s0, double mu0_inv_s0,
                        double ratio, double theta_dot_phi, double& mu, double& sigma_sq) {
  const double precision = std::max(2.0 * ratio * params.theta_r + inv_s0, kPrecisionFloor);
  sigma_sq = 1.0 / precision;
  mu = sigma_sq * (-2.0 * ratio * theta_dot_phi + mu0_inv_s0);
}

void accumulate_gradient(const RobustParams& params, const BaseDistribution& base,
                         const RewardBatch& batch, std::span<const int> rows,
                         double l2_reg, double& g_theta_r, Eigen::VectorXd& g_theta_x) {
  const double inv_s0 = 1.0 / base.sigma0_sq;
  const double mu0_inv_s0 = base.mu0 * inv_s0;
  g_theta_r = 0.0;
  g_theta_x.setZero();
  for (int i : rows) {
    const double tdp = batch.phi.row(i).dot(params.theta_x);
    double mu, sigma_sq;
    predict_row(params, inv_s0, mu0_inv_s0, batch.ratio[i], tdp, mu, sigma_sq);
    const double r = batch.reward[i];
    g_theta_r += mu * mu + sigma_sq - r * r;
    g_theta_x.noalias() += (2.0 * (mu - r)) * batch.phi.row(i).transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  g_theta_r *= inv_n;
  g_theta_x *= inv_n;
  if (l2_reg > 0.0) {
    g_theta_r -= 2.0 * l2_reg * params.theta_r;
    g_theta_x -= 2.0 * l2_reg * params.theta_x;
  }
}

std::vector<int> all_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

void batch_gradient(const RobustParams& params, const BaseDistribution& base,
                    const RewardBatch& batch, double l2_reg, double& g_theta_r,
                    Eigen::VectorXd& g_theta_x) {
  if (batch.phi.rows() == 0) throw std::invalid_argument("batch_gradient: empty batch");
  base.validate();
  g_theta_x.resize(batch.phi.cols());
  const std::vector<int> rows = all_rows(static_cast<int>(batch.phi.rows()));
  accumulate_gradient(params, base, batch, rows, l2_reg, g_theta_r, g_theta_x);
}

double batch_nll(const RobustParams& params, const BaseDistribution& base, const RewardBatch& batch) {
  if (batch.phi.rows() == 0) throw std::invalid_argument("batch_nll: empty batch");
  const double inv_s0 = 1.0 / base.sigma0_sq;
  const double mu0_inv_s0 = base.mu0 * inv_s0;
  double total = 0.0;
  for (int i = 0; i < batch.phi.rows(); ++i) {
    const double w = batch.ratio[i];
    if (!(w > 0.0)) throw std::invalid_argument("batch_nll: ratios must be strictly positive");
    double mu, sigma_sq;
    predict_row(params, inv_s0, mu0_inv_s0, w, batch.phi.row(i).dot(params.theta_x), mu, sigma_sq);
    const double resid = batch.reward[i] - mu;
    total += (0.5 * std::log(2.0 * M_PI * sigma_sq) + resid * resid / (2.0 * sigma_sq)) / w;
  }
  return total / static_cast<double>(batch.phi.rows());
}

double predictive_nll(const RobustParams& params, const BaseDistribution& base, const RewardBatch& batch) {
  if (batch.phi.rows() == 0) throw std::invalid_argument("predictive_nll: empty batch");
  const double inv_s0 = 1.0 / base.sigma0_sq;
  const double mu0_inv_s0 = base.mu0 * inv_s0;
  double total = 0.0;
  for (int i = 0; i < batch.phi.rows(); ++i) {
    double mu, sigma_sq;
    predict_row(params, inv_s0, mu0_inv_s0, batch.ratio[i], batch.phi.row(i).dot(params.theta_x), mu,
                sigma_sq);
    const double resid = batch.reward[i] - mu;
    total += 0.5 * std::log(2.0 * M_PI * sigma_sq) + resid * resid / (2.0 * sigma_sq);
  }
  return total / static_cast<double>(batch.phi.rows());
}

RobustParams train(const BanditDataset& ds, const std::vector<double>& ratios,
                   const BaseDistribution& base, const FeatureMap& fm, const TrainConfig& cfg) {
  cfg.validate();
  base.validate();
  const RewardBatch batch = make_reward_batch(ds, ratios, fm);
  const int p = fm.output_dim();

  Rng init_rng(cfg.seed, "theta-init");
  Eigen::VectorXd packed(p + 1);
  for (int i = 0; i < p + 1; ++i) packed[i] = init_rng.normal(0.0, 0.01);

  SgdOptions opt;
  opt.learning_rate = cfg.learning_rate;
  opt.batch_size = std::min(cfg.batch_size, ds.size());
  opt.epochs = cfg.epochs;
  opt.lr_decay = cfg.lr_decay;
  opt.seed = cfg.seed;

  RobustParams scratch;
  scratch.theta_x.resize(p);
  Eigen::VectorXd g_theta_x(p);
  minibatch_sgd(packed, ds.size(), opt, [&](std::span<const int> rows, Eigen::VectorXd& grad) {
    scratch.theta_r = packed[0];
    scratch.theta_x = packed.tail(p);
    double g_theta_r;
    accumulate_gradient(scratch, base, batch, rows, cfg.l2_reg, g_theta_r, g_theta_x);
    // the driver minimizes; descend the negated ascent gradient
    grad[0] = -g_theta_r;
    grad.tail(p) = -g_theta_x;
  });

  RobustParams out;
  out.theta_r = packed[0];
  out.theta_x = packed.tail(p);
  return out;
}

RobustParams train_grid(const BanditDataset& ds, const std::vector<double>& ratios,
                        const BaseDistribution& base, const FeatureMap& fm,
                        const TrainConfig& base_cfg, const TrainGrid& grid) {
  if (grid.learning_rates.empty() || grid.batch_sizes.empty()) {
    throw std::invalid_argument("train_grid: empty grid");
  }
  if (grid.learning_rates.size() == 1 && grid.batch_sizes.size() == 1) {
    TrainConfig cfg = base_cfg;
    cfg.learning_rate = grid.learning_rates[0];
    cfg.batch_size = grid.batch_sizes[0];
    return train(ds, ratios, base, fm, cfg);
  }

  const int n = ds.size();
  const int n_val = std::max(1, static_cast<int>(std::lround(grid.validation_fraction * n)));
  if (n_val >= n) throw std::invalid_argument("train_grid: validation slice leaves no training data");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(base_cfg.seed, "grid-split");
  split_rng.shuffle(order);

  auto subset = [&](int begin, int end) {
    std::vector<LoggedSample> samples;
    std::vector<double> w;
    samples.reserve(static_cast<std::size_t>(end - begin));
    for (int i = begin; i < end; ++i) {
      samples.push_back(ds[order[static_cast<std::size_t>(i)]]);
      w.push_back(ratios[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }
    return std::pair(BanditDataset(std::move(samples), ds.num_actions(), ds.num_features()),
                     std::move(w));
  };
  auto [fit_ds, fit_w] = subset(0, n - n_val);
  auto [val_ds, val_w] = subset(n - n_val, n);
  const RewardBatch val_batch = make_reward_batch(val_ds, val_w, fm);

  TrainConfig best_cfg = base_cfg;
  double best_nll = std::numeric_limits<double>::infinity();
  for (double lr : grid.learning_rates) {
    for (int bs : grid.batch_sizes) {
      TrainConfig cfg = base_cfg;
      cfg.learning_rate = lr;
      cfg.batch_size = bs;
      const RobustParams candidate = train(fit_ds, fit_w, base, fm, cfg);
      const double nll = predictive_nll(candidate, base, val_batch);
      if (nll < best_nll) {
        best_nll = nll;
        best_cfg = cfg;
      }
    }
  }
  return train(ds, ratios, base, fm, best_cfg);
}

RobustRewardModel::RobustRewardModel(RobustParams params, BaseDistribution base, FeatureMapMode mode,
                                     int num_features, int num_actions)
    : params_(std::move(params)), base_(base), fm_(mode, num_features, num_actions) {
  base_.validate();
  if (params_.theta_x.size() != fm_.output_dim()) {
    throw std::invalid_argument("RobustRewardModel: theta_x dimension does not match feature map");
  }
}

GaussianPrediction RobustRewardModel::predict(const Eigen::VectorXd& x, int action, double ratio) const {
  return drope::predict(params_, base_, fm_, x, action, ratio);
}

std::string RobustRewardModel::to_json() const {
  nlohmann::json j;
  j["theta_r"] = params_.theta_r;
  j["theta_x"] = std::vector<double>(params_.theta_x.data(), params_.theta_x.data() + params_.theta_x.size());
  j["mu0"] = base_.mu0;
  j["sigma0_sq"] = base_.sigma0_sq;
  j["feature_map_mode"] = to_string(fm_.mode());
  j["num_features"] = fm_.num_features();
  j["num_actions"] = fm_.num_actions();
  return j.dump(2);
}

RobustRewardModel RobustRewardModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RobustParams params;
  params.theta_r = j.at("theta_r").get<double>();
  const auto tx = j.at("theta_x").get<std::vector<double>>();
  params.theta_x = Eigen::Map<const Eigen::VectorXd>(tx.data(), static_cast<Eigen::Index>(tx.size()));
  BaseDistribution base{j.at("mu0").get<double>(), j.at("sigma0_sq").get<double>()};
  return RobustRewardModel(std::move(params), base,
                           feature_map_mode_from_string(j.at("feature_map_mode").get<std::string>()),
                           j.at("num_features").get<int>(), j.at("num_actions").get<int>());
}

void RobustRewardModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RobustRewardModel::save: cannot write " + path);
  out << to_json() << "\n";
}

RobustRewardModel RobustRewardModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("RobustRewardModel::load: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace drope
