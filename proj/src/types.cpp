#include "drope/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace drope {

Standardizer Standardizer::fit(const Eigen::MatrixXd& contexts) {
  if (contexts.rows() < 2) {
    throw std::invalid_argument("Standardizer::fit: need at least 2 samples");
  }
  Standardizer s;
  const auto n = static_cast<double>(contexts.rows());
  s.mean = contexts.colwise().mean();
  Eigen::MatrixXd centered = contexts.rowwise() - s.mean.transpose();
  s.scale = (centered.array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale[j] > 0.0)) {
      s.scale[j] = 1.0;
      s.clamped_features.push_back(static_cast<int>(j));
    }
  }
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    throw std::invalid_argument("Standardizer::apply: dimension mismatch");
  }
  return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& contexts) const {
  Eigen::MatrixXd out(contexts.rows(), contexts.cols());
  for (Eigen::Index i = 0; i < contexts.rows(); ++i) {
    out.row(i) = apply(Eigen::VectorXd(contexts.row(i))).transpose();
  }
  return out;
}

BanditDataset::BanditDataset(std::vector<LoggedSample> samples, int num_actions, int num_features)
    : samples_(std::move(samples)), num_actions_(num_actions), num_features_(num_features) {
  if (num_actions_ < 2) throw std::invalid_argument("BanditDataset: need at least 2 actions");
  if (num_features_ < 1) throw std::invalid_argument("BanditDataset: need at least 1 feature");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const LoggedSample& s = samples_[i];
    if (s.context.size() != num_features_) {
      throw std::invalid_argument("BanditDataset: sample " + std::to_string(i) +
                                  " has wrong feature dimension");
    }
    if (s.action < 0 || s.action >= num_actions_) {
      throw std::invalid_argument("BanditDataset: sample " + std::to_string(i) +
                                  " action out of range");
    }
    if (!std::isfinite(s.reward)) {
      throw std::invalid_argument("BanditDataset: sample " + std::to_string(i) +
                                  " has non-finite reward");
    }
    if (s.logging_propensity && !(*s.logging_propensity > 0.0)) {
      throw std::invalid_argument("BanditDataset: sample " + std::to_string(i) +
                                  " has non-positive logging propensity");
    }
  }
}

Eigen::MatrixXd BanditDataset::contexts() const {
  Eigen::MatrixXd out(size(), num_features_);
  for (int i = 0; i < size(); ++i) out.row(i) = samples_[static_cast<std::size_t>(i)].context.transpose();
  return out;
}

Eigen::VectorXd BanditDataset::rewards() const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = samples_[static_cast<std::size_t>(i)].reward;
  return out;
}

std::vector<int> BanditDataset::actions() const {
  std::vector<int> out(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(i)] = samples_[static_cast<std::size_t>(i)].action;
  return out;
}

BanditDataset standardize(const BanditDataset& ds) {
  Standardizer fitted = Standardizer::fit(ds.contexts());
  std::vector<LoggedSample> transformed = ds.samples();
  for (LoggedSample& s : transformed) s.context = fitted.apply(s.context);
  BanditDataset out(std::move(transformed), ds.num_actions(), ds.num_features());
  out.standardization_ = std::move(fitted);
  return out;
}

std::string PolicyDescriptor::to_string() const {
  std::ostringstream os;
  os << family;
  if (!params.empty()) {
    os << "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i > 0) os << ",";
      os << params[i].first << "=" << params[i].second;
    }
    os << ")";
  }
  return os.str();
}

}  // namespace drope
