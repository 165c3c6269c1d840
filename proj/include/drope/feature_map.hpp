#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace drope {

enum class FeatureMapMode { kConcat, kInteraction };

FeatureMapMode feature_map_mode_from_string(const std::string& s);
std::string to_string(FeatureMapMode mode);

/// Joint context-action feature vector for linear reward models.
///
/// concat:      [x; one_hot(a); 1], dimension d + k + 1.
/// interaction: per-action blocks of [x; 1]; the block of the chosen action
///              holds [x; 1], all other blocks are zero. Dimension (d+1)*k.
class FeatureMap {
 public:
  FeatureMap(FeatureMapMode mode, int num_features, int num_actions)
      : mode_(mode), d_(num_features), k_(num_actions) {
    if (d_ < 1 || k_ < 2) throw std::invalid_argument("FeatureMap: need d >= 1 and k >= 2");
  }

  FeatureMapMode mode() const { return mode_; }
  int num_features() const { return d_; }
  int num_actions() const { return k_; }

  int output_dim() const {
    return mode_ == FeatureMapMode::kConcat ? d_ + k_ + 1 : (d_ + 1) * k_;
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x, int action) const {
    if (action < 0 || action >= k_) throw std::out_of_range("FeatureMap: action out of range");
    if (x.size() != d_) throw std::invalid_argument("FeatureMap: context dimension mismatch");
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(output_dim());
    if (mode_ == FeatureMapMode::kConcat) {
      phi.head(d_) = x;
      phi[d_ + action] = 1.0;
      phi[d_ + k_] = 1.0;
    } else {
      const int offset = action * (d_ + 1);
      phi.segment(offset, d_) = x;
      phi[offset + d_] = 1.0;
    }
    return phi;
  }

 private:
  FeatureMapMode mode_;
  int d_;
  int k_;
};

inline FeatureMapMode feature_map_mode_from_string(const std::string& s) {
  if (s == "concat") return FeatureMapMode::kConcat;
  if (s == "interaction") return FeatureMapMode::kInteraction;
  throw std::invalid_argument("unknown feature map mode: " + s);
}

inline std::string to_string(FeatureMapMode mode) {
  return mode == FeatureMapMode::kConcat ? "concat" : "interaction";
}

}  // namespace drope
