#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drope/ratio_models.hpp"
#include "drope/types.hpp"

namespace drope {

/// Predicted mean reward for a (context, action) pair, plus a name tag.
struct RewardFn {
  std::string name;
  std::function<double(const Eigen::VectorXd&, int)> fn;

  double operator()(const Eigen::VectorXd& x, int action) const { return fn(x, action); }
};

struct PolicyValueEstimate {
  double value = 0.0;
  std::string estimator_name;
  int n = 0;
};

/// A logged reward paired with its importance weight.
struct WeightedSample {
  double reward = 0.0;
  double weight = 0.0;
};

/// Direct method: mean over contexts of the exact expectation of the reward
/// model under the target policy (sum over actions, not sampled).
PolicyValueEstimate estimate_dm(const RewardFn& reward, const std::vector<Eigen::VectorXd>& contexts,
                                const StochasticPolicy& target_policy,
                                const std::string& name = "DM");

/// Importance sampling: mean of reward * weight.
PolicyValueEstimate estimate_ips(std::span<const WeightedSample> samples,
                                 const std::string& name = "IPS");

/// Self-normalized importance sampling: sum(r*w) / sum(w). Throws when the
/// normalizer is zero.
PolicyValueEstimate estimate_snips(std::span<const WeightedSample> samples,
                                   const std::string& name = "SnIPS");

/// Doubly robust: dm_value + mean((r - reward(x,a)) * w). dm_value must come
/// from estimate_dm with the same reward function on the same contexts.
PolicyValueEstimate estimate_dr(std::span<const LoggedSample> samples, std::span<const double> weights,
                                const RewardFn& reward, double dm_value,
                                const std::string& name = "DR");

/// Self-normalized doubly robust: dm_value + sum((r - reward(x,a)) * w) / sum(w).
PolicyValueEstimate estimate_sndr(std::span<const LoggedSample> samples, std::span<const double> weights,
                                  const RewardFn& reward, double dm_value,
                                  const std::string& name = "SnDR");

/// Inputs shared by every estimator in a suite: the evaluation logging data,
/// the target policy, the reward models, and the weight sources.
struct SuiteInputs {
  const BanditDataset* eval_logging = nullptr;
  const StochasticPolicy* target_policy = nullptr;
  std::optional<RewardFn> erm_reward;     // DM / DR / SnDR
  std::optional<RewardFn> dmr_reward;     // DM(R): robust model with W == 1
  std::optional<RewardFn> dm_ps_reward;   // robust model with W = beta/pi
  std::optional<RewardFn> dm_gcs_reward;  // robust model with W = P_s/P_t
  const RatioModel* ps_ratio = nullptr;
  const RatioModel* gcs_ratio = nullptr;
};

/// All estimator names the suite can produce, in canonical order.
const std::vector<std::string>& canonical_estimator_names();

/// Family grouping: a DM estimator family comprises the DM itself plus the
/// DR and SnDR built on it; IPS-style estimators are singleton families.
std::string family_of(const std::string& estimator_name);

/// Wires each requested estimator to its reward function and weight source
/// and evaluates all of them in one pass over the evaluation data. Throws
/// when a requested estimator's inputs are missing (e.g. a GCS estimator
/// without a GCS ratio model).
std::map<std::string, PolicyValueEstimate> build_suite(const std::vector<std::string>& names,
                                                       const SuiteInputs& inputs);

}  // namespace drope
