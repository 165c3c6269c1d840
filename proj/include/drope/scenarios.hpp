#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "drope/csv.hpp"
#include "drope/ratio_models.hpp"
#include "drope/types.hpp"

namespace drope {

enum class PolicyFamily { kSoftened, kSoftenedPerfect, kDiverseSoftenedPerfect, kTweak1, kDirichlet };

/// Parameters for one logging/target policy.
///
/// softened:                  prob lambda + zeta*u on the classifier's pick
///                            (u ~ Uniform(-0.5, 0.5), one seeded draw per
///                            context), remainder uniform on other actions.
/// softened_perfect:          same, on the correct-label action.
/// diverse_softened_perfect:  per-class lambda_c from a seeded random
///                            permutation of [1/k, 2/k, ..., 1].
/// tweak1:                    context-independent, rho on one action.
/// dirichlet:                 one seeded Dirichlet(gamma) draw, fixed across
///                            contexts; gamma <= 0.1 mixes with 5% uniform.
struct PolicySpec {
  PolicyFamily family = PolicyFamily::kSoftened;
  double lambda = 0.9;
  double zeta = 0.0;
  double rho = 0.9;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  int chosen_action = -1;  // tweak1 only; -1 draws it from the seed

  void validate() const;
  std::string to_string() const;
};

enum class ShiftKind { kNone, kGaussianPca, kTweak1Covariate };

struct ShiftSpec {
  ShiftKind kind = ShiftKind::kNone;
  double a = 1.5;       // gaussian_pca mean offset divisor
  double b = 2.0;       // gaussian_pca std divisor
  double omega = 1.0;   // tweak1_covariate weight
  int chosen_class = -1;  // tweak1_covariate; -1 = modal class of the dataset

  void validate() const;
  std::string to_string() const;
};

struct KnowledgeFlags {
  bool propensity_known = true;
  bool context_ratio_known = true;

  std::string to_string() const;
};

/// One benchmark condition.
struct Condition {
  std::string dataset_id;
  PolicySpec logging_policy;
  PolicySpec target_policy;
  ShiftSpec shift;
  KnowledgeFlags knowledge;
  int repetitions = 30;
  std::uint64_t seed = 0;
  int train_logging_size = 0;  // 0 = training-split size
  int eval_logging_size = 0;   // 0 = test-split size
  bool sampled_ground_truth = false;
};

/// Hard cap on requested logging sample sizes.
inline constexpr int kMaxLoggingSamples = 1'000'000;

/// What a policy family needs at construction time: a deterministic
/// classifier for softened policies, the labeled context pool for the
/// perfect families.
struct PolicyInputs {
  int num_actions = 0;
  std::function<int(const Eigen::VectorXd&)> deterministic_policy;
  const Eigen::MatrixXd* pool_contexts = nullptr;
  const std::vector<int>* pool_labels = nullptr;
};

StochasticPolicy make_policy(const PolicySpec& spec, const PolicyInputs& inputs);

/// Gaussian parameters for the PCA covariate shift given component scores:
/// mean m = min(c) + (min(c) - mean(c))/a and std s = std(c)/b.
std::pair<double, double> gaussian_weight_params(const Eigen::VectorXd& component_scores, double a,
                                                 double b);

/// Sampling weights from a Gaussian placed on the first principal component
/// (covariance power iteration); normalized to sum 1, strictly positive.
/// Throws when the component scores are all equal.
Eigen::VectorXd gaussian_shift_weights(const Eigen::MatrixXd& contexts, double a, double b);

/// Weight omega for rows of the chosen class, 1 otherwise, normalized.
Eigen::VectorXd tweak1_shift_weights(const std::vector<int>& labels, double omega, int chosen_class);

/// A generated evaluation scenario: logging datasets, target contexts, the
/// ground-truth policy value, and the construction-time sampling weights
/// that define the true density ratios.
struct GeneratedScenario {
  Condition condition;
  int num_actions = 0;

  BanditDataset train_logging;  // sampled from the training split
  BanditDataset eval_logging;   // sampled from the test split
  Eigen::MatrixXd target_contexts;  // the full test split
  std::vector<int> target_labels;
  double true_value = 0.0;

  StochasticPolicy logging_policy;
  StochasticPolicy target_policy;

  Eigen::MatrixXd train_pool_contexts;
  std::vector<int> train_pool_labels;
  Eigen::VectorXd train_pool_weights;  // normalized P_s over the training pool
  Eigen::VectorXd eval_pool_weights;   // normalized P_s over the test pool
  std::vector<int> train_sample_rows;  // pool row of each train_logging sample
  std::vector<int> eval_sample_rows;   // pool row of each eval_logging sample

  /// P_s(x)/P_t(x) from the construction-time weights (1 when the shift kind
  /// is none). Throws when the context is not in the generated pools.
  double true_context_ratio(const Eigen::VectorXd& x) const;

  /// P_s(x)/P_t(x) * beta(a|x)/pi(a|x); zero logging probability yields 0.
  double true_ratio(const Eigen::VectorXd& x, int action) const;

  /// Ground-truth ratio models for the known-W experiment arms. The returned
  /// models reference this scenario; keep it alive while they are in use.
  RatioModel known_ps() const;
  RatioModel known_gcs() const;

  bool uniform_source = true;  // shift kind none
  std::unordered_multimap<std::uint64_t, int> train_pool_index;
  std::unordered_multimap<std::uint64_t, int> eval_pool_index;
};

/// Runs the generation protocol: seeded 75/25 split, policy construction,
/// source-distribution weights, ground-truth value on the test split (exact
/// per-context expectation by default, sampled behind the flag), and both
/// logging datasets drawn with replacement under P_s and beta.
GeneratedScenario generate(const Condition& condition, const ClassificationData& data);

/// Synthetic labeled table with imbalanced Gaussian class clusters; a
/// stand-in for real classification CSVs in demos and tests.
ClassificationData synth_classification(int rows, int features, int classes, std::uint64_t seed);

}  // namespace drope
