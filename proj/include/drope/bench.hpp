#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drope/csv.hpp"
#include "drope/feature_map.hpp"
#include "drope/scenarios.hpp"

namespace drope {

struct DatasetRef {
  std::string id;
  std::string path;
  std::string label_column = "label";
};

/// Reward-model training settings shared by every condition: the
/// learning-rate and batch-size grids searched by validation NLL, the epoch
/// budget, and the Gaussian base distribution.
struct TrainSettings {
  std::vector<double> learning_rates{0.001, 0.0005};
  std::vector<int> batch_sizes{8, 32, 64, 256};
  int epochs = 50;
  bool lr_decay = true;
  double l2_reg = 0.0;
  double mu0 = 0.6;
  double sigma0_sq = 1.0;
  FeatureMapMode feature_map = FeatureMapMode::kConcat;
  double validation_fraction = 0.1;
};

/// A full benchmark: the condition grid is the cross product of datasets,
/// logging policies, target policies, shifts, and knowledge flags.
struct ExperimentConfig {
  std::vector<DatasetRef> datasets;
  std::vector<PolicySpec> logging_policies;
  std::vector<PolicySpec> target_policies;
  std::vector<ShiftSpec> shifts = {ShiftSpec{}};
  std::vector<KnowledgeFlags> knowledge = {KnowledgeFlags{}};
  std::vector<std::string> estimators;
  int repetitions = 30;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  int workers = 1;
  TrainSettings training;
  bool sampled_ground_truth = false;
  int train_logging_size = 0;
  int eval_logging_size = 0;

  void validate() const;
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

struct EstimatorResult {
  std::string estimator;
  double mse = 0.0;
  double bias = 0.0;
  double mean_estimate = 0.0;
  int reps = 0;
};

struct ConditionResult {
  std::string condition_id;
  std::string dataset;
  std::string logging_policy;
  std::string target_policy;
  std::string shift;
  std::string knowledge_flags;
  std::vector<EstimatorResult> estimators;
};

struct ConditionPlan {
  std::string id;
  DatasetRef dataset;
  Condition condition;
};

std::vector<ConditionPlan> enumerate_conditions(const ExperimentConfig& config);

/// The per-repetition condition actually generated: the scenario seed and
/// the policies' stochastic terms are re-drawn from (master_seed, rep).
Condition rep_condition(const Condition& base, std::uint64_t master_seed, int rep);

/// Runs one condition across its repetitions and aggregates per-estimator
/// MSE, bias, and mean estimate against the scenario's ground-truth value.
ConditionResult run_condition(const ConditionPlan& plan, const ClassificationData& data,
                              const ExperimentConfig& config);

/// Runs the whole grid with a condition-level worker pool. Results persist
/// incrementally under <output_dir>/state/, completed conditions are skipped
/// on resume, and the merged results.csv is rewritten deterministically at
/// the end. Per-condition failures are recorded and skipped; the run
/// continues. Worker count: explicit config.workers, overridden by the
/// DROPE_WORKERS environment variable.
std::vector<ConditionResult> run(const ExperimentConfig& config);

void write_results_csv(const std::string& path, const std::vector<ConditionResult>& results);
std::vector<ConditionResult> load_results_csv(const std::string& path);

struct CdfPoint {
  std::string estimator;
  double ratio = 0.0;          // +inf when the baseline MSE is 0 and the method's is not
  double cum_fraction = 0.0;
};

/// Per estimator, the sorted relative MSEs against the baseline estimator
/// with cumulative fractions; 0/0 counts as ratio 1.
std::vector<CdfPoint> relative_cdf(const std::vector<ConditionResult>& results,
                                   const std::string& baseline);
void write_cdf_csv(const std::string& path, const std::vector<CdfPoint>& points);

struct FamilyReport {
  std::string family;
  int wins = 0;
  double win_fraction = 0.0;
  int conditions = 0;
};

/// Best-family counts across conditions. A family's score in a condition is
/// the minimum MSE over its members; ties break by the canonical family
/// order (DM, IPS, SnIPS, IPS-GCS, SnIPS-GCS, DM(R), DM-PS, DM-GCS).
std::vector<FamilyReport> report(const std::vector<ConditionResult>& results);
std::string render_report(const std::vector<FamilyReport>& reports);

/// Finite-difference check of the robust-regression gradient: max over
/// draws and coordinates of |analytic - FD| / max(|FD|, 1e-3), so a result
/// <= tol means every coordinate is within tol relative with a tol*1e-3
/// absolute floor.
double gradcheck_suite(int draws, std::uint64_t seed);

/// Writes logging.csv (x..., a, r, true_w), eval_logging.csv,
/// target_contexts.csv, and meta.json for one generated condition.
void export_scenario_files(const ExperimentConfig& config, const std::string& condition_id, int rep,
                           const std::string& out_dir);

}  // namespace drope
