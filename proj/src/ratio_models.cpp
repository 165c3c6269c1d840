#include "drope/ratio_models.hpp"

#include <algorithm>
#include <set>

namespace drope {

PropensityModel PropensityModel::fit(const BanditDataset& ds, std::uint64_t seed) {
  const std::vector<int> actions = ds.actions();
  const std::set<int> distinct(actions.begin(), actions.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("PropensityModel::fit: fewer than 2 distinct actions in data");
  }
  const SgdOptions opt = classifier_sgd_defaults(ds.size(), derive_seed(seed, "propensity"));
  return PropensityModel(LinearClassifier::fit(ds.contexts(), actions, ds.num_actions(), opt));
}

Eigen::VectorXd PropensityModel::probabilities(const Eigen::VectorXd& x) const {
  Eigen::VectorXd p = clf_.probabilities(x);
  p = p.cwiseMax(kProbFloor);
  return p / p.sum();
}

ContextRatioModel ContextRatioModel::fit(const Eigen::MatrixXd& source_contexts,
                                         const Eigen::MatrixXd& target_contexts,
                                         std::uint64_t seed) {
  const Eigen::Index ns = source_contexts.rows();
  const Eigen::Index nt = target_contexts.rows();
  if (ns == 0 || nt == 0) {
    throw std::invalid_argument("ContextRatioModel::fit: both context sets must be nonempty");
  }
  if (source_contexts.cols() != target_contexts.cols()) {
    throw std::invalid_argument("ContextRatioModel::fit: feature dimension mismatch");
  }
  Eigen::MatrixXd stacked(ns + nt, source_contexts.cols());
  stacked.topRows(ns) = source_contexts;
  stacked.bottomRows(nt) = target_contexts;
  std::vector<int> labels(static_cast<std::size_t>(ns + nt), 0);
  std::fill(labels.begin(), labels.begin() + ns, 1);

  const SgdOptions opt = classifier_sgd_defaults(static_cast<int>(ns + nt),
                                                 derive_seed(seed, "context-ratio"));
  LinearClassifier clf = LinearClassifier::fit(stacked, labels, 2, opt);
  const double prior_correction = static_cast<double>(nt) / static_cast<double>(ns);
  return ContextRatioModel(std::move(clf), prior_correction);
}

double ContextRatioModel::ratio_from_probability(double p_source, double prior_correction) {
  const double p = std::clamp(p_source, kProbFloor, 1.0 - kProbFloor);
  return p / (1.0 - p) * prior_correction;
}

double ContextRatioModel::ratio(const Eigen::VectorXd& x) const {
  return ratio_from_probability(clf_.probabilities(x)[1], prior_correction_);
}

RatioModel known_ps_ratio(const StochasticPolicy& logging_policy) {
  RatioModel m;
  m.kind = RatioKind::kKnownPs;
  m.logging_prob = [policy = logging_policy](const Eigen::VectorXd& x, int a) {
    return policy.prob(x, a);
  };
  return m;
}

RatioModel fitted_ps_ratio(PropensityModel propensity) {
  RatioModel m;
  m.kind = RatioKind::kFittedPs;
  m.logging_prob = [model = std::move(propensity)](const Eigen::VectorXd& x, int a) {
    return model.propensity(x, a);
  };
  return m;
}

RatioModel known_gcs_ratio(const StochasticPolicy& logging_policy,
                           std::function<double(const Eigen::VectorXd&)> context_ratio) {
  RatioModel m;
  m.kind = RatioKind::kKnownGcs;
  m.logging_prob = [policy = logging_policy](const Eigen::VectorXd& x, int a) {
    return policy.prob(x, a);
  };
  m.context_ratio = std::move(context_ratio);
  return m;
}

RatioModel fitted_gcs_ratio(PropensityModel propensity, ContextRatioModel context_ratio) {
  RatioModel m;
  m.kind = RatioKind::kFittedGcs;
  m.logging_prob = [model = std::move(propensity)](const Eigen::VectorXd& x, int a) {
    return model.propensity(x, a);
  };
  m.context_ratio = [model = std::move(context_ratio)](const Eigen::VectorXd& x) {
    return model.ratio(x);
  };
  return m;
}

double ratio_w(const RatioModel& model, const Eigen::VectorXd& x, int action,
               const StochasticPolicy& target_policy) {
  const double beta = model.logging_prob(x, action);
  if (beta == 0.0) return 0.0;
  const double pi = std::max(target_policy.prob(x, action), kProbFloor);
  double w = beta / pi;
  if (model.is_gcs()) {
    if (!model.context_ratio) throw std::invalid_argument("ratio_w: GCS kind without context ratio");
    w *= model.context_ratio(x);
  }
  return w;
}

double ips_weight(const RatioModel& model, const Eigen::VectorXd& x, int action,
                  const StochasticPolicy& target_policy) {
  const double beta = std::max(model.logging_prob(x, action), kProbFloor);
  const double pi = target_policy.prob(x, action);
  double weight = pi / beta;
  if (model.is_gcs()) {
    if (!model.context_ratio) throw std::invalid_argument("ips_weight: GCS kind without context ratio");
    weight /= std::max(model.context_ratio(x), kProbFloor);
  }
  return weight;
}

}  // namespace drope
