#include "drope/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "drope/linear_models.hpp"
#include "drope/pca.hpp"
#include "drope/rng.hpp"

namespace drope {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void PolicySpec::validate() const {
  switch (family) {
    case PolicyFamily::kSoftened:
    case PolicyFamily::kSoftenedPerfect:
      if (zeta < 0.0) throw std::invalid_argument("PolicySpec: zeta must be >= 0");
      if (lambda + zeta / 2.0 > 1.0 + 1e-12) {
        throw std::invalid_argument("PolicySpec: lambda + zeta/2 must be <= 1");
      }
      if (lambda - zeta / 2.0 < -1e-12) {
        throw std::invalid_argument("PolicySpec: lambda - zeta/2 must be >= 0");
      }
      break;
    case PolicyFamily::kDiverseSoftenedPerfect:
      break;
    case PolicyFamily::kTweak1:
      if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("PolicySpec: rho must be in (0,1)");
      break;
    case PolicyFamily::kDirichlet:
      if (!(gamma > 0.0)) throw std::invalid_argument("PolicySpec: gamma must be positive");
      break;
  }
}

std::string PolicySpec::to_string() const {
  switch (family) {
    case PolicyFamily::kSoftened:
      return "softened(" + fmt(lambda) + "," + fmt(zeta) + ")";
    case PolicyFamily::kSoftenedPerfect:
      return "softened_perfect(" + fmt(lambda) + "," + fmt(zeta) + ")";
    case PolicyFamily::kDiverseSoftenedPerfect:
      return "diverse_softened_perfect";
    case PolicyFamily::kTweak1:
      return "tweak1(" + fmt(rho) + ")";
    case PolicyFamily::kDirichlet:
      return "dirichlet(" + fmt(gamma) + ")";
  }
  return "?";
}

void ShiftSpec::validate() const {
  switch (kind) {
    case ShiftKind::kNone:
      break;
    case ShiftKind::kGaussianPca:
      if (!(a > 0.0)) throw std::invalid_argument("ShiftSpec: a must be positive");
      if (!(b > 0.0)) throw std::invalid_argument("ShiftSpec: b must be positive");
      break;
    case ShiftKind::kTweak1Covariate:
      if (!(omega >= 1.0)) throw std::invalid_argument("ShiftSpec: omega must be >= 1");
      break;
  }
}

std::string ShiftSpec::to_string() const {
  switch (kind) {
    case ShiftKind::kNone:
      return "none";
    case ShiftKind::kGaussianPca:
      return "gauss(" + fmt(a) + "," + fmt(b) + ")";
    case ShiftKind::kTweak1Covariate:
      return "tweak1cov(" + fmt(omega) + ")";
  }
  return "?";
}

std::string KnowledgeFlags::to_string() const {
  return std::string(propensity_known ? "bknown" : "bfit") + "_" +
         (context_ratio_known ? "wknown" : "wfit");
}

namespace {

// Label lookup for the perfect policy families: exact context match.
struct PoolLookup {
  std::unordered_multimap<std::uint64_t, int> index;
  Eigen::MatrixXd contexts;
  std::vector<int> labels;

  int label_of(const Eigen::VectorXd& x) const {
    auto [lo, hi] = index.equal_range(hash_vector(x));
    for (auto it = lo; it != hi; ++it) {
      if (contexts.row(it->second).transpose() == x) return labels[static_cast<std::size_t>(it->second)];
    }
    throw std::out_of_range("policy: context not in the labeled pool");
  }
};

std::shared_ptr<const PoolLookup> build_lookup(const Eigen::MatrixXd& contexts,
                                               const std::vector<int>& labels) {
  auto lookup = std::make_shared<PoolLookup>();
  lookup->contexts = contexts;
  lookup->labels = labels;
  for (Eigen::Index i = 0; i < contexts.rows(); ++i) {
    lookup->index.emplace(hash_vector(Eigen::VectorXd(contexts.row(i))), static_cast<int>(i));
  }
  return lookup;
}

Eigen::VectorXd concentrated_on(int k, int action, double p) {
  Eigen::VectorXd probs = Eigen::VectorXd::Constant(k, (1.0 - p) / static_cast<double>(k - 1));
  probs[action] = p;
  return probs;
}

// one uniform(-0.5, 0.5) draw per (seed, context)
double per_context_uniform(std::uint64_t seed, const Eigen::VectorXd& x) {
  Rng rng(derive_seed(seed, hash_vector(x)));
  return rng.uniform(-0.5, 0.5);
}

}  // namespace

StochasticPolicy make_policy(const PolicySpec& spec, const PolicyInputs& inputs) {
  spec.validate();
  const int k = inputs.num_actions;
  if (k < 2) throw std::invalid_argument("make_policy: need at least 2 actions");

  StochasticPolicy policy;
  policy.num_actions = k;
  policy.descriptor.family = spec.to_string();

  switch (spec.family) {
    case PolicyFamily::kSoftened: {
      if (!inputs.deterministic_policy) {
        throw std::invalid_argument("make_policy: softened family needs a trained classifier");
      }
      policy.descriptor.params = {{"lambda", spec.lambda}, {"zeta", spec.zeta}};
      policy.evaluator = [k, spec, pick = inputs.deterministic_policy](const Eigen::VectorXd& x) {
        const double u = spec.zeta == 0.0 ? 0.0 : per_context_uniform(spec.seed, x);
        return concentrated_on(k, pick(x), spec.lambda + spec.zeta * u);
      };
      break;
    }
    case PolicyFamily::kSoftenedPerfect: {
      if (inputs.pool_contexts == nullptr || inputs.pool_labels == nullptr) {
        throw std::invalid_argument("make_policy: perfect families need ground-truth labels");
      }
      policy.descriptor.params = {{"lambda", spec.lambda}, {"zeta", spec.zeta}};
      auto lookup = build_lookup(*inputs.pool_contexts, *inputs.pool_labels);
      policy.evaluator = [k, spec, lookup](const Eigen::VectorXd& x) {
        const double u = spec.zeta == 0.0 ? 0.0 : per_context_uniform(spec.seed, x);
        return concentrated_on(k, lookup->label_of(x), spec.lambda + spec.zeta * u);
      };
      break;
    }
    case PolicyFamily::kDiverseSoftenedPerfect: {
      if (inputs.pool_contexts == nullptr || inputs.pool_labels == nullptr) {
        throw std::invalid_argument("make_policy: perfect families need ground-truth labels");
      }
      auto lookup = build_lookup(*inputs.pool_contexts, *inputs.pool_labels);
      std::vector<double> lambdas(static_cast<std::size_t>(k));
      for (int c = 0; c < k; ++c) lambdas[static_cast<std::size_t>(c)] = static_cast<double>(c + 1) / k;
      Rng rng(spec.seed, "diverse-perm");
      rng.shuffle(lambdas);
      policy.evaluator = [k, lambdas, lookup](const Eigen::VectorXd& x) {
        const int label = lookup->label_of(x);
        return concentrated_on(k, label, lambdas[static_cast<std::size_t>(label)]);
      };
      break;
    }
    case PolicyFamily::kTweak1: {
      int action = spec.chosen_action;
      if (action < 0) action = Rng(spec.seed, "tweak1-action").uniform_int(k);
      if (action >= k) throw std::invalid_argument("make_policy: tweak1 chosen action out of range");
      policy.descriptor.params = {{"rho", spec.rho}, {"action", static_cast<double>(action)}};
      const Eigen::VectorXd probs = concentrated_on(k, action, spec.rho);
      policy.evaluator = [probs](const Eigen::VectorXd&) { return probs; };
      break;
    }
    case PolicyFamily::kDirichlet: {
      policy.descriptor.params = {{"gamma", spec.gamma}};
      Rng rng(spec.seed, "dirichlet");
      Eigen::VectorXd probs = rng.dirichlet(spec.gamma, k);
      if (spec.gamma <= 0.1 + 1e-12) {
        probs = 0.95 * probs + Eigen::VectorXd::Constant(k, 0.05 / static_cast<double>(k));
      }
      policy.evaluator = [probs](const Eigen::VectorXd&) { return probs; };
      break;
    }
  }
  return policy;
}

std::pair<double, double> gaussian_weight_params(const Eigen::VectorXd& c, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("gaussian_weight_params: a and b must be positive");
  }
  if (c.size() < 2) throw std::invalid_argument("gaussian_weight_params: need at least 2 scores");
  const double lo = c.minCoeff();
  const double mean = c.mean();
  const double var = (c.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) {
    throw std::invalid_argument("gaussian_weight_params: component scores are all equal");
  }
  return {lo + (lo - mean) / a, sd / b};
}

Eigen::VectorXd gaussian_shift_weights(const Eigen::MatrixXd& contexts, double a, double b) {
  const Eigen::VectorXd scores = first_principal_scores(contexts);
  const auto [m, s] = gaussian_weight_params(scores, a, b);
  Eigen::VectorXd log_density = -((scores.array() - m) / s).square() / 2.0;
  log_density.array() -= log_density.maxCoeff();
  Eigen::VectorXd weights = log_density.array().max(-700.0).exp();
  return weights / weights.sum();
}

Eigen::VectorXd tweak1_shift_weights(const std::vector<int>& labels, double omega, int chosen_class) {
  if (!(omega >= 1.0)) throw std::invalid_argument("tweak1_shift_weights: omega must be >= 1");
  if (labels.empty()) throw std::invalid_argument("tweak1_shift_weights: empty labels");
  if (std::find(labels.begin(), labels.end(), chosen_class) == labels.end()) {
    throw std::invalid_argument("tweak1_shift_weights: chosen class not present");
  }
  Eigen::VectorXd weights(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    weights[static_cast<Eigen::Index>(i)] = labels[i] == chosen_class ? omega : 1.0;
  }
  return weights / weights.sum();
}

namespace {

int modal_class(const std::vector<int>& labels, int k) {
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int y : labels) counts[static_cast<std::size_t>(y)]++;
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Eigen::VectorXd pool_weights(const ShiftSpec& shift, const Eigen::MatrixXd& contexts,
                             const std::vector<int>& labels, int default_class) {
  const Eigen::Index n = contexts.rows();
  switch (shift.kind) {
    case ShiftKind::kNone:
      return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    case ShiftKind::kGaussianPca:
      return gaussian_shift_weights(contexts, shift.a, shift.b);
    case ShiftKind::kTweak1Covariate: {
      const int cls = shift.chosen_class >= 0 ? shift.chosen_class : default_class;
      return tweak1_shift_weights(labels, shift.omega, cls);
    }
  }
  throw std::logic_error("pool_weights: unreachable");
}

// classifier trained on a slice of the pool, wrapped with its standardizer
std::function<int(const Eigen::VectorXd&)> train_deterministic_policy(
    const Eigen::MatrixXd& contexts, const std::vector<int>& labels, int k, std::uint64_t seed) {
  Standardizer std_params = Standardizer::fit(contexts);
  const Eigen::MatrixXd standardized = std_params.apply(contexts);
  LinearClassifier clf =
      LinearClassifier::fit(standardized, labels, k, classifier_sgd_defaults(
                                                         static_cast<int>(contexts.rows()), seed));
  return [std_params = std::move(std_params), clf = std::move(clf)](const Eigen::VectorXd& x) {
    return clf.predict(std_params.apply(x));
  };
}

bool needs_classifier(PolicyFamily family) { return family == PolicyFamily::kSoftened; }

}  // namespace

double GeneratedScenario::true_context_ratio(const Eigen::VectorXd& x) const {
  if (uniform_source) {
    // verify the context belongs to a pool, then the ratio is exactly 1
    const std::uint64_t h = hash_vector(x);
    for (auto [lo, hi] = eval_pool_index.equal_range(h); lo != hi; ++lo) {
      if (target_contexts.row(lo->second).transpose() == x) return 1.0;
    }
    for (auto [lo, hi] = train_pool_index.equal_range(h); lo != hi; ++lo) {
      if (train_pool_contexts.row(lo->second).transpose() == x) return 1.0;
    }
    throw std::out_of_range("true_context_ratio: context not in the generated pools");
  }
  const std::uint64_t h = hash_vector(x);
  for (auto [lo, hi] = eval_pool_index.equal_range(h); lo != hi; ++lo) {
    if (target_contexts.row(lo->second).transpose() == x) {
      return eval_pool_weights[lo->second] * static_cast<double>(eval_pool_weights.size());
    }
  }
  for (auto [lo, hi] = train_pool_index.equal_range(h); lo != hi; ++lo) {
    if (train_pool_contexts.row(lo->second).transpose() == x) {
      return train_pool_weights[lo->second] * static_cast<double>(train_pool_weights.size());
    }
  }
  throw std::out_of_range("true_context_ratio: context not in the generated pools");
}

double GeneratedScenario::true_ratio(const Eigen::VectorXd& x, int action) const {
  const double beta = logging_policy.prob(x, action);
  if (beta == 0.0) return 0.0;
  const double pi = std::max(target_policy.prob(x, action), kProbFloor);
  return true_context_ratio(x) * beta / pi;
}

RatioModel GeneratedScenario::known_ps() const { return known_ps_ratio(logging_policy); }

RatioModel GeneratedScenario::known_gcs() const {
  return known_gcs_ratio(logging_policy,
                         [this](const Eigen::VectorXd& x) { return true_context_ratio(x); });
}

GeneratedScenario generate(const Condition& condition, const ClassificationData& data) {
  condition.logging_policy.validate();
  condition.target_policy.validate();
  condition.shift.validate();
  if (condition.repetitions < 1) throw std::invalid_argument("generate: repetitions must be >= 1");
  if (condition.train_logging_size > kMaxLoggingSamples ||
      condition.eval_logging_size > kMaxLoggingSamples) {
    throw std::invalid_argument("generate: requested logging sample size exceeds the cap");
  }

  const int n = static_cast<int>(data.contexts.rows());
  const int k = data.num_classes;
  const int n_train = 3 * n / 4;
  const int n_test = n - n_train;
  if (n_train < 2 || n_test < 2) throw std::invalid_argument("generate: split too small");

  // 1. seeded 75/25 split
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(condition.seed, "split");
  split_rng.shuffle(order);

  auto gather = [&](int begin, int end, Eigen::MatrixXd& contexts, std::vector<int>& labels) {
    contexts.resize(end - begin, data.contexts.cols());
    labels.resize(static_cast<std::size_t>(end - begin));
    for (int i = begin; i < end; ++i) {
      const int row = order[static_cast<std::size_t>(i)];
      contexts.row(i - begin) = data.contexts.row(row);
      labels[static_cast<std::size_t>(i - begin)] = data.labels[static_cast<std::size_t>(row)];
    }
  };
  Eigen::MatrixXd train_contexts, test_contexts;
  std::vector<int> train_labels, test_labels;
  gather(0, n_train, train_contexts, train_labels);
  gather(n_train, n, test_contexts, test_labels);

  // 2. policies; softened logging uses a classifier trained on 10% of the
  // training split, a softened target uses the full training split
  PolicyInputs logging_inputs{k, nullptr, &data.contexts, &data.labels};
  PolicyInputs target_inputs{k, nullptr, &data.contexts, &data.labels};
  if (needs_classifier(condition.logging_policy.family)) {
    const int slice = std::max(2, static_cast<int>(std::lround(0.1 * n_train)));
    std::vector<int> rows(static_cast<std::size_t>(n_train));
    std::iota(rows.begin(), rows.end(), 0);
    Rng slice_rng(condition.seed, "psi-hat-slice");
    slice_rng.shuffle(rows);
    Eigen::MatrixXd slice_contexts(slice, train_contexts.cols());
    std::vector<int> slice_labels(static_cast<std::size_t>(slice));
    for (int i = 0; i < slice; ++i) {
      slice_contexts.row(i) = train_contexts.row(rows[static_cast<std::size_t>(i)]);
      slice_labels[static_cast<std::size_t>(i)] =
          train_labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    }
    logging_inputs.deterministic_policy = train_deterministic_policy(
        slice_contexts, slice_labels, k, derive_seed(condition.seed, "psi-hat"));
  }
  if (needs_classifier(condition.target_policy.family)) {
    target_inputs.deterministic_policy = train_deterministic_policy(
        train_contexts, train_labels, k, derive_seed(condition.seed, "psi-target"));
  }
  StochasticPolicy beta = make_policy(condition.logging_policy, logging_inputs);
  StochasticPolicy pi = make_policy(condition.target_policy, target_inputs);

  // 3. source-distribution weights per pool
  const int shifted_class = modal_class(data.labels, k);
  const Eigen::VectorXd train_weights =
      pool_weights(condition.shift, train_contexts, train_labels, shifted_class);
  const Eigen::VectorXd eval_weights =
      pool_weights(condition.shift, test_contexts, test_labels, shifted_class);

  // 4. ground-truth value of the target policy on the full test split
  double true_value = 0.0;
  if (condition.sampled_ground_truth) {
    Rng vt_rng(condition.seed, "ground-truth");
    for (int i = 0; i < n_test; ++i) {
      const Eigen::VectorXd x = test_contexts.row(i).transpose();
      const int a = vt_rng.weighted_index(pi.probs(x));
      true_value += a == test_labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    true_value /= static_cast<double>(n_test);
  } else {
    for (int i = 0; i < n_test; ++i) {
      const Eigen::VectorXd x = test_contexts.row(i).transpose();
      true_value += pi.prob(x, test_labels[static_cast<std::size_t>(i)]);
    }
    true_value /= static_cast<double>(n_test);
  }

  // 5. logging datasets: contexts with replacement under P_s, actions from
  // beta, deterministic match/no-match reward
  auto sample_logging = [&](const Eigen::MatrixXd& pool, const std::vector<int>& labels,
                            const Eigen::VectorXd& weights, int count, std::string_view stream,
                            std::vector<int>& rows_out) {
    Rng rng(condition.seed, stream);
    std::vector<LoggedSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    rows_out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
      const int row = rng.weighted_index(weights);
      LoggedSample s;
      s.context = pool.row(row).transpose();
      const Eigen::VectorXd probs = beta.probs(s.context);
      s.action = rng.weighted_index(probs);
      s.reward = s.action == labels[static_cast<std::size_t>(row)] ? 1.0 : 0.0;
      s.logging_propensity = probs[s.action];
      samples.push_back(std::move(s));
      rows_out.push_back(row);
    }
    return BanditDataset(std::move(samples), k, static_cast<int>(pool.cols()));
  };

  const int train_count = condition.train_logging_size > 0 ? condition.train_logging_size : n_train;
  const int eval_count = condition.eval_logging_size > 0 ? condition.eval_logging_size : n_test;
  std::vector<int> train_rows, eval_rows;
  BanditDataset train_logging =
      sample_logging(train_contexts, train_labels, train_weights, train_count, "train-logging",
                     train_rows);
  BanditDataset eval_logging =
      sample_logging(test_contexts, test_labels, eval_weights, eval_count, "eval-logging", eval_rows);

  GeneratedScenario scenario{condition,
                             k,
                             std::move(train_logging),
                             std::move(eval_logging),
                             std::move(test_contexts),
                             std::move(test_labels),
                             true_value,
                             std::move(beta),
                             std::move(pi),
                             std::move(train_contexts),
                             std::move(train_labels),
                             train_weights,
                             eval_weights,
                             std::move(train_rows),
                             std::move(eval_rows)};
  scenario.uniform_source = condition.shift.kind == ShiftKind::kNone;
  for (Eigen::Index i = 0; i < scenario.train_pool_contexts.rows(); ++i) {
    scenario.train_pool_index.emplace(
        hash_vector(Eigen::VectorXd(scenario.train_pool_contexts.row(i))), static_cast<int>(i));
  }
  for (Eigen::Index i = 0; i < scenario.target_contexts.rows(); ++i) {
    scenario.eval_pool_index.emplace(hash_vector(Eigen::VectorXd(scenario.target_contexts.row(i))),
                                     static_cast<int>(i));
  }
  return scenario;
}

ClassificationData synth_classification(int rows, int features, int classes, std::uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("synth_classification: need at least 2 classes");
  if (features < 1) throw std::invalid_argument("synth_classification: need at least 1 feature");
  if (rows < 2 * classes) {
    throw std::invalid_argument("synth_classification: need at least 2 rows per class");
  }
  Rng rng(seed, "synth");

  // imbalanced class sizes ~ 1/(c+1), at least 2 rows each
  std::vector<double> raw(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) raw[static_cast<std::size_t>(c)] = 1.0 / (c + 1.0);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(classes), 2);
  int assigned = 2 * classes;
  for (int c = 0; c < classes && assigned < rows; ++c) {
    const int extra = std::min(rows - assigned,
                               static_cast<int>(std::floor(raw[static_cast<std::size_t>(c)] / total *
                                                           (rows - 2 * classes))));
    counts[static_cast<std::size_t>(c)] += extra;
    assigned += extra;
  }
  for (int c = 0; assigned < rows; c = (c + 1) % classes) {
    counts[static_cast<std::size_t>(c)]++;
    assigned++;
  }

  // partially overlapping Gaussian clusters with uneven feature scales
  const double radius = 1.5;
  Eigen::MatrixXd means(classes, features);
  for (int c = 0; c < classes; ++c) {
    Eigen::VectorXd dir(features);
    for (int j = 0; j < features; ++j) dir[j] = rng.normal();
    means.row(c) = (radius * dir.normalized()).transpose();
  }
  Eigen::VectorXd scale(features), offset(features);
  for (int j = 0; j < features; ++j) {
    scale[j] = rng.uniform(0.5, 2.0);
    offset[j] = rng.uniform(-1.0, 1.0);
  }

  ClassificationData data;
  data.num_classes = classes;
  data.contexts.resize(rows, features);
  data.labels.resize(static_cast<std::size_t>(rows));
  int row = 0;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i, ++row) {
      for (int j = 0; j < features; ++j) {
        data.contexts(row, j) = (means(c, j) + rng.normal()) * scale[j] + offset[j];
      }
      data.labels[static_cast<std::size_t>(row)] = c;
    }
  }

  // shuffle rows so splits are class-mixed even without reshuffling
  std::vector<int> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Eigen::MatrixXd shuffled(rows, features);
  std::vector<int> shuffled_labels(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    shuffled.row(i) = data.contexts.row(perm[static_cast<std::size_t>(i)]);
    shuffled_labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  data.contexts = std::move(shuffled);
  data.labels = std::move(shuffled_labels);

  for (int j = 0; j < features; ++j) data.feature_names.push_back("f" + std::to_string(j));
  for (int c = 0; c < classes; ++c) data.class_names.push_back("c" + std::to_string(c));
  return data;
}

}  // namespace drope
