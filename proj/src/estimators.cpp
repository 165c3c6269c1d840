#include "drope/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace drope {

PolicyValueEstimate estimate_dm(const RewardFn& reward, const std::vector<Eigen::VectorXd>& contexts,
                                const StochasticPolicy& target_policy, const std::string& name) {
  if (contexts.empty()) throw std::invalid_argument("estimate_dm: empty context list");
  double total = 0.0;
  for (const Eigen::VectorXd& x : contexts) {
    const Eigen::VectorXd pi = target_policy.probs(x);
    double v = 0.0;
    for (int a = 0; a < target_policy.num_actions; ++a) {
      if (pi[a] > 0.0) v += pi[a] * reward(x, a);
    }
    total += v;
  }
  return {total / static_cast<double>(contexts.size()), name, static_cast<int>(contexts.size())};
}

PolicyValueEstimate estimate_ips(std::span<const WeightedSample> samples, const std::string& name) {
  if (samples.empty()) throw std::invalid_argument("estimate_ips: empty sample list");
  double total = 0.0;
  for (const WeightedSample& s : samples) total += s.reward * s.weight;
  return {total / static_cast<double>(samples.size()), name, static_cast<int>(samples.size())};
}

PolicyValueEstimate estimate_snips(std::span<const WeightedSample> samples, const std::string& name) {
  if (samples.empty()) throw std::invalid_argument("estimate_snips: empty sample list");
  double num = 0.0, den = 0.0;
  for (const WeightedSample& s : samples) {
    num += s.reward * s.weight;
    den += s.weight;
  }
  if (!(den > 0.0)) throw std::domain_error("estimate_snips: weight sum is zero, normalizer undefined");
  return {num / den, name, static_cast<int>(samples.size())};
}

PolicyValueEstimate estimate_dr(std::span<const LoggedSample> samples, std::span<const double> weights,
                                const RewardFn& reward, double dm_value, const std::string& name) {
  if (samples.empty()) throw std::invalid_argument("estimate_dr: empty sample list");
  if (samples.size() != weights.size()) throw std::invalid_argument("estimate_dr: weights misaligned");
  double correction = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    correction += (samples[i].reward - reward(samples[i].context, samples[i].action)) * weights[i];
  }
  correction /= static_cast<double>(samples.size());
  return {dm_value + correction, name, static_cast<int>(samples.size())};
}

PolicyValueEstimate estimate_sndr(std::span<const LoggedSample> samples, std::span<const double> weights,
                                  const RewardFn& reward, double dm_value, const std::string& name) {
  if (samples.empty()) throw std::invalid_argument("estimate_sndr: empty sample list");
  if (samples.size() != weights.size()) throw std::invalid_argument("estimate_sndr: weights misaligned");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    num += (samples[i].reward - reward(samples[i].context, samples[i].action)) * weights[i];
    den += weights[i];
  }
  if (!(den > 0.0)) throw std::domain_error("estimate_sndr: weight sum is zero, normalizer undefined");
  return {dm_value + num / den, name, static_cast<int>(samples.size())};
}

const std::vector<std::string>& canonical_estimator_names() {
  static const std::vector<std::string> names = {
      "DM",    "IPS",   "SnIPS",   "DR",     "SnDR",   "IPS-GCS", "SnIPS-GCS",
      "DM(R)", "DM-PS", "DR-PS",   "SnDR-PS", "DM-GCS", "DR-GCS",  "SnDR-GCS"};
  return names;
}

std::string family_of(const std::string& name) {
  if (name == "DM" || name == "DR" || name == "SnDR") return "DM";
  if (name == "DM-PS" || name == "DR-PS" || name == "SnDR-PS") return "DM-PS";
  if (name == "DM-GCS" || name == "DR-GCS" || name == "SnDR-GCS") return "DM-GCS";
  return name;  // DM(R), IPS, SnIPS, IPS-GCS, SnIPS-GCS are singleton families
}

namespace {

bool needs_ps_weights(const std::string& n) {
  return n == "IPS" || n == "SnIPS" || n == "DR" || n == "SnDR" || n == "DR-PS" || n == "SnDR-PS";
}

bool needs_gcs_weights(const std::string& n) {
  return n == "IPS-GCS" || n == "SnIPS-GCS" || n == "DR-GCS" || n == "SnDR-GCS";
}

bool is_gcs_name(const std::string& n) {
  return n == "IPS-GCS" || n == "SnIPS-GCS" || n == "DM-GCS" || n == "DR-GCS" || n == "SnDR-GCS";
}

const RewardFn& require_reward(const std::optional<RewardFn>& fn, const std::string& estimator) {
  if (!fn) throw std::invalid_argument("build_suite: estimator " + estimator + " lacks a reward model");
  return *fn;
}

}  // namespace

std::map<std::string, PolicyValueEstimate> build_suite(const std::vector<std::string>& names,
                                                       const SuiteInputs& inputs) {
  if (inputs.eval_logging == nullptr || inputs.target_policy == nullptr) {
    throw std::invalid_argument("build_suite: evaluation data and target policy are required");
  }
  const BanditDataset& data = *inputs.eval_logging;
  const StochasticPolicy& pi = *inputs.target_policy;
  if (data.size() == 0) throw std::invalid_argument("build_suite: empty evaluation data");

  bool want_ps = false, want_gcs = false;
  for (const std::string& n : names) {
    if (needs_ps_weights(n)) want_ps = true;
    if (needs_gcs_weights(n)) want_gcs = true;
    if (is_gcs_name(n) && inputs.gcs_ratio == nullptr) {
      throw std::invalid_argument("build_suite: estimator " + n + " requires a GCS ratio model");
    }
  }
  if (want_ps && inputs.ps_ratio == nullptr) {
    throw std::invalid_argument("build_suite: PS-weighted estimators require a PS ratio model");
  }

  std::vector<Eigen::VectorXd> contexts;
  contexts.reserve(static_cast<std::size_t>(data.size()));
  for (const LoggedSample& s : data.samples()) contexts.push_back(s.context);

  // one pass over the evaluation data for each weight direction
  std::vector<double> ps_w, gcs_w;
  std::vector<WeightedSample> ps_rw, gcs_rw;
  if (want_ps) {
    ps_w.reserve(contexts.size());
    ps_rw.reserve(contexts.size());
    for (const LoggedSample& s : data.samples()) {
      const double w = ips_weight(*inputs.ps_ratio, s.context, s.action, pi);
      ps_w.push_back(w);
      ps_rw.push_back({s.reward, w});
    }
  }
  if (want_gcs) {
    gcs_w.reserve(contexts.size());
    gcs_rw.reserve(contexts.size());
    for (const LoggedSample& s : data.samples()) {
      const double w = ips_weight(*inputs.gcs_ratio, s.context, s.action, pi);
      gcs_w.push_back(w);
      gcs_rw.push_back({s.reward, w});
    }
  }

  // DM terms are shared between each DM and its DR/SnDR members
  std::map<std::string, double> dm_cache;
  auto dm_value = [&](const std::string& key, const RewardFn& fn) {
    auto it = dm_cache.find(key);
    if (it == dm_cache.end()) {
      it = dm_cache.emplace(key, estimate_dm(fn, contexts, pi, key).value).first;
    }
    return it->second;
  };

  std::map<std::string, PolicyValueEstimate> out;
  for (const std::string& n : names) {
    if (n == "DM") {
      const RewardFn& fn = require_reward(inputs.erm_reward, n);
      out[n] = {dm_value("DM", fn), n, data.size()};
    } else if (n == "DM(R)") {
      const RewardFn& fn = require_reward(inputs.dmr_reward, n);
      out[n] = {dm_value("DM(R)", fn), n, data.size()};
    } else if (n == "DM-PS") {
      const RewardFn& fn = require_reward(inputs.dm_ps_reward, n);
      out[n] = {dm_value("DM-PS", fn), n, data.size()};
    } else if (n == "DM-GCS") {
      const RewardFn& fn = require_reward(inputs.dm_gcs_reward, n);
      out[n] = {dm_value("DM-GCS", fn), n, data.size()};
    } else if (n == "IPS") {
      out[n] = estimate_ips(ps_rw, n);
    } else if (n == "SnIPS") {
      out[n] = estimate_snips(ps_rw, n);
    } else if (n == "IPS-GCS") {
      out[n] = estimate_ips(gcs_rw, n);
    } else if (n == "SnIPS-GCS") {
      out[n] = estimate_snips(gcs_rw, n);
    } else if (n == "DR") {
      const RewardFn& fn = require_reward(inputs.erm_reward, n);
      out[n] = estimate_dr(data.samples(), ps_w, fn, dm_value("DM", fn), n);
    } else if (n == "SnDR") {
      const RewardFn& fn = require_reward(inputs.erm_reward, n);
      out[n] = estimate_sndr(data.samples(), ps_w, fn, dm_value("DM", fn), n);
    } else if (n == "DR-PS") {
      const RewardFn& fn = require_reward(inputs.dm_ps_reward, n);
      out[n] = estimate_dr(data.samples(), ps_w, fn, dm_value("DM-PS", fn), n);
    } else if (n == "SnDR-PS") {
      const RewardFn& fn = require_reward(inputs.dm_ps_reward, n);
      out[n] = estimate_sndr(data.samples(), ps_w, fn, dm_value("DM-PS", fn), n);
    } else if (n == "DR-GCS") {
      const RewardFn& fn = require_reward(inputs.dm_gcs_reward, n);
      out[n] = estimate_dr(data.samples(), gcs_w, fn, dm_value("DM-GCS", fn), n);
    } else if (n == "SnDR-GCS") {
      const RewardFn& fn = require_reward(inputs.dm_gcs_reward, n);
      out[n] = estimate_sndr(data.samples(), gcs_w, fn, dm_value("DM-GCS", fn), n);
    } else {
      throw std::invalid_argument("build_suite: unknown estimator '" + n + "'");
    }
  }
  return out;
}

}  // namespace drope
