#include "ofdm/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

namespace {

double simplex_tol(std::size_t k) {
  return 1e-12 * std::max(1.0, static_cast<double>(k) / 64.0);
}

}  // namespace

TabularPolicy::TabularPolicy(Table probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) throw ConfigError("policy: empty table");
  const double tol = simplex_tol(probs_.cols());
  for (std::size_t x = 0; x < probs_.rows(); ++x) {
    double sum = 0.0;
    for (double p : probs_.row(x)) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ConfigError("policy: negative or non-finite probability in row " + std::to_string(x));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ConfigError("policy: row " + std::to_string(x) + " does not sum to 1");
    }
  }
}

TabularPolicy TabularPolicy::uniform(std::size_t contexts, std::size_t actions) {
  return TabularPolicy(Table(contexts, actions, 1.0 / static_cast<double>(actions)));
}

TabularPolicy TabularPolicy::deterministic(std::span<const std::size_t> actions,
                                           std::size_t num_actions) {
  Table t(actions.size(), num_actions, 0.0);
  for (std::size_t x = 0; x < actions.size(); ++x) {
    if (actions[x] >= num_actions) throw ConfigError("policy: action index out of range");
    t(x, actions[x]) = 1.0;
  }
  return TabularPolicy(std::move(t));
}

TabularPolicy TabularPolicy::constant_action(std::size_t contexts, std::size_t num_actions,
                                             std::size_t action) {
  std::vector<std::size_t> acts(contexts, action);
  return deterministic(acts, num_actions);
}

RandomizedPolicy::RandomizedPolicy(std::vector<TabularPolicy> iterates)
    : iterates_(std::move(iterates)) {
  if (iterates_.empty()) throw ConfigError("randomized policy: no iterates");
  for (const auto& p : iterates_) {
    if (!p.probs().same_shape(iterates_.front().probs())) {
      throw ConfigError("randomized policy: iterates differ in shape");
    }
  }
}

TabularPolicy RandomizedPolicy::average() const {
  const auto& first = iterates_.front().probs();
  Table acc(first.rows(), first.cols(), 0.0);
  for (const auto& p : iterates_) {
    auto src = p.probs().values();
    auto dst = acc.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  const double inv = 1.0 / static_cast<double>(iterates_.size());
  for (std::size_t x = 0; x < acc.rows(); ++x) {
    auto row = acc.row(x);
    double sum = 0.0;
    for (double& v : row) {
      v *= inv;
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return TabularPolicy(std::move(acc));
}

CBInstance::CBInstance(std::vector<double> context_probs, Table mean_rewards, RewardLaw law)
    : context_probs_(std::move(context_probs)), mean_rewards_(std::move(mean_rewards)), law_(law) {
  if (context_probs_.empty()) throw ConfigError("instance: no contexts");
  if (mean_rewards_.rows() != context_probs_.size()) {
    throw ConfigError("instance: mean table rows do not match context count");
  }
  if (mean_rewards_.cols() < 2) throw ConfigError("instance: need at least 2 actions");
  double sum = 0.0;
  for (double p : context_probs_) {
    if (!(p >= 0.0)) throw ConfigError("instance: negative context probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("instance: context probabilities do not sum to 1");
  for (double v : mean_rewards_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("instance: mean reward outside [0,1]");
  }
}

void OfflineDataset::validate(std::size_t contexts, std::size_t actions) const {
  for (const auto& r : records) {
    if (r.context >= contexts || r.action >= actions) {
      throw ConfigError("dataset: index out of range");
    }
    if (!(r.reward >= 0.0 && r.reward <= 1.0)) throw ConfigError("dataset: reward outside [0,1]");
  }
}

void check_shape(const CBInstance& inst, const TabularPolicy& pi) {
  if (pi.contexts() != inst.num_contexts() || pi.actions() != inst.num_actions()) {
    throw ConfigError("policy shape does not match instance");
  }
}

OfflineDataset sample_dataset(const CBInstance& inst, const TabularPolicy& mu, std::size_t n,
                              std::uint64_t seed) {
  check_shape(inst, mu);
  if (n == 0) throw ConfigError("sample_dataset: n must be at least 1");
  Rng rng(seed);
  OfflineDataset data;
  data.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = rng.categorical(inst.context_probs());
    const std::size_t a = rng.categorical(mu.probs().row(x));
    const double mean = inst.mean_rewards()(x, a);
    const double r = inst.law() == RewardLaw::bernoulli ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean;
    data.records.push_back({x, a, r});
  }
  return data;
}

double expect_under(std::span<const double> context_probs, const TabularPolicy& pi,
                    const Table& table) {
  double v = 0.0;
  for (std::size_t x = 0; x < context_probs.size(); ++x) {
    if (context_probs[x] == 0.0) continue;
    double row = 0.0;
    for (std::size_t a = 0; a < table.cols(); ++a) row += pi(x, a) * table(x, a);
    v += context_probs[x] * row;
  }
  return v;
}

double policy_value(const CBInstance& inst, const TabularPolicy& pi) {
  check_shape(inst, pi);
  return expect_under(inst.context_probs(), pi, inst.mean_rewards());
}

double policy_value(const CBInstance& inst, const RandomizedPolicy& pi) {
  double v = 0.0;
  for (const auto& p : pi.iterates()) v += policy_value(inst, p);
  return v / static_cast<double>(pi.size());
}

TabularPolicy optimal_policy(const CBInstance& inst) {
  std::vector<std::size_t> best(inst.num_contexts());
  const auto& f = inst.mean_rewards();
  for (std::size_t x = 0; x < f.rows(); ++x) {
    auto row = f.row(x);
    best[x] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return TabularPolicy::deterministic(best, inst.num_actions());
}

}  // namespace ofdm
