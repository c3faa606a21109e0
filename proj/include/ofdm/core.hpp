#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ofdm/table.hpp"

namespace ofdm {

enum class RewardLaw { bernoulli, deterministic };

// Row-stochastic context -> action map pi(a|x).
class TabularPolicy {
 public:
  explicit TabularPolicy(Table probs);

  static TabularPolicy uniform(std::size_t contexts, std::size_t actions);
  // Point mass on actions[x] at each context x.
  static TabularPolicy deterministic(std::span<const std::size_t> actions, std::size_t num_actions);
  static TabularPolicy constant_action(std::size_t contexts, std::size_t num_actions,
                                       std::size_t action);

  const Table& probs() const { return probs_; }
  std::size_t contexts() const { return probs_.rows(); }
  std::size_t actions() const { return probs_.cols(); }
  double operator()(std::size_t x, std::size_t a) const { return probs_(x, a); }

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

 private:
  Table probs_;
};

// Uniform mixture over a nonempty list of same-shape policies.
class RandomizedPolicy {
 public:
  explicit RandomizedPolicy(std::vector<TabularPolicy> iterates);

  const std::vector<TabularPolicy>& iterates() const { return iterates_; }
  std::size_t size() const { return iterates_.size(); }
  // The mixture's marginal action distribution at each context.
  TabularPolicy average() const;

 private:
  std::vector<TabularPolicy> iterates_;
};

class CBInstance {
 public:
  CBInstance(std::vector<double> context_probs, Table mean_rewards, RewardLaw law);

  const std::vector<double>& context_probs() const { return context_probs_; }
  const Table& mean_rewards() const { return mean_rewards_; }
  RewardLaw law() const { return law_; }
  std::size_t num_contexts() const { return context_probs_.size(); }
  std::size_t num_actions() const { return mean_rewards_.cols(); }

 private:
  std::vector<double> context_probs_;
  Table mean_rewards_;
  RewardLaw law_;
};

struct Record {
  std::size_t context;
  std::size_t action;
  double reward;
  friend bool operator==(const Record&, const Record&) = default;
};

struct OfflineDataset {
  std::vector<Record> records;
  std::size_t n() const { return records.size(); }
  // Throws ConfigError when an index or reward is out of range.
  void validate(std::size_t contexts, std::size_t actions) const;
  friend bool operator==(const OfflineDataset&, const OfflineDataset&) = default;
};

OfflineDataset sample_dataset(const CBInstance& inst, const TabularPolicy& mu, std::size_t n,
                              std::uint64_t seed);

// E_{x~ctx, a~pi(.|x)} table(x, a).
double expect_under(std::span<const double> context_probs, const TabularPolicy& pi,
                    const Table& table);

double policy_value(const CBInstance& inst, const TabularPolicy& pi);
double policy_value(const CBInstance& inst, const RandomizedPolicy& pi);

template <class Comparator, class Candidate>
double suboptimality(const CBInstance& inst, const Comparator& comparator,
                     const Candidate& candidate) {
  return policy_value(inst, comparator) - policy_value(inst, candidate);
}

// Per-context argmax of the mean rewards, lowest action index on ties.
TabularPolicy optimal_policy(const CBInstance& inst);

void check_shape(const CBInstance& inst, const TabularPolicy& pi);

}  // namespace ofdm
