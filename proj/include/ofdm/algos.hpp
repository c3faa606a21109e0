#pragma once

#include <cstdint>
#include <vector>

#include "ofdm/core.hpp"
#include "ofdm/fnclass.hpp"

namespace ofdm {

// sqrt(ln K / (4 (e - 2) T)); requires T >= ln K / (e - 2).
double eta_schedule(std::size_t K, std::size_t T);

struct HedgeTrace {
  double beta = 0.0;
  double eta = 0.0;
  std::size_t T = 0;
  std::size_t erm_index = 0;
  std::vector<std::size_t> version_space;
  std::vector<std::size_t> selected;     // f_t
  std::vector<double> objective;         // P-hat f_t(., pi_t)
  std::vector<TabularPolicy> policies;   // pi_t, t = 1..T
};

struct HedgeResult {
  RandomizedPolicy policy;
  HedgeTrace trace;
};

HedgeResult ofdm_hedge(const OfflineDataset& data, const FiniteFunctionClass& cls, double beta,
                       double eta, std::size_t T, std::size_t K);

struct HedgeAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  bool passes() const { return lhs <= rhs; }
};

// lhs = sum_t P-hat (f_t(., comparator) - f_t(., pi_t)), rhs = 4 sqrt(T ln K).
HedgeAudit hedge_regret_audit(const HedgeTrace& trace, const FiniteFunctionClass& cls,
                              const TabularPolicy& comparator, const OfflineDataset& data);

struct OnlineRound {
  std::size_t context;
  std::size_t action;
  double reward;
  std::vector<double> action_probs;
  std::vector<double> expert_weights;  // EXP4 only
};

struct OnlineRunLog {
  std::size_t m = 0;
  std::vector<OnlineRound> rounds;
};

struct OnlineResult {
  RandomizedPolicy policy;
  OnlineRunLog log;
};

// Loss-based importance-weighted reward estimate used by EXP4:
// 1 - 1{a = played} (1 - r) / p(played), for every action a.
std::vector<double> iw_reward_estimates(std::size_t K, std::size_t played, double reward,
                                        double prob_played);

// Exponential weights over experts with eta = sqrt(2 ln M / (m K)). The output
// mixes, round by round, the experts' action distributions under the current
// weights, and averages those m composite policies.
OnlineResult exp4(const CBInstance& inst, const std::vector<TabularPolicy>& experts,
                  std::size_t m, std::uint64_t seed);

// Epoch-doubling inverse-gap-weighting learner with an ERM oracle over the
// finite class. One policy per round enters the output mixture.
OnlineResult falcon_online(const CBInstance& inst, const FiniteFunctionClass& cls, std::size_t m,
                           double delta, std::uint64_t seed);

// Inverse-gap distribution at one context given fitted rewards.
std::vector<double> inverse_gap_probs(std::span<const double> fitted, double gamma);

struct HybridResult {
  RandomizedPolicy policy;
  RandomizedPolicy offline;
  RandomizedPolicy online;
};

// Offline learner on the data, online learner for m/2 rounds, EXP4 over the
// two for the remaining m/2 rounds.
HybridResult hybrid_learn(const OfflineDataset& data, const CBInstance& inst,
                          const FiniteFunctionClass& cls, std::size_t m, double beta, double eta,
                          std::size_t T, double delta, std::uint64_t seed);

// 4 sqrt(2 ln 2 / m) + 32 ln(ln(m/2) / delta) / (3m) + 4/m; requires m > 2.
double model_selection_envelope(std::size_t m, double delta);

}  // namespace ofdm
