#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ofdm/core.hpp"
#include "ofdm/table.hpp"
#include "ofdm/transfer.hpp"

namespace ofdm {

// Episodic MDP with deterministic transitions. Steps are 0-based in code:
// h = 0 is the first step and Q_H is identically zero.
class MDPInstance {
 public:
  MDPInstance(std::size_t states, std::size_t actions, std::size_t horizon,
              std::vector<std::size_t> next, std::vector<double> mean_reward,
              std::vector<double> initial, RewardLaw law);

  std::size_t states() const { return S_; }
  std::size_t actions() const { return K_; }
  std::size_t horizon() const { return H_; }
  std::size_t next(std::size_t h, std::size_t s, std::size_t a) const {
    return next_[(h * S_ + s) * K_ + a];
  }
  double reward(std::size_t h, std::size_t s, std::size_t a) const {
    return mean_reward_[(h * S_ + s) * K_ + a];
  }
  const std::vector<double>& initial() const { return initial_; }
  RewardLaw law() const { return law_; }

 private:
  std::size_t S_, K_, H_;
  std::vector<std::size_t> next_;
  std::vector<double> mean_reward_;
  std::vector<double> initial_;
  RewardLaw law_;
};

struct MDPPolicy {
  std::vector<TabularPolicy> steps;

  static MDPPolicy uniform(std::size_t states, std::size_t actions, std::size_t horizon);
  static MDPPolicy constant_action(std::size_t states, std::size_t actions, std::size_t horizon,
                                   std::size_t action);
  std::size_t horizon() const { return steps.size(); }
};

struct MDPRandomizedPolicy {
  std::vector<MDPPolicy> iterates;
};

// Per-step finite classes of Q-tables; F_h has entries in [0, H - h] for
// 0-based h.
class MDPFunctionClass {
 public:
  MDPFunctionClass(std::vector<std::vector<Table>> per_step,
                   std::optional<std::vector<std::size_t>> star = std::nullopt);

  std::size_t horizon() const { return per_step_.size(); }
  const std::vector<Table>& step(std::size_t h) const { return per_step_[h]; }
  std::size_t size(std::size_t h) const { return per_step_[h].size(); }
  const std::optional<std::vector<std::size_t>>& star() const { return star_; }
  // Product of the per-step sizes as a double (may exceed integer range).
  double joint_size() const;

 private:
  std::vector<std::vector<Table>> per_step_;
  std::optional<std::vector<std::size_t>> star_;
};

struct Transition {
  std::size_t state;
  std::size_t action;
  double reward;
  std::size_t next_state;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct TrajectoryDataset {
  std::size_t horizon = 0;
  std::vector<std::vector<Transition>> trajectories;
  std::size_t n() const { return trajectories.size(); }
  friend bool operator==(const TrajectoryDataset&, const TrajectoryDataset&) = default;
};

TrajectoryDataset mdp_sample(const MDPInstance& mdp, const MDPPolicy& mu, std::size_t n,
                             std::uint64_t seed);

// f(s, pi) = sum_a pi(a|s) f(s, a).
double value_at(const Table& f, const TabularPolicy& pi, std::size_t s);

// (f_h(s,a) - r - f_{h+1}(s', pi_{h+1}))^2; pass nullptr for f_next at the
// last step.
double bellman_loss(const Table& f_h, const Table* f_next, const TabularPolicy* pi_next,
                    const Transition& step);

// T^pi_h f_{h+1}: r_h(s,a) + f_{h+1}(next(s,a), pi_{h+1}); f_next == nullptr
// gives the last-step backup r_h.
Table bellman_backup(const MDPInstance& mdp, std::size_t h, const Table* f_next,
                     const TabularPolicy* pi_next);

std::vector<Table> q_values(const MDPInstance& mdp, const MDPPolicy& pi);
double mdp_policy_value(const MDPInstance& mdp, const MDPPolicy& pi);
double mdp_policy_value(const MDPInstance& mdp, const MDPRandomizedPolicy& pi);
MDPPolicy mdp_optimal_policy(const MDPInstance& mdp);
// State-action occupancy d_h(s, a) of pi from the initial distribution.
std::vector<Table> occupancy(const MDPInstance& mdp, const MDPPolicy& pi);

enum class MDPSolver { automatic, joint, chain };
inline constexpr double kJointGuard = 1e6;

struct MDPVersionSpace {
  MDPSolver solver = MDPSolver::joint;
  double beta = 0.0;
  // Joint mode only: every member tuple in lexicographic order.
  std::vector<std::vector<std::size_t>> members;
  // Both modes: for each f_1, the least constraint cost over completions;
  // feasible iff <= beta.
  std::vector<double> first_step_cost;
};

// Version space for a fixed policy, with the loss normalized by n:
// (1/n) sum_i sum_h [L_i(f_h, f_{h+1}) - min_g L_i(g, f_{h+1})] <= beta.
MDPVersionSpace mdp_version_space(const MDPFunctionClass& cls, const TrajectoryDataset& data,
                                  const MDPPolicy& pi, double beta,
                                  MDPSolver solver = MDPSolver::automatic);

struct MDPHedgeTrace {
  double beta = 0.0;
  double eta = 0.0;
  std::size_t T = 0;
  MDPSolver solver = MDPSolver::joint;
  std::vector<std::vector<std::size_t>> selected;  // f^(t) tuple indices
  std::vector<double> objective;                   // empirical f_1(s_1, pi_1^(t))
  std::vector<MDPPolicy> policies;                 // pi^(t), t = 1..T
};

struct MDPHedgeResult {
  MDPRandomizedPolicy policy;
  MDPHedgeTrace trace;
};

MDPHedgeResult ofdm_hedge_mdp(const TrajectoryDataset& data, const MDPFunctionClass& cls,
                              double beta, double eta, std::size_t T, std::size_t K,
                              MDPSolver solver = MDPSolver::automatic);

// Per-(h, s) Hedge audit: max over h, s of
// sum_t (f_h^(t)(s, comparator) - f_h^(t)(s, pi_h^(t))) against 4 b sqrt(T ln K).
struct MDPAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  bool passes() const { return lhs <= rhs; }
};
MDPAudit mdp_hedge_audit(const MDPHedgeTrace& trace, const MDPFunctionClass& cls,
                         const MDPPolicy& comparator, double b);

// sqrt(ln K / (4 (e - 2) b^2 T)).
double eta_schedule_mdp(std::size_t K, std::size_t T, double b);

struct MDPTransferEstimate {
  std::vector<TransferEstimate> per_step;
  double factor = 0.0;
};

// max over h and ordered pairs (f_h, g_h) of
// |E_{d^pi_h}[f_h - g_h]|^{2 rho} / E_{d^mu_h}[(f_h - g_h)^2].
MDPTransferEstimate mdp_transfer_factor(const MDPFunctionClass& cls, const MDPInstance& mdp,
                                        const MDPPolicy& mu, const MDPPolicy& pi, double rho);

// d(eps, n) = max_h ln(per_step_cover_counts[h]); returns
// c (H^2 eps + H^3 (d + ln(H / delta)) / n).
double mdp_beta_schedule(const std::vector<double>& per_step_cover_counts, std::size_t n,
                         std::size_t H, double eps, double delta, double c);

// Cover count of F_h and F_h(., Pi) at eps = 0 on the whole state-action
// space: max of the distinct table count and the product of per-action
// distinct slice counts.
std::vector<double> mdp_cover_counts(const MDPFunctionClass& cls);

}  // namespace ofdm
