#pragma once

#include <cstdint>
#include <vector>

#include "ofdm/table.hpp"

namespace ofdm {

struct ViolationReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double delta = 0.0;
  // Per trial: sup over the class of (lhs - rhs); the trial violates iff > 0.
  std::vector<double> margins;
  double fraction() const {
    return trials == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(trials);
  }
};

// delta + 3 sqrt(delta (1 - delta) / trials).
double violation_gate(double delta, std::size_t trials);

// sqrt(2 V ln(2N/delta) / n) + 62 b ln(6N/delta) / n + 61 eps.
double generic_bernstein_rhs(double variance, double N, double b, std::size_t n, double delta,
                             double eps);

// Each g is a vector of values over the finite sample space Z with law
// z_probs. N is the number of distinct functions over all of Z.
ViolationReport bernstein_check_generic(const std::vector<std::vector<double>>& G,
                                        const std::vector<double>& z_probs, double b, std::size_t n,
                                        double delta, double eps, std::size_t trials,
                                        std::uint64_t seed);

// One-step tabular law of (x, a, r, x'): (x, a) ~ xa_probs, r ~ Ber(mean(x, a)),
// x' ~ next[(x * K + a)].
struct TabularStepSampler {
  std::size_t states = 0;
  std::size_t actions = 0;
  Table xa_probs;
  Table mean_reward;
  std::vector<std::vector<double>> next;

  // 3 states, 2 actions, stochastic transitions, seeded.
  static TabularStepSampler random(std::uint64_t seed, std::size_t states = 3,
                                   std::size_t actions = 2);
  // g*(x, a) = mean(x, a) + E[g(x') | x, a].
  Table target(const std::vector<double>& g) const;
};

// b^2 (36 ln N_u + 83 ln N_g + 108 ln(12/delta)) / n + 108 b eps.
double bellman_rhs_first(double b, double Nu, double Ng, std::size_t n, double delta, double eps);
// b^2 (4 ln N_u + 28 ln N_g + 28 ln(6/delta)) / n + 30 b eps.
double bellman_rhs_second(double b, double Nu, double Ng, std::size_t n, double delta, double eps);

struct BellmanViolationReport {
  ViolationReport first;
  ViolationReport second;
};

// U: tables over X x A with values in [0, b]; G: vectors over X with
// r + g(x') in [0, b].
BellmanViolationReport bernstein_check_bellman(const std::vector<Table>& U,
                                               const std::vector<std::vector<double>>& G,
                                               const TabularStepSampler& sampler, double b,
                                               std::size_t n, double delta, double eps,
                                               std::size_t trials, std::uint64_t seed);

}  // namespace ofdm
