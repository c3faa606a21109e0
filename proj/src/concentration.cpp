#include "ofdm/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <type_traits>

#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

namespace {

template <class V>
double distinct_count(const std::vector<V>& items) {
  std::map<std::vector<double>, bool> seen;
  for (const auto& it : items) {
    if constexpr (std::is_same_v<V, Table>) {
      seen.emplace(std::vector<double>(it.values().begin(), it.values().end()), true);
    } else {
      seen.emplace(it, true);
    }
  }
  return static_cast<double>(seen.size());
}

void check_common(std::size_t n, double delta, double eps, std::size_t trials) {
  if (n == 0) throw ConfigError("bernstein check: n must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("bernstein check: delta must lie in (0,1)");
  if (!(eps >= 0.0)) throw ConfigError("bernstein check: eps must be nonnegative");
  if (trials == 0) throw ConfigError("bernstein check: trials must be at least 1");
}

}  // namespace

double violation_gate(double delta, std::size_t trials) {
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

double generic_bernstein_rhs(double variance, double N, double b, std::size_t n, double delta,
                             double eps) {
  const double nd = static_cast<double>(n);
  return std::sqrt(2.0 * variance * std::log(2.0 * N / delta) / nd) +
         62.0 * b * std::log(6.0 * N / delta) / nd + 61.0 * eps;
}

ViolationReport bernstein_check_generic(const std::vector<std::vector<double>>& G,
                                        const std::vector<double>& z_probs, double b, std::size_t n,
                                        double delta, double eps, std::size_t trials,
                                        std::uint64_t seed) {
  check_common(n, delta, eps, trials);
  if (G.empty()) throw ConfigError("bernstein_check_generic: empty class");
  const std::size_t Z = z_probs.size();
  for (const auto& g : G) {
    if (g.size() != Z) throw ConfigError("bernstein_check_generic: function and sampler sizes differ");
    for (double v : g) {
      if (std::abs(v) > b) throw ConfigError("bernstein_check_generic: function outside [-b, b]");
    }
  }
  const double N = distinct_count(G);
  std::vector<double> rhs(G.size()), mean(G.size());
  for (std::size_t j = 0; j < G.size(); ++j) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t z = 0; z < Z; ++z) {
      m += z_probs[z] * G[j][z];
      m2 += z_probs[z] * G[j][z] * G[j][z];
    }
    mean[j] = m;
    rhs[j] = generic_bernstein_rhs(std::max(0.0, m2 - m * m), N, b, n, delta, eps);
  }

  ViolationReport rep;
  rep.trials = trials;
  rep.delta = delta;
  rep.margins.reserve(trials);
  std::vector<double> counts(Z);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {t}));
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[rng.categorical(z_probs)] += 1.0;
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < G.size(); ++j) {
      double emp = 0.0;
      for (std::size_t z = 0; z < Z; ++z) emp += counts[z] * G[j][z];
      emp /= static_cast<double>(n);
      sup = std::max(sup, mean[j] - emp - rhs[j]);
    }
    rep.margins.push_back(sup);
    if (sup > 0.0) ++rep.violations;
  }
  return rep;
}

TabularStepSampler TabularStepSampler::random(std::uint64_t seed, std::size_t states,
                                              std::size_t actions) {
  Rng rng(seed);
  TabularStepSampler s;
  s.states = states;
  s.actions = actions;
  s.xa_probs = Table(states, actions);
  s.mean_reward = Table(states, actions);
  double z = 0.0;
  for (double& v : s.xa_probs.values()) {
    v = 0.5 + rng.uniform();
    z += v;
  }
  for (double& v : s.xa_probs.values()) v /= z;
  for (double& v : s.mean_reward.values()) v = rng.uniform();
  s.next.assign(states * actions, std::vector<double>(states));
  for (auto& row : s.next) {
    double rz = 0.0;
    for (double& v : row) {
      v = 0.2 + rng.uniform();
      rz += v;
    }
    for (double& v : row) v /= rz;
  }
  return s;
}

Table TabularStepSampler::target(const std::vector<double>& g) const {
  if (g.size() != states) throw ConfigError("step sampler: g has the wrong length");
  Table out(states, actions);
  for (std::size_t x = 0; x < states; ++x) {
    for (std::size_t a = 0; a < actions; ++a) {
      double v = mean_reward(x, a);
      const auto& p = next[x * actions + a];
      for (std::size_t y = 0; y < states; ++y) v += p[y] * g[y];
      out(x, a) = v;
    }
  }
  return out;
}

double bellman_rhs_first(double b, double Nu, double Ng, std::size_t n, double delta, double eps) {
  return 108.0 * b * eps + b * b *
                               (36.0 * std::log(Nu) + 83.0 * std::log(Ng) +
                                108.0 * std::log(12.0 / delta)) /
                               static_cast<double>(n);
}

double bellman_rhs_second(double b, double Nu, double Ng, std::size_t n, double delta, double eps) {
  return 30.0 * b * eps + b * b *
                              (4.0 * std::log(Nu) + 28.0 * std::log(Ng) +
                               28.0 * std::log(6.0 / delta)) /
                              static_cast<double>(n);
}

BellmanViolationReport bernstein_check_bellman(const std::vector<Table>& U,
                                               const std::vector<std::vector<double>>& G,
                                               const TabularStepSampler& sampler, double b,
                                               std::size_t n, double delta, double eps,
                                               std::size_t trials, std::uint64_t seed) {
  check_common(n, delta, eps, trials);
  if (U.empty() || G.empty()) throw ConfigError("bernstein_check_bellman: empty class");
  const std::size_t S = sampler.states, K = sampler.actions;
  for (const auto& u : U) {
    if (u.rows() != S || u.cols() != K) throw ConfigError("bernstein_check_bellman: U shape mismatch");
  }
  for (const auto& g : G) {
    if (g.size() != S) throw ConfigError("bernstein_check_bellman: G shape mismatch");
  }
  const double Nu = distinct_count(U), Ng = distinct_count(G);
  const double rhs1 = bellman_rhs_first(b, Nu, Ng, n, delta, eps);
  const double rhs2 = bellman_rhs_second(b, Nu, Ng, n, delta, eps);

  std::vector<Table> targets;
  for (const auto& g : G) targets.push_back(sampler.target(g));
  // Population E[(u - g*)^2] per pair.
  std::vector<std::vector<double>> pop(U.size(), std::vector<double>(G.size()));
  for (std::size_t i = 0; i < U.size(); ++i) {
    for (std::size_t j = 0; j < G.size(); ++j) {
      double e = 0.0;
      for (std::size_t x = 0; x < S; ++x) {
        for (std::size_t a = 0; a < K; ++a) {
          const double d = U[i](x, a) - targets[j](x, a);
          e += sampler.xa_probs(x, a) * d * d;
        }
      }
      pop[i][j] = e;
    }
  }

  BellmanViolationReport rep;
  for (auto* r : {&rep.first, &rep.second}) {
    r->trials = trials;
    r->delta = delta;
    r->margins.reserve(trials);
  }
  struct Draw {
    std::size_t x, a, y;
    double r;
  };
  std::vector<Draw> draws(n);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {t}));
    for (auto& dr : draws) {
      const std::size_t c = rng.categorical(sampler.xa_probs.values());
      dr.x = c / K;
      dr.a = c % K;
      dr.r = rng.bernoulli(sampler.mean_reward(dr.x, dr.a)) ? 1.0 : 0.0;
      dr.y = rng.categorical(sampler.next[c]);
    }
    double sup1 = -std::numeric_limits<double>::infinity();
    double sup2 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < U.size(); ++i) {
      for (std::size_t j = 0; j < G.size(); ++j) {
        double msum = 0.0;
        for (const auto& dr : draws) {
          const double tgt = dr.r + G[j][dr.y];
          const double e1 = U[i](dr.x, dr.a) - tgt;
          const double e2 = targets[j](dr.x, dr.a) - tgt;
          msum += e1 * e1 - e2 * e2;
        }
        const double mbar = msum / static_cast<double>(n);
        sup1 = std::max(sup1, pop[i][j] - 2.0 * mbar - rhs1);
        sup2 = std::max(sup2, -mbar - rhs2);
      }
    }
    rep.first.margins.push_back(sup1);
    rep.second.margins.push_back(sup2);
    if (sup1 > 0.0) ++rep.first.violations;
    if (sup2 > 0.0) ++rep.second.violations;
  }
  return rep;
}

}  // namespace ofdm
