#include "ofdm/algos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

double eta_schedule(std::size_t K, std::size_t T) {
  if (K < 1 || T < 1) throw ParameterError("eta_schedule: K and T must be at least 1");
  const double lnK = std::log(static_cast<double>(K));
  if (static_cast<double>(T) < lnK / (std::numbers::e - 2.0)) {
    throw ParameterError("eta_schedule: T must be at least ln K / (e - 2)");
  }
  return std::sqrt(lnK / (4.0 * (std::numbers::e - 2.0) * static_cast<double>(T)));
}

namespace {

TabularPolicy softmax_rows(const Table& logw) {
  Table p(logw.rows(), logw.cols());
  for (std::size_t x = 0; x < logw.rows(); ++x) {
    auto in = logw.row(x);
    const double top = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t a = 0; a < logw.cols(); ++a) {
      p(x, a) = std::exp(in[a] - top);
      z += p(x, a);
    }
    for (std::size_t a = 0; a < logw.cols(); ++a) p(x, a) /= z;
  }
  return TabularPolicy(std::move(p));
}

double draw_reward(const CBInstance& inst, std::size_t x, std::size_t a, Rng& rng) {
  const double mean = inst.mean_rewards()(x, a);
  return inst.law() == RewardLaw::bernoulli ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean;
}

}  // namespace

HedgeResult ofdm_hedge(const OfflineDataset& data, const FiniteFunctionClass& cls, double beta,
                       double eta, std::size_t T, std::size_t K) {
  if (T == 0) throw ConfigError("ofdm_hedge: T must be at least 1");
  if (!(beta >= 0.0) || !(eta >= 0.0)) throw ConfigError("ofdm_hedge: beta and eta must be nonnegative");
  if (K != cls.actions()) throw ConfigError("ofdm_hedge: K does not match the class");
  DatasetStats stats(data, cls.contexts(), cls.actions());
  std::vector<double> losses(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) losses[i] = stats.sq_loss(cls[i]);
  const auto vs = version_space_from_losses(losses, beta);

  HedgeTrace trace;
  trace.beta = beta;
  trace.eta = eta;
  trace.T = T;
  trace.erm_index = vs.erm_index;
  trace.version_space = vs.member_indices;
  trace.selected.reserve(T);
  trace.objective.reserve(T);
  trace.policies.reserve(T);

  Table logw(cls.contexts(), K, 0.0);
  TabularPolicy pi = TabularPolicy::uniform(cls.contexts(), K);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t f = pessimistic_select(cls, vs, pi, stats.context_weights);
    trace.selected.push_back(f);
    trace.objective.push_back(plug_in_value(cls[f], pi, stats.context_weights));
    trace.policies.push_back(pi);
    const Table& ft = cls[f];
    auto lw = logw.values();
    auto fv = ft.values();
    for (std::size_t i = 0; i < lw.size(); ++i) lw[i] += eta * fv[i];
    pi = softmax_rows(logw);
  }
  RandomizedPolicy out(trace.policies);
  return HedgeResult{std::move(out), std::move(trace)};
}

HedgeAudit hedge_regret_audit(const HedgeTrace& trace, const FiniteFunctionClass& cls,
                              const TabularPolicy& comparator, const OfflineDataset& data) {
  if (trace.policies.empty()) throw ConfigError("hedge_regret_audit: empty trace");
  DatasetStats stats(data, cls.contexts(), cls.actions());
  HedgeAudit out;
  const double T = static_cast<double>(trace.policies.size());
  out.rhs = 4.0 * std::sqrt(T * std::log(static_cast<double>(cls.actions())));
  for (std::size_t t = 0; t < trace.policies.size(); ++t) {
    const Table& f = cls[trace.selected[t]];
    out.lhs += plug_in_value(f, comparator, stats.context_weights) -
               plug_in_value(f, trace.policies[t], stats.context_weights);
  }
  return out;
}

std::vector<double> iw_reward_estimates(std::size_t K, std::size_t played, double reward,
                                        double prob_played) {
  if (played >= K || !(prob_played > 0.0)) throw ConfigError("iw_reward_estimates: bad arguments");
  std::vector<double> est(K, 1.0);
  est[played] = 1.0 - (1.0 - reward) / prob_played;
  return est;
}

OnlineResult exp4(const CBInstance& inst, const std::vector<TabularPolicy>& experts, std::size_t m,
                  std::uint64_t seed) {
  if (experts.empty()) throw ConfigError("exp4: need at least one expert");
  if (m == 0) throw ConfigError("exp4: m must be at least 1");
  for (const auto& e : experts) check_shape(inst, e);
  const std::size_t M = experts.size(), K = inst.num_actions(), d = inst.num_contexts();
  const double eta = std::sqrt(2.0 * std::log(static_cast<double>(M)) /
                               (static_cast<double>(m) * static_cast<double>(K)));
  Rng rng(seed);
  std::vector<double> logw(M, 0.0), q(M);
  std::vector<TabularPolicy> composites;
  composites.reserve(m);
  OnlineRunLog log;
  log.m = m;
  log.rounds.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    const double top = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      q[j] = std::exp(logw[j] - top);
      z += q[j];
    }
    for (double& v : q) v /= z;

    Table comp(d, K, 0.0);
    for (std::size_t x = 0; x < d; ++x) {
      double s = 0.0;
      for (std::size_t a = 0; a < K; ++a) {
        double v = 0.0;
        for (std::size_t j = 0; j < M; ++j) v += q[j] * experts[j](x, a);
        comp(x, a) = v;
        s += v;
      }
      for (std::size_t a = 0; a < K; ++a) comp(x, a) /= s;
    }
    composites.emplace_back(std::move(comp));
    const TabularPolicy& now = composites.back();

    const std::size_t x = rng.categorical(inst.context_probs());
    const auto probs = now.probs().row(x);
    const std::size_t a = rng.categorical(probs);
    const double r = draw_reward(inst, x, a, rng);
    const auto est = iw_reward_estimates(K, a, r, probs[a]);
    for (std::size_t j = 0; j < M; ++j) {
      double y = 0.0;
      for (std::size_t b = 0; b < K; ++b) y += experts[j](x, b) * est[b];
      logw[j] += eta * y;
    }
    log.rounds.push_back({x, a, r, std::vector<double>(probs.begin(), probs.end()), q});
  }
  return OnlineResult{RandomizedPolicy(std::move(composites)), std::move(log)};
}

std::vector<double> inverse_gap_probs(std::span<const double> fitted, double gamma) {
  const std::size_t K = fitted.size();
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(fitted.begin(), fitted.end()) - fitted.begin());
  std::vector<double> p(K, 0.0);
  double rest = 0.0;
  for (std::size_t a = 0; a < K; ++a) {
    if (a == best) continue;
    p[a] = 1.0 / (static_cast<double>(K) + gamma * (fitted[best] - fitted[a]));
    rest += p[a];
  }
  p[best] = 1.0 - rest;
  return p;
}

OnlineResult falcon_online(const CBInstance& inst, const FiniteFunctionClass& cls, std::size_t m,
                           double delta, std::uint64_t seed) {
  if (m == 0) throw ConfigError("falcon_online: m must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("falcon_online: delta must lie in (0,1)");
  if (cls.contexts() != inst.num_contexts() || cls.actions() != inst.num_actions()) {
    throw ConfigError("falcon_online: class shape does not match instance");
  }
  const std::size_t K = inst.num_actions(), d = inst.num_contexts();
  Rng rng(seed);
  OfflineDataset seen;
  seen.records.reserve(m);
  std::vector<TabularPolicy> per_round;
  per_round.reserve(m);
  OnlineRunLog log;
  log.m = m;
  log.rounds.reserve(m);

  std::size_t t = 0;
  for (std::size_t ell = 1; t < m; ++ell) {
    const std::size_t tau = std::size_t{1} << ell;
    TabularPolicy epoch_policy = TabularPolicy::uniform(d, K);
    if (!seen.records.empty()) {
      const double n_prev = static_cast<double>(seen.n());
      const double gamma = std::sqrt(static_cast<double>(K) * n_prev /
                                     std::log(static_cast<double>(cls.size()) * n_prev / delta));
      const Table& fhat = cls[erm(cls, seen)];
      Table p(d, K);
      for (std::size_t x = 0; x < d; ++x) {
        const auto row = inverse_gap_probs(fhat.row(x), gamma);
        for (std::size_t a = 0; a < K; ++a) p(x, a) = row[a];
      }
      epoch_policy = TabularPolicy(std::move(p));
    }
    const std::size_t end = std::min(m, tau);
    for (; t < end; ++t) {
      const std::size_t x = rng.categorical(inst.context_probs());
      const auto probs = epoch_policy.probs().row(x);
      const std::size_t a = rng.categorical(probs);
      const double r = draw_reward(inst, x, a, rng);
      log.rounds.push_back({x, a, r, std::vector<double>(probs.begin(), probs.end()), {}});
      per_round.push_back(epoch_policy);
    }
    // Data from this epoch becomes available to the next epoch's oracle.
    for (std::size_t i = seen.n(); i < log.rounds.size(); ++i) {
      const auto& rd = log.rounds[i];
      seen.records.push_back({rd.context, rd.action, rd.reward});
    }
  }
  return OnlineResult{RandomizedPolicy(std::move(per_round)), std::move(log)};
}

HybridResult hybrid_learn(const OfflineDataset& data, const CBInstance& inst,
                          const FiniteFunctionClass& cls, std::size_t m, double beta, double eta,
                          std::size_t T, double delta, std::uint64_t seed) {
  if (m < 2) throw ConfigError("hybrid_learn: m must be at least 2");
  const std::size_t half = m / 2;
  auto off = ofdm_hedge(data, cls, beta, eta, T, inst.num_actions()).policy;
  auto on = falcon_online(inst, cls, half, delta, splitmix64(seed ^ 0x1)).policy;
  std::vector<TabularPolicy> experts{off.average(), on.average()};
  auto agg = exp4(inst, experts, m - half, splitmix64(seed ^ 0x2)).policy;
  return HybridResult{std::move(agg), std::move(off), std::move(on)};
}

double model_selection_envelope(std::size_t m, double delta) {
  if (m < 3) throw ParameterError("model_selection_envelope: m must be at least 3");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("model_selection_envelope: delta must lie in (0,1)");
  const double md = static_cast<double>(m);
  return 4.0 * std::sqrt(2.0 * std::log(2.0)) / std::sqrt(md) +
         32.0 * std::log(std::log(md / 2.0) / delta) / (3.0 * md) + 4.0 / md;
}

}  // namespace ofdm
