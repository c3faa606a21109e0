#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ofdm/algos.hpp"
#include "ofdm/envs.hpp"
#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"

using namespace ofdm;

namespace {

void check_simplex(const TabularPolicy& p) {
  for (std::size_t x = 0; x < p.contexts(); ++x) {
    double s = 0.0;
    for (std::size_t a = 0; a < p.actions(); ++a) {
      CHECK(p(x, a) >= 0.0);
      s += p(x, a);
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  CHECK(eta_schedule(2, 100) == doctest::Approx(0.0491174).epsilon(1e-6));
  CHECK(eta_schedule(5, 300) == doctest::Approx(oracle::eta_cb(5, 300)).epsilon(1e-14));
  CHECK(eta_schedule(3, 400) == doctest::Approx(eta_schedule(3, 100) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(eta_schedule(1024, 1), ParameterError);
  CHECK_NOTHROW(eta_schedule(1024, 10));
}

TEST_CASE("offline Hedge matches the probability-space reference") {
  Rng rng(2);
  for (std::uint64_t rep = 0; rep < 15; ++rep) {
    const auto inst = random_tabular_cb(3, 3, rep);
    const auto cls = random_realizable_class(inst, 8, rep);
    const auto data = sample_dataset(inst, TabularPolicy::uniform(3, 3), 200, rep + 40);
    for (double beta : {0.0, 0.02, 0.1, 5.0}) {
      const auto res = ofdm_hedge(data, cls, beta, 0.3, 25, 3);
      const auto ref = oracle::hedge(data, cls.tables(), beta, 0.3, 25);
      REQUIRE(res.trace.policies.size() == 25);
      CHECK(res.trace.selected == ref.selected);
      for (std::size_t t = 0; t < 25; ++t) {
        CHECK(oracle::contains_table({ref.policies[t]}, res.trace.policies[t].probs(), 1e-10));
        check_simplex(res.trace.policies[t]);
      }
      CHECK(res.policy.size() == 25);
    }
  }
}

TEST_CASE("first Hedge iterate is uniform") {
  const auto hc = hard_cb(4, 1.0, 1.0, 256, {1, -1, 1, -1});
  const auto data = sample_dataset(hc.instance, hc.mu, 256, 3);
  const auto res = ofdm_hedge(data, hc.cls, 0.1, 0.5, 1, 2);
  REQUIRE(res.policy.size() == 1);
  CHECK(res.policy.iterates()[0] == TabularPolicy::uniform(4, 2));
}

TEST_CASE("singleton class: regret bound at the scheduled rate") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_tabular_cb(4, 3, seed);
    const FiniteFunctionClass cls({inst.mean_rewards()}, 0);
    const auto data = sample_dataset(inst, TabularPolicy::uniform(4, 3), 100, seed);
    for (std::size_t T : {16, 256, 2048}) {
      const auto res = ofdm_hedge(data, cls, 0.0, eta_schedule(3, T), T, 3);
      const double sub = suboptimality(inst, optimal_policy(inst), res.policy);
      CHECK(sub >= -1e-12);
      CHECK(sub <= 4.0 * std::sqrt(std::log(3.0) / static_cast<double>(T)));
    }
  }
}

TEST_CASE("pessimism picks the lower table every round") {
  CBInstance inst({1.0}, Table(1, 2, {0.6, 0.4}), RewardLaw::bernoulli);
  const FiniteFunctionClass cls({Table(1, 2, {0.6, 0.4}), Table(1, 2, {0.5, 0.3})}, 0);
  const auto data = sample_dataset(inst, TabularPolicy::uniform(1, 2), 50, 1);
  const auto res = ofdm_hedge(data, cls, 10.0, 0.2, 30, 2);
  CHECK(res.trace.version_space.size() == 2);
  for (std::size_t s : res.trace.selected) CHECK(s == 1);
}

TEST_CASE("regret audit") {
  const auto hc = hard_cb(8, 1.0, 1.0, 1024, random_signs(8, 3));
  const auto data = sample_dataset(hc.instance, hc.mu, 1024, 5);
  const auto res = ofdm_hedge(data, hc.cls, 0.05, eta_schedule(2, 100), 100, 2);
  const auto audit = hedge_regret_audit(res.trace, hc.cls, optimal_policy(hc.instance), data);
  CHECK(audit.rhs == doctest::Approx(33.30218).epsilon(1e-6));

  const auto one = ofdm_hedge(data, hc.cls, 0.05, 0.3, 1, 2);
  CHECK(hedge_regret_audit(one.trace, hc.cls, TabularPolicy::uniform(8, 2), data).lhs == 0.0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto h = hard_cb(8, 1.0, 1.0, 512, random_signs(8, seed));
    const auto dd = sample_dataset(h.instance, h.mu, 512, seed + 100);
    const double beta = beta_schedule(256, 512, 0.0, 0.1);
    const auto r = ofdm_hedge(dd, h.cls, beta, eta_schedule(2, 400), 400, 2);
    CHECK(hedge_regret_audit(r.trace, h.cls, optimal_policy(h.instance), dd).passes());
  }
}

TEST_CASE("importance-weighted estimates are unbiased") {
  CHECK(iw_reward_estimates(3, 1, 0.0, 0.5) == std::vector<double>{1.0, -1.0, 1.0});
  CHECK_THROWS_AS(iw_reward_estimates(3, 3, 0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(iw_reward_estimates(3, 0, 0.0, 0.0), ConfigError);
  const std::vector<double> p{0.2, 0.5, 0.3}, mean{0.9, 0.1, 0.6};
  Rng rng(13);
  const std::size_t N = 10000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t a = rng.categorical(p);
    const double r = rng.bernoulli(mean[a]) ? 1.0 : 0.0;
    const auto est = iw_reward_estimates(3, a, r, p[a]);
    for (std::size_t b = 0; b < 3; ++b) {
      sum[b] += est[b];
      sq[b] += est[b] * est[b];
    }
  }
  for (std::size_t b = 0; b < 3; ++b) {
    const double m = sum[b] / N;
    const double sd = std::sqrt((sq[b] / N - m * m) / N);
    CHECK(std::abs(m - mean[b]) <= 3.0 * sd);
  }
}

TEST_CASE("EXP4") {
  CBInstance inst({0.5, 0.5}, Table(2, 2, {0.8, 0.5, 0.8, 0.5}), RewardLaw::deterministic);
  const auto good = TabularPolicy::constant_action(2, 2, 0);
  const auto bad = TabularPolicy::constant_action(2, 2, 1);

  const auto solo = exp4(inst, {bad}, 50, 1);
  CHECK(solo.policy.size() == 50);
  for (const auto& p : solo.policy.iterates()) CHECK(p == bad);

  const auto twin = exp4(inst, {good, good}, 100, 2);
  CHECK(policy_value(inst, twin.policy) == doctest::Approx(0.8).epsilon(1e-12));

  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto res = exp4(inst, {bad, good}, 2000, seed);
    const double sub = suboptimality(inst, good, res.policy);
    within += sub <= 0.05;
    for (const auto& rd : res.log.rounds) {
      CHECK(std::abs(std::accumulate(rd.expert_weights.begin(), rd.expert_weights.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
  CHECK(within >= 90);
  CHECK_THROWS_AS(exp4(inst, {}, 10, 1), ConfigError);
  CHECK_THROWS_AS(exp4(inst, {good}, 0, 1), ConfigError);
}

TEST_CASE("model-selection envelope") {
  CHECK(model_selection_envelope(1000, 0.1) == doctest::Approx(0.1970).epsilon(1e-3));
  CHECK(model_selection_envelope(1000, 0.1) == doctest::Approx(oracle::envelope(1000, 0.1)).epsilon(1e-14));
  CHECK(model_selection_envelope(4000, 0.1) < model_selection_envelope(1000, 0.1));
  CHECK_THROWS_AS(model_selection_envelope(2, 0.1), ParameterError);
}

TEST_CASE("inverse-gap weighting") {
  const std::vector<double> f{0.5, 0.2, 0.4};
  const auto p = inverse_gap_probs(f, 10.0);
  CHECK(p[1] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(1.0 - 1.0 / 6 - 0.25).epsilon(1e-14));
  const auto flat = inverse_gap_probs(f, 0.0);
  for (double v : flat) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("FALCON") {
  const auto inst = random_tabular_cb(4, 2, 9);
  const auto cls = random_realizable_class(inst, 16, 9);
  const auto two = falcon_online(inst, cls, 2, 0.1, 1);
  for (const auto& p : two.policy.iterates()) CHECK(p == TabularPolicy::uniform(4, 2));

  const auto run = falcon_online(inst, cls, 300, 0.1, 2);
  CHECK(run.log.rounds.size() == 300);
  CHECK(run.policy.size() == 300);
  for (const auto& rd : run.log.rounds) {
    CHECK(std::abs(rd.action_probs[0] + rd.action_probs[1] - 1.0) <= 1e-12);
    CHECK(rd.action_probs[rd.action] > 0.0);
  }

  // More rounds, smaller suboptimality; the rate is square-root up to logs.
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    small += suboptimality(inst, optimal_policy(inst), falcon_online(inst, cls, 1024, 0.1, seed).policy);
    large += suboptimality(inst, optimal_policy(inst), falcon_online(inst, cls, 4096, 0.1, seed).policy);
  }
  CHECK(large > 0.0);
  CHECK(large <= 0.75 * small);
  CHECK_THROWS_AS(falcon_online(inst, cls, 0, 0.1, 1), ConfigError);
}

TEST_CASE("hybrid learner plumbing") {
  const auto hc = hard_cb_hybrid(4, 1.0, 1.0, 256, 64, {1, 1, -1, 1});
  const auto data = sample_dataset(hc.instance, hc.mu, 256, 4);
  const auto res = hybrid_learn(data, hc.instance, hc.cls, 65, 0.1, 0.1, 20, 0.1, 7);
  CHECK(res.offline.size() == 20);
  CHECK(res.online.size() == 32);
  CHECK(res.policy.size() == 33);
  check_simplex(res.policy.average());
  const auto again = hybrid_learn(data, hc.instance, hc.cls, 65, 0.1, 0.1, 20, 0.1, 7);
  CHECK(again.policy.iterates() == res.policy.iterates());
  CHECK_THROWS_AS(hybrid_learn(data, hc.instance, hc.cls, 1, 0.1, 0.1, 20, 0.1, 7), ConfigError);
}
