#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ofdm/envs.hpp"
#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"
#include "ofdm/transfer.hpp"

using namespace ofdm;

TEST_CASE("hard CB gaps and behavior mass") {
  auto hc = hard_cb(8, 1.0, 1.0, 256, random_signs(8, 1));
  CHECK(hc.spec.epsilon == doctest::Approx(1.0 / 32).epsilon(1e-14));
  CHECK(hc.spec.mu_a2 == doctest::Approx(1.0).epsilon(1e-14));
  hc = hard_cb(8, 2.0, 1.0, 1 << 14, random_signs(8, 1));
  CHECK(hc.spec.epsilon == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(hc.spec.mu_a2 == doctest::Approx(0.00390625).epsilon(1e-14));
  CHECK(hc.mu(3, 1) == doctest::Approx(0.00390625).epsilon(1e-14));
  CHECK(hc.cls.size() == 256);
  CHECK(hc.instance.num_actions() == 2);
}

TEST_CASE("hard CB realizability for every sign vector") {
  for (std::size_t idx = 0; idx < 64; ++idx) {
    const auto sigma = index_signs(idx, 6);
    CHECK(sign_index(sigma) == idx);
    const auto hc = hard_cb(6, 1.5, 2.0, 500, sigma);
    REQUIRE(hc.cls.star_index());
    CHECK(hc.cls[*hc.cls.star_index()] == hc.instance.mean_rewards());
  }
}

TEST_CASE("hard CB parameter checks name the failed inequality") {
  const std::vector<int> s4(4, 1);
  CHECK_THROWS_AS(hard_cb(4, 1.0, 0.5, 100, s4), ParameterError);  // mu_a2 = 2 > 1
  CHECK_THROWS_WITH_AS(hard_cb(4, 1.0, 0.5, 100, s4), doctest::Contains("<= 1"), ParameterError);
  const std::vector<int> s16(16, 1);
  CHECK_THROWS_AS(hard_cb(16, 1.0, 1.0, 1, s16), ParameterError);  // epsilon = 1/sqrt(2)
  CHECK_THROWS_WITH_AS(hard_cb(16, 1.0, 1.0, 1, s16), doctest::Contains("1/2"), ParameterError);
  CHECK_THROWS_AS(hard_cb(4, 0.5, 1.0, 100, s4), ParameterError);
  CHECK_THROWS_AS(hard_cb(4, 1.0, 0.0, 100, s4), ParameterError);
  CHECK_THROWS_AS(hard_cb(0, 1.0, 1.0, 100, {}), ParameterError);
  CHECK_THROWS_AS(hard_cb(21, 1.0, 1.0, 100, std::vector<int>(21, 1)), ParameterError);
  CHECK_THROWS_AS(hard_cb(4, 1.0, 1.0, 100, {1, 1}), ConfigError);
  CHECK_THROWS_AS(hard_cb(2, 1.0, 1.0, 100, {1, 0}), ConfigError);
}

TEST_CASE("hard CB identity and transfer bound, exhaustive for small d") {
  for (std::size_t d : {1, 2, 3, 5}) {
    for (double rho : {1.0, 2.0}) {
      const double C = 1.5;
      const std::size_t n = 4096;
      const auto sigma = random_signs(d, d * 7 + static_cast<std::size_t>(rho));
      const auto hc = hard_cb(d, rho, C, n, sigma);
      const double eps = hc.spec.epsilon;
      const Table& fs = hc.instance.mean_rewards();
      for (std::size_t idx = 0; idx < hc.cls.size(); ++idx) {
        const auto alpha = index_signs(idx, d);
        std::size_t dist = 0;
        for (std::size_t i = 0; i < d; ++i) dist += alpha[i] != sigma[i];
        double e = 0.0;
        for (std::size_t x = 0; x < d; ++x) {
          for (std::size_t a = 0; a < 2; ++a) {
            const double g = fs(x, a) - hc.cls[idx](x, a);
            e += hc.instance.context_probs()[x] * hc.mu(x, a) * g * g;
          }
        }
        CHECK(std::abs(e - std::pow(eps, 2 * rho) * static_cast<double>(dist) / (C * static_cast<double>(d))) <= 1e-12);
      }
      CHECK(transfer_factor(hc.cls, hc.instance, hc.mu, optimal_policy(hc.instance), rho).factor <= C + 1e-12);
    }
  }
}

TEST_CASE("hybrid gap takes the smaller limb") {
  const double off = std::sqrt(8.0 / 64e6);
  const double on = std::sqrt(8.0 / 100.0) / 8.0;
  CHECK(hard_cb_hybrid_epsilon(8, 1.0, 1.0, 1000000, 100) == doctest::Approx(std::min(off, on)).epsilon(1e-14));
  CHECK(hard_cb_hybrid_epsilon(8, 1.0, 1.0, 1000000, 100) == doctest::Approx(3.5355339e-4).epsilon(1e-7));
  CHECK(hard_cb_hybrid_epsilon(8, 1.0, 1.0, 100, 1000000) == doctest::Approx(3.5355339e-4).epsilon(1e-7));
  // Online limb inactive: the offline formula with 64 in place of 32.
  CHECK(hard_cb_hybrid_epsilon(8, 1.0, 1.0, 100, std::nullopt) == doctest::Approx(std::sqrt(8.0 / 6400)).epsilon(1e-14));
  CHECK(hard_cb_hybrid_epsilon(8, 2.0, 1.0, 1 << 14, std::nullopt) ==
        doctest::Approx(std::pow(8.0 / (64.0 * 16384), 0.25)).epsilon(1e-14));
  CHECK_THROWS_AS(hard_cb_hybrid(8, 1.0, 1.0, 100, 0, std::vector<int>(8, 1)), ParameterError);
  const auto hc = hard_cb_hybrid(8, 1.0, 1.0, 100, 1000000, std::vector<int>(8, -1));
  CHECK(hc.spec.m == 1000000);
  CHECK(hc.spec.epsilon == doctest::Approx(3.5355339e-4).epsilon(1e-7));
}

TEST_CASE("random tabular instances") {
  const auto a = random_tabular_cb(3, 2, 7);
  CHECK(a.mean_rewards() == random_tabular_cb(3, 2, 7).mean_rewards());
  CHECK_FALSE(a.mean_rewards() == random_tabular_cb(3, 2, 8).mean_rewards());
  for (double v : a.mean_rewards().values()) CHECK((v >= 0.0 && v <= 1.0));
  for (double p : a.context_probs()) CHECK(p == doctest::Approx(1.0 / 3));
  const auto cls = random_realizable_class(a, 5, 1);
  CHECK(cls[*cls.star_index()] == a.mean_rewards());
}

TEST_CASE("hard MDP values") {
  const std::size_t d = 3, H = 4;
  const auto hm = hard_mdp(d, H, 1.0, 1.0, 512, std::vector<int>(d, 1));
  const double eps = hm.spec.epsilon;
  CHECK(eps == doctest::Approx(std::sqrt(3.0 / (32.0 * 512))).epsilon(1e-14));
  const auto a2 = MDPPolicy::constant_action(3 * d, 2, H, 1);
  const auto a1 = MDPPolicy::constant_action(3 * d, 2, H, 0);
  CHECK(mdp_policy_value(hm.mdp, a2) == doctest::Approx(H * (0.5 + eps / 2)).epsilon(1e-14));
  CHECK(mdp_policy_value(hm.mdp, a1) == doctest::Approx(H * 0.5).epsilon(1e-14));
  CHECK(mdp_policy_value(hm.mdp, MDPRandomizedPolicy{{a1, a2}}) ==
        doctest::Approx(H * (0.5 + eps / 4)).epsilon(1e-14));
  CHECK(mdp_policy_value(hm.mdp, a2) == doctest::Approx(oracle::mdp_value_forward(hm.mdp, a2)).epsilon(1e-14));
}

TEST_CASE("hard MDP parameter checks") {
  CHECK_THROWS_AS(hard_mdp(4, 1, 1.0, 1.0, 4096, std::vector<int>(4, 1)), ParameterError);
  // n below C d H^{2 rho} / 32 = 10.125.
  CHECK_THROWS_AS(hard_mdp(4, 3, 2.0, 1.0, 10, std::vector<int>(4, 1)), ParameterError);
  CHECK_THROWS_AS(hard_mdp(4, 3, 1.0, 0.5, 4096, std::vector<int>(4, 1)), ParameterError);
  CHECK_THROWS_AS(hard_mdp(4, 3, 1.0, 1.0, 4096, std::vector<int>(3, 1)), ConfigError);
  const auto hm = hard_mdp(2, 3, 2.0, 2.0, 4096, {1, -1});
  const double eps = hm.spec.epsilon;
  CHECK(eps == doctest::Approx(std::pow(2.0 * 2.0 / (32.0 * 4096 * 9.0), 0.25)).epsilon(1e-14));
  CHECK(hm.spec.mu_a2 == doctest::Approx(eps * 3 * eps * 3 / 2.0).epsilon(1e-14));
}

TEST_CASE("hard MDP Q-values at the red edge and beyond the first step") {
  for (std::size_t d : {1, 2, 4}) {
    for (std::size_t H : {2, 3, 4}) {
      Rng rng(d * 10 + H);
      const auto sigma = random_signs(d, d + H);
      const auto hm = hard_mdp(d, H, 1.0, 1.0, 1024, sigma);
      const double eps = hm.spec.epsilon;
      std::vector<MDPPolicy> pols{MDPPolicy::uniform(3 * d, 2, H), MDPPolicy::constant_action(3 * d, 2, H, 0),
                                  MDPPolicy::constant_action(3 * d, 2, H, 1)};
      for (int k = 0; k < 5; ++k) {
        MDPPolicy p;
        for (std::size_t h = 0; h < H; ++h) {
          Table t(3 * d, 2);
          for (std::size_t s = 0; s < 3 * d; ++s) {
            t(s, 0) = rng.uniform();
            t(s, 1) = 1.0 - t(s, 0);
          }
          p.steps.emplace_back(std::move(t));
        }
        pols.push_back(std::move(p));
      }
      const auto q0 = q_values(hm.mdp, pols.front());
      for (const auto& p : pols) {
        const auto q = q_values(hm.mdp, p);
        for (std::size_t i = 0; i < d; ++i) {
          CHECK(q[0](3 * i, 1) == doctest::Approx(H * (0.5 + sigma[i] * eps / 2)).epsilon(1e-13));
        }
        // Later steps sit on action-constant rows, so the policy only shifts rounding.
        for (std::size_t h = 1; h < H; ++h) CHECK(oracle::contains_table({q0[h]}, q[h], 1e-12));
      }
    }
  }
}

TEST_CASE("red-path rewards match the gap") {
  const auto hm = hard_mdp(1, 2, 1.0, 1.0, 64, {-1});
  const auto a2 = MDPPolicy::constant_action(3, 2, 2, 1);
  const auto data = mdp_sample(hm.mdp, a2, 10000, 4);
  double sum = 0.0;
  for (const auto& traj : data.trajectories) {
    CHECK(traj[0].state == 0);
    CHECK(traj[0].next_state == 2);
    CHECK(traj[1].state == 2);
    sum += traj[0].reward;
  }
  const double p = 0.5 - hm.spec.epsilon / 2;
  CHECK(std::abs(sum / 1e4 - p) <= 3.0 * std::sqrt(p * (1 - p) / 1e4));
}

TEST_CASE("threshold and halfspace builders") {
  const auto tc = threshold_case(1000, 3.0);
  CHECK(tc.instance.num_actions() == 1000);
  CHECK(tc.cls[*tc.cls.star_index()] == tc.instance.mean_rewards());
  const auto hs = halfspace_sphere_case();
  CHECK(hs.instance.num_actions() == 720);
  CHECK(hs.cls[*hs.cls.star_index()] == hs.instance.mean_rewards());
}
