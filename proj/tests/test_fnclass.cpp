#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ofdm/envs.hpp"
#include "ofdm/error.hpp"
#include "ofdm/fnclass.hpp"
#include "ofdm/rng.hpp"

using namespace ofdm;

namespace {

FiniteFunctionClass constants(std::initializer_list<double> levels, std::size_t d = 1, std::size_t K = 2) {
  std::vector<Table> t;
  for (double c : levels) t.emplace_back(d, K, c);
  return FiniteFunctionClass(std::move(t));
}

}  // namespace

TEST_CASE("empirical squared loss by hand") {
  OfflineDataset one{{{0, 1, 1.0}}};
  CHECK(empirical_sq_loss(Table(1, 2, 0.0), one) == 1.0);
  OfflineDataset two{{{0, 0, 0.0}, {0, 0, 1.0}}};
  CHECK(empirical_sq_loss(Table(1, 2, 0.5), two) == 0.25);
  OfflineDataset exact{{{0, 0, 0.25}, {0, 1, 0.75}}};
  CHECK(empirical_sq_loss(Table(1, 2, {0.25, 0.75}), exact) == 0.0);
  CHECK_THROWS_AS(empirical_sq_loss(Table(1, 2, 0.0), OfflineDataset{}), ConfigError);
}

TEST_CASE("sufficient statistics agree with the direct loss") {
  const auto inst = random_tabular_cb(4, 3, 2);
  const auto cls = random_realizable_class(inst, 12, 5);
  const auto data = sample_dataset(inst, TabularPolicy::uniform(4, 3), 333, 1);
  const auto losses = empirical_losses(cls, data);
  for (std::size_t i = 0; i < cls.size(); ++i) {
    CHECK(std::abs(losses[i] - oracle::sq_loss(cls[i], data)) <= 1e-12);
  }
}

TEST_CASE("erm basics and ties") {
  OfflineDataset ones{{{0, 0, 1.0}, {0, 1, 1.0}}};
  CHECK(erm(constants({0.0, 1.0}), ones) == 1);
  CHECK(erm(constants({0.3}), ones) == 0);
  OfflineDataset half{{{0, 0, 0.0}, {0, 0, 1.0}}};
  CHECK(erm(constants({0.25, 0.75, 0.5, 0.5}), half) == 2);
}

TEST_CASE("erm recovers the sign vector of a d=2 sign class") {
  // Gap 0.5 is outside the hard-instance feasibility range, so the family is
  // built by hand.
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<Table> tables;
    for (std::size_t idx = 0; idx < 4; ++idx) {
      const auto alpha = index_signs(idx, 2);
      Table t(2, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        t(i, 0) = 0.5;
        t(i, 1) = 0.5 + alpha[i] * 0.25;
      }
      tables.push_back(t);
    }
    FiniteFunctionClass cls(tables, sign_index({1, 1}));
    CBInstance inst({0.5, 0.5}, tables[*cls.star_index()], RewardLaw::bernoulli);
    const auto data = sample_dataset(inst, TabularPolicy::constant_action(2, 2, 1), 200, seed);
    if (erm(cls, data) == sign_index({1, 1})) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("version space edges and monotonicity") {
  const auto inst = random_tabular_cb(3, 2, 9);
  const auto cls = random_realizable_class(inst, 10, 3);
  const auto data = sample_dataset(inst, TabularPolicy::uniform(3, 2), 150, 4);
  const auto losses = empirical_losses(cls, data);
  const auto vs0 = version_space(cls, data, 0.0);
  REQUIRE(vs0.member_indices.size() == 1);
  CHECK(vs0.member_indices[0] == erm(cls, data));
  const double spread = *std::max_element(losses.begin(), losses.end()) - losses[vs0.erm_index];
  CHECK(version_space(cls, data, spread).member_indices.size() == cls.size());
  std::vector<std::size_t> prev;
  for (double beta : {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 1.0}) {
    const auto vs = version_space(cls, data, beta);
    CHECK(std::includes(vs.member_indices.begin(), vs.member_indices.end(), prev.begin(), prev.end()));
    CHECK(std::find(vs.member_indices.begin(), vs.member_indices.end(), vs.erm_index) !=
          vs.member_indices.end());
    for (std::size_t i : vs.member_indices) CHECK(losses[i] - losses[vs.erm_index] <= beta + 1e-12);
    prev = vs.member_indices;
  }
}

TEST_CASE("sign class d=2 with exactly two members inside beta") {
  std::vector<Table> tables;
  for (std::size_t idx = 0; idx < 4; ++idx) {
    const auto alpha = index_signs(idx, 2);
    Table t(2, 2);
    for (std::size_t i = 0; i < 2; ++i) {
      t(i, 0) = 0.5;
      t(i, 1) = 0.5 + alpha[i] * 0.25;
    }
    tables.push_back(t);
  }
  FiniteFunctionClass cls(tables);
  // Rewards 0.75 at (x0, a2) and 0.5 at (x1, a2): alpha_0 = +1 costs 0,
  // alpha_0 = -1 costs 0.25 per x0 record; alpha_1 costs 1/16 either way.
  OfflineDataset data{{{0, 1, 0.75}, {1, 1, 0.5}}};
  const auto vs = version_space(cls, data, 0.05);
  CHECK(vs.member_indices.size() == 2);
  for (std::size_t i : vs.member_indices) CHECK(index_signs(i, 2)[0] == 1);
}

TEST_CASE("pessimistic selection") {
  OfflineDataset data{{{0, 0, 0.5}}};
  const auto pi = TabularPolicy::constant_action(1, 2, 1);
  // Only the first member fits at beta = 0.
  CHECK(pessimistic_select(constants({0.5, 0.0}), data, 0.0, pi) == 0);
  CHECK(pessimistic_select(constants({0.5, 0.0}), data, 0.0, TabularPolicy::uniform(1, 2)) == 0);
  // Equal losses: the lower value wins.
  CHECK(pessimistic_select(constants({0.9, 0.1}), data, 0.0, pi) == 1);
  const auto hc = hard_cb(1, 1.0, 1.0, 2, {1});
  const auto d2 = sample_dataset(hc.instance, hc.mu, 20, 1);
  const std::size_t pick = pessimistic_select(hc.cls, d2, 10.0, pi);
  CHECK(index_signs(pick, 1)[0] == -1);
}

TEST_CASE("pessimism never exceeds f* when f* is inside") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_tabular_cb(3, 3, seed);
    const auto cls = random_realizable_class(inst, 8, seed + 1);
    const auto data = sample_dataset(inst, TabularPolicy::uniform(3, 3), 100, seed + 2);
    const double beta = beta_schedule(8, 100, 0.0, 0.1);
    const auto vs = version_space(cls, data, beta);
    if (!std::binary_search(vs.member_indices.begin(), vs.member_indices.end(), *cls.star_index())) continue;
    DatasetStats st(data, 3, 3);
    const auto pi = TabularPolicy::constant_action(3, 3, seed % 3);
    const std::size_t f = pessimistic_select(cls, vs, pi, st.context_weights);
    CHECK(plug_in_value(cls[f], pi, st.context_weights) <=
          plug_in_value(cls[*cls.star_index()], pi, st.context_weights) + 1e-15);
  }
}

TEST_CASE("covering numbers: edge cases") {
  CHECK(covering_number_l1({{0.1, 0.2}}, 0.0) == 1);
  CHECK(covering_number_l1({{0.1, 0.2}}, 0.5) == 1);
  CHECK(covering_number_l1({{0.0, 1.0}, {1.0, 0.0}, {0.5, 0.5}}, 1.0) == 1);
  CHECK_THROWS_AS(covering_number_l1({}, 0.0), ConfigError);
  CHECK_THROWS_AS(covering_number_l1({{0.0}, {0.0, 1.0}}, 0.0), ConfigError);
  CHECK_THROWS_AS(covering_number_l1({{0.0}}, -1.0), ConfigError);
}

TEST_CASE("covering number of the d=2 sign class on both contexts") {
  std::vector<std::vector<double>> v;
  for (std::size_t idx = 0; idx < 4; ++idx) {
    const auto alpha = index_signs(idx, 2);
    v.push_back({0.5 + alpha[0] * 0.25, 0.5 + alpha[1] * 0.25});
  }
  CHECK(covering_number_l1(v, 0.0) == 4);
}

TEST_CASE("greedy cover against exhaustive minimum") {
  Rng rng(2024);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t N = 2 + rng.below(11);
    const std::size_t len = 1 + rng.below(4);
    std::vector<std::vector<double>> v(N, std::vector<double>(len));
    for (auto& row : v) {
      for (double& x : row) x = static_cast<double>(rng.below(5)) / 4.0;  // forces duplicates
    }
    CHECK(covering_number_l1(v, 0.0) == oracle::distinct(v));
    std::size_t prev = N + 1;
    for (double eps : {0.0, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0}) {
      const std::size_t g = covering_number_l1(v, eps);
      CHECK(g >= oracle::min_cover(v, eps));
      CHECK(g <= prev);
      prev = g;
    }
  }
}

TEST_CASE("product cover bound") {
  const std::uint64_t seven[] = {7};
  CHECK(product_cover_bound(seven).value == 7);
  const std::uint64_t two[] = {2, 2};
  CHECK(product_cover_bound(two).value == 4);
  const std::uint64_t big[] = {kCoverCap / 2, 4};
  const auto p = product_cover_bound(big);
  CHECK(p.saturated);
  CHECK(p.value == kCoverCap);
  const std::uint64_t zero[] = {0};
  CHECK_THROWS_AS(product_cover_bound(zero), ConfigError);

  const auto hc = hard_cb(6, 1.0, 1.0, 64, std::vector<int>(6, 1));
  OfflineDataset every;
  for (std::size_t x = 0; x < 6; ++x) every.records.push_back({x, 0, 0.5});
  const std::uint64_t counts[] = {covering_number_l1(restrict_to_sample(hc.cls, every, 0), 0.0),
                                  covering_number_l1(restrict_to_sample(hc.cls, every, 1), 0.0)};
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 64);
  CHECK(product_cover_bound(counts).value == 64);
}

TEST_CASE("beta schedule closed form") {
  CHECK(beta_schedule(1, 500, 0.0, 0.2) == doctest::Approx(24.0 * std::log(60.0) / 500.0).epsilon(1e-14));
  CHECK(beta_schedule(16, 1000, 0.0, 0.1) == doctest::Approx(0.125989).epsilon(1e-5));
  CHECK(beta_schedule(16, 1000, 0.0, 0.1) == doctest::Approx(oracle::beta_cb(16, 1000, 0, 0.1)).epsilon(1e-14));
  CHECK(beta_schedule(16, 2000, 0.0, 0.1) == doctest::Approx(beta_schedule(16, 1000, 0.0, 0.1) / 2).epsilon(1e-14));
  CHECK(beta_schedule(16, 1000, 0.01, 0.1) == doctest::Approx(0.32 + beta_schedule(16, 1000, 0.0, 0.1)).epsilon(1e-14));
  CHECK(beta_schedule(32, 1000, 0.0, 0.1) > beta_schedule(16, 1000, 0.0, 0.1));
  CHECK(beta_schedule(16, 1000, 0.0, 0.05) > beta_schedule(16, 1000, 0.0, 0.1));
  CHECK_THROWS_AS(beta_schedule(16, 1000, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(beta_schedule(16, 1000, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(beta_schedule(0.5, 1000, 0.0, 0.1), ConfigError);
}

TEST_CASE("f* stays in the version space at the scheduled beta") {
  std::size_t inside = 0, runs = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto sigma = random_signs(6, seed);
    const auto hc = hard_cb(6, 1.0, 1.0, 256, sigma);
    const auto data = sample_dataset(hc.instance, hc.mu, 256, derive_seed(seed, {1}));
    const auto vs = version_space(hc.cls, data, beta_schedule(64, 256, 0.0, 0.1));
    ++runs;
    if (std::binary_search(vs.member_indices.begin(), vs.member_indices.end(), *hc.cls.star_index())) ++inside;
  }
  CHECK(static_cast<double>(inside) / static_cast<double>(runs) >= 1.0 - 0.1 - 0.05);
}
