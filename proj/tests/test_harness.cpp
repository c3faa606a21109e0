#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ofdm/error.hpp"
#include "ofdm/harness.hpp"

using namespace ofdm;
using nlohmann::json;

namespace {

json small_cb() {
  return json{{"experiment_id", "t"}, {"family", "hard_cb"}, {"d", 4},       {"n_grid", {64, 256}},
              {"T", 64},             {"seeds", 2},          {"sigma_count", 3}, {"master_seed", 5}};
}

std::string to_csv(const std::vector<SweepRecord>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

SweepRecord row(std::size_t n, std::size_t m, double subopt) {
  SweepRecord r;
  r.experiment_id = "x";
  r.family = "hard_cb";
  r.n = n;
  r.m = m;
  r.subopt = subopt;
  return r;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_sweep_config(small_cb()));
  auto j = small_cb();
  j["bogus"] = 1;
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["n_grid"] = {256, 64};
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j["n_grid"] = json::array();
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["d"] = "four";
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["family"] = "hard_mdp";
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["algorithm"] = "hybrid";
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["experiment_id"] = "a,b";
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j["check"] = {{"slope_min", -0.6}, {"unknown", 1}};
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  j = small_cb();
  j.erase("n_grid");
  CHECK_THROWS_AS(parse_sweep_config(j), ConfigError);
  CHECK_THROWS_AS(load_sweep_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("default iteration count") {
  CHECK(default_iterations(2, 64) == static_cast<std::size_t>(std::ceil(64 * std::log(2.0))));
  CHECK(default_iterations(2, 1 << 20) == 4096);
  CHECK(default_iterations(1, 100) >= 1);
}

TEST_CASE("single cell, single seed") {
  auto j = small_cb();
  j["n_grid"] = {128};
  j["seeds"] = 1;
  j["sigma_mode"] = "fixed";
  const auto res = run_sweep(parse_sweep_config(j));
  REQUIRE(res.records.size() == 1);
  const auto& r = res.records[0];
  CHECK(r.n == 128);
  CHECK(r.T == 64);
  CHECK(r.H == 1);
  CHECK(r.runtime_ms == 0.0);
  CHECK(res.diagnostics.audits == 1);
}

TEST_CASE("row count, ordering and range") {
  const auto res = run_sweep(parse_sweep_config(small_cb()));
  REQUIRE(res.records.size() == 2 * 2 * 3);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.n == (i < 6 ? 64u : 256u));
    CHECK(r.sigma_id == (i % 6) / 2);
    CHECK(r.seed == i % 2);
    CHECK(r.subopt >= -1e-12);
    CHECK(r.subopt <= 0.5);
  }
  CHECK(res.diagnostics.audits_passed == res.diagnostics.audits);

  auto worst = small_cb();
  worst["sigma_mode"] = "worst_of_k";
  CHECK(run_sweep(parse_sweep_config(worst)).records.size() == 2 * 2);
}

TEST_CASE("sweeps are deterministic across reruns and thread counts") {
  auto j = small_cb();
  j["algorithm"] = "ofdm_hedge";
  const auto cfg = parse_sweep_config(j);
  const std::string a = to_csv(run_sweep(cfg, 1).records);
  CHECK(a == to_csv(run_sweep(cfg, 1).records));
  CHECK(a == to_csv(run_sweep(cfg, 4).records));

  json mdp{{"family", "hard_mdp"}, {"algorithm", "ofdm_hedge_mdp"}, {"d", 2}, {"H", 2},
           {"n_grid", {64, 128}},   {"T", 16},                      {"seeds", 2}, {"sigma_count", 2}};
  const auto mc = parse_sweep_config(mdp);
  CHECK(to_csv(run_sweep(mc, 1).records) == to_csv(run_sweep(mc, 3).records));

  json hyb{{"family", "hard_cb_hybrid"}, {"algorithm", "hybrid"}, {"d", 4}, {"n_grid", {64}},
           {"m_grid", {16, 32}},          {"T", 16},               {"seeds", 2}};
  const auto hc = parse_sweep_config(hyb);
  const auto hr = run_sweep(hc, 2);
  CHECK(hr.records.size() == 2 * 2 * 8);
  CHECK(to_csv(hr.records) == to_csv(run_sweep(hc, 1).records));

  json rnd{{"family", "random_cb"}, {"algorithm", "falcon"}, {"d", 3}, {"K", 3}, {"n_grid", {32}},
           {"m_grid", {64}},         {"seeds", 2},            {"sigma_count", 2}};
  const auto rc = parse_sweep_config(rnd);
  CHECK(to_csv(run_sweep(rc, 1).records) == to_csv(run_sweep(rc, 2).records));
}

TEST_CASE("CSV header and round trip") {
  CHECK(std::string(kCsvHeader) ==
        "experiment_id,family,d,K,H,rho,C,n,m,T,seed,sigma_id,algorithm,subopt,comparator_value,runtime_ms");
  auto j = small_cb();
  j["record_runtime"] = true;
  const auto rows = run_sweep(parse_sweep_config(j)).records;
  const std::string text = to_csv(rows);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  std::istringstream is(text);
  CHECK(read_csv(is) == rows);

  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);

  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(read_csv(bad_header), ConfigError);
  std::istringstream short_row(std::string(kCsvHeader) + "\nx,y\n");
  CHECK_THROWS_AS(read_csv(short_row), ConfigError);
}

TEST_CASE("rate fit recovers exact power laws") {
  std::vector<SweepRecord> rows;
  for (std::size_t n : {64, 256, 1024, 4096}) {
    rows.push_back(row(n, 0, 3.0 / std::sqrt(static_cast<double>(n))));
    rows.push_back(row(n, 0, 3.0 / std::sqrt(static_cast<double>(n))));
  }
  const auto fit = fit_rate(rows, "n");
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(fit.stderr_slope <= 1e-9);
  CHECK(fit.points == 4);

  std::vector<SweepRecord> quarter;
  for (std::size_t m : {16, 32, 64}) quarter.push_back(row(1, m, std::pow(static_cast<double>(m), -0.25)));
  CHECK(fit_rate(quarter, "m").slope == doctest::Approx(-0.25).epsilon(1e-9));

  CHECK_THROWS_AS(fit_rate({row(64, 0, 0.1), row(128, 0, 0.1)}, "n"), ConfigError);
  CHECK_THROWS_AS(fit_rate(rows, "T"), ConfigError);
  CHECK_THROWS_AS(fit_rate({row(64, 0, 0.1), row(128, 0, 0.0), row(256, 0, 0.1)}, "n"), ParameterError);
}
