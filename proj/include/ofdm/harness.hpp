#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ofdm {

struct CheckBands {
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  std::string fit_x = "n";
  // Largest tolerated fraction of runs whose version space misses f*.
  std::optional<double> max_star_exclusion;
  bool require_audit = true;
};

struct SweepConfig {
  std::string experiment_id = "sweep";
  std::string family = "hard_cb";  // hard_cb | hard_cb_hybrid | hard_mdp | random_cb
  std::size_t d = 8;
  std::size_t K = 2;
  std::size_t H = 3;
  double rho = 1.0;
  double C = 1.0;
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> m_grid{0};
  std::optional<std::size_t> T;
  std::string beta_mode = "schedule";  // schedule | explicit
  double beta = 0.0;
  double delta = 0.1;
  double c = 1.0;
  double eps = 0.0;
  std::size_t seeds = 1;
  std::string sigma_mode = "random";  // fixed | random | worst_of_k
  std::size_t sigma_count = 8;
  std::vector<int> sigma;
  std::string algorithm = "ofdm_hedge";  // ofdm_hedge | hybrid | ofdm_hedge_mdp | falcon | exp4
  std::string mdp_solver = "chain";      // auto | joint | chain
  std::size_t class_size = 16;           // random_cb only
  std::string output;
  std::uint64_t master_seed = 0;
  bool record_runtime = false;
  CheckBands check;
};

// Strict parse: unknown keys and ill-typed values raise ConfigError.
SweepConfig parse_sweep_config(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::string& path);

struct SweepRecord {
  std::string experiment_id;
  std::string family;
  std::size_t d = 0;
  std::size_t K = 0;
  std::size_t H = 0;
  double rho = 0.0;
  double C = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t T = 0;
  std::size_t seed = 0;
  std::size_t sigma_id = 0;
  std::string algorithm;
  double subopt = 0.0;
  double comparator_value = 0.0;
  double runtime_ms = 0.0;
  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct SweepDiagnostics {
  std::size_t runs = 0;
  std::size_t audits = 0;
  std::size_t audits_passed = 0;
  std::size_t star_checks = 0;
  std::size_t star_in_version_space = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  SweepDiagnostics diagnostics;
};

// Default iteration count: 64 ln K ceil(n / 64), capped at 4096 (and at least
// large enough for the learning-rate schedule).
std::size_t default_iterations(std::size_t K, std::size_t n);

SweepResult run_sweep(const SweepConfig& config, unsigned threads = 1);

extern const char* const kCsvHeader;
// Shortest round-trip decimal form.
std::string format_double(double v);
void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_csv(const std::string& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_csv(std::istream& is);
std::vector<SweepRecord> read_csv(const std::string& path);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

// OLS of ln(mean subopt per grid value) on ln(x), x in {"n", "m"}.
RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& x);

}  // namespace ofdm
