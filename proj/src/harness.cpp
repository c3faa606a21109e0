#include "ofdm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ofdm/algos.hpp"
#include "ofdm/envs.hpp"
#include "ofdm/error.hpp"
#include "ofdm/mdp.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("config: key '" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config: key '" + key + "' must be a number");
  return j.get<double>();
}

std::vector<std::size_t> get_grid(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError("config: key '" + key + "' must be a nonempty array");
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(get_count(v, key));
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw ConfigError("config: grid '" + key + "' must be strictly ascending");
  }
  return out;
}

void require_one_of(const std::string& v, std::initializer_list<const char*> allowed,
                    const std::string& key) {
  for (const char* a : allowed) {
    if (v == a) return;
  }
  throw ConfigError("config: key '" + key + "' has unsupported value '" + v + "'");
}

CheckBands parse_check(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'check' must be an object");
  CheckBands c;
  for (const auto& [key, val] : j.items()) {
    if (key == "slope_min") c.slope_min = get_real(val, key);
    else if (key == "slope_max") c.slope_max = get_real(val, key);
    else if (key == "fit_x") c.fit_x = get_as<std::string>(val, key);
    else if (key == "max_star_exclusion") c.max_star_exclusion = get_real(val, key);
    else if (key == "require_audit") c.require_audit = get_as<bool>(val, key);
    else throw ConfigError("config: unknown key 'check." + key + "'");
  }
  require_one_of(c.fit_x, {"n", "m"}, "check.fit_x");
  return c;
}

}  // namespace

SweepConfig parse_sweep_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  SweepConfig c;
  bool have_n = false;
  for (const auto& [key, val] : j.items()) {
    if (key == "experiment_id") c.experiment_id = get_as<std::string>(val, key);
    else if (key == "family") c.family = get_as<std::string>(val, key);
    else if (key == "d") c.d = get_count(val, key);
    else if (key == "K") c.K = get_count(val, key);
    else if (key == "H") c.H = get_count(val, key);
    else if (key == "rho") c.rho = get_real(val, key);
    else if (key == "C") c.C = get_real(val, key);
    else if (key == "n_grid") { c.n_grid = get_grid(val, key); have_n = true; }
    else if (key == "m_grid") c.m_grid = get_grid(val, key);
    else if (key == "T") c.T = get_count(val, key);
    else if (key == "beta_mode") c.beta_mode = get_as<std::string>(val, key);
    else if (key == "beta") c.beta = get_real(val, key);
    else if (key == "delta") c.delta = get_real(val, key);
    else if (key == "c") c.c = get_real(val, key);
    else if (key == "eps") c.eps = get_real(val, key);
    else if (key == "seeds") c.seeds = get_count(val, key);
    else if (key == "sigma_mode") c.sigma_mode = get_as<std::string>(val, key);
    else if (key == "sigma_count") c.sigma_count = get_count(val, key);
    else if (key == "sigma") c.sigma = get_as<std::vector<int>>(val, key);
    else if (key == "algorithm") c.algorithm = get_as<std::string>(val, key);
    else if (key == "mdp_solver") c.mdp_solver = get_as<std::string>(val, key);
    else if (key == "class_size") c.class_size = get_count(val, key);
    else if (key == "output") c.output = get_as<std::string>(val, key);
    else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(val, key);
    else if (key == "record_runtime") c.record_runtime = get_as<bool>(val, key);
    else if (key == "check") c.check = parse_check(val);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (!have_n) throw ConfigError("config: 'n_grid' is required");
  require_one_of(c.family, {"hard_cb", "hard_cb_hybrid", "hard_mdp", "random_cb"}, "family");
  require_one_of(c.algorithm, {"ofdm_hedge", "hybrid", "ofdm_hedge_mdp", "falcon", "exp4"}, "algorithm");
  require_one_of(c.beta_mode, {"schedule", "explicit"}, "beta_mode");
  require_one_of(c.sigma_mode, {"fixed", "random", "worst_of_k"}, "sigma_mode");
  require_one_of(c.mdp_solver, {"auto", "joint", "chain"}, "mdp_solver");
  if (c.experiment_id.find_first_of(",\n\r") != std::string::npos) {
    throw ConfigError("config: experiment_id must not contain commas or newlines");
  }
  if (c.seeds == 0) throw ConfigError("config: seeds must be at least 1");
  if (c.sigma_mode != "fixed" && c.sigma_count == 0) throw ConfigError("config: sigma_count must be at least 1");
  if ((c.family == "hard_mdp") != (c.algorithm == "ofdm_hedge_mdp")) {
    throw ConfigError("config: family hard_mdp pairs only with algorithm ofdm_hedge_mdp");
  }
  if (c.algorithm == "hybrid" && c.family != "hard_cb_hybrid") {
    throw ConfigError("config: algorithm hybrid requires family hard_cb_hybrid");
  }
  if (c.family == "hard_cb_hybrid" ||
      c.algorithm == "hybrid" || c.algorithm == "falcon" || c.algorithm == "exp4") {
    for (std::size_t m : c.m_grid) {
      if (m == 0) throw ConfigError("config: m_grid entries must be positive for this family/algorithm");
    }
  }
  if (c.K < 2) throw ConfigError("config: K must be at least 2");
  if (c.family != "random_cb" && c.K != 2) throw ConfigError("config: hard families have K = 2");
  return c;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_sweep_config(j);
}

std::size_t default_iterations(std::size_t K, std::size_t n) {
  const double lnK = std::log(static_cast<double>(K));
  const double blocks = std::ceil(static_cast<double>(n) / 64.0);
  auto T = static_cast<std::size_t>(std::ceil(64.0 * lnK * blocks));
  T = std::min<std::size_t>(T, 4096);
  const auto floor_T = static_cast<std::size_t>(std::ceil(lnK / (std::exp(1.0) - 2.0)));
  return std::max<std::size_t>({T, floor_T, 1});
}

namespace {

struct Job {
  std::size_t cell;
  std::size_t n;
  std::size_t m;
  std::size_t seed_index;
  std::size_t sigma_slot;  // row identity: sigma index, or 0 for worst_of_k
};

struct RunOutcome {
  double subopt = 0.0;
  double comparator_value = 0.0;
  std::size_t T = 0;
  bool audited = false;
  bool audit_passed = false;
  bool star_checked = false;
  bool star_in_vs = false;
};

std::vector<int> sigma_for(const SweepConfig& cfg, std::size_t cell, std::size_t sigma_index) {
  if (cfg.sigma_mode == "fixed") {
    if (cfg.sigma.empty()) return std::vector<int>(cfg.d, 1);
    if (cfg.sigma.size() != cfg.d) throw ConfigError("config: sigma length must equal d");
    return cfg.sigma;
  }
  return random_signs(cfg.d, derive_seed(cfg.master_seed, {fnv1a(cfg.family), cell, sigma_index,
                                                           0x5167ULL}));
}

std::size_t sigma_draws(const SweepConfig& cfg) {
  return cfg.sigma_mode == "fixed" ? 1 : cfg.sigma_count;
}

MDPSolver solver_of(const std::string& s) {
  if (s == "joint") return MDPSolver::joint;
  if (s == "chain") return MDPSolver::chain;
  return MDPSolver::automatic;
}

double distinct_tables(const FiniteFunctionClass& cls) {
  std::set<std::vector<double>> seen;
  for (const auto& t : cls.tables()) seen.emplace(t.values().begin(), t.values().end());
  return static_cast<double>(seen.size());
}

// Per-context argmin of the mean table: the weak expert for EXP4 runs.
TabularPolicy worst_policy(const CBInstance& inst) {
  std::vector<std::size_t> acts(inst.num_contexts());
  for (std::size_t x = 0; x < inst.num_contexts(); ++x) {
    auto row = inst.mean_rewards().row(x);
    acts[x] = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
  }
  return TabularPolicy::deterministic(acts, inst.num_actions());
}

RunOutcome run_cb(const SweepConfig& cfg, const CBInstance& inst, const FiniteFunctionClass& cls,
                  const TabularPolicy& mu, std::size_t n, std::size_t m, std::uint64_t seed) {
  RunOutcome out;
  const TabularPolicy best = optimal_policy(inst);
  out.comparator_value = policy_value(inst, best);
  const std::size_t K = inst.num_actions();
  if (cfg.algorithm == "falcon") {
    auto res = falcon_online(inst, cls, m, cfg.delta, seed);
    out.subopt = suboptimality(inst, best, res.policy);
    return out;
  }
  if (cfg.algorithm == "exp4") {
    auto res = exp4(inst, {best, worst_policy(inst)}, m, seed);
    out.subopt = suboptimality(inst, best, res.policy);
    return out;
  }
  const auto data = sample_dataset(inst, mu, n, seed);
  const double beta = cfg.beta_mode == "explicit"
                          ? cfg.beta
                          : beta_schedule(distinct_tables(cls), n, cfg.eps, cfg.delta);
  out.T = cfg.T.value_or(default_iterations(K, n));
  const double eta = eta_schedule(K, out.T);
  if (cfg.algorithm == "hybrid") {
    auto res = hybrid_learn(data, inst, cls, m, beta, eta, out.T, cfg.delta, splitmix64(seed));
    out.subopt = suboptimality(inst, best, res.policy);
    return out;
  }
  auto res = ofdm_hedge(data, cls, beta, eta, out.T, K);
  out.subopt = suboptimality(inst, best, res.policy);
  const auto audit = hedge_regret_audit(res.trace, cls, best, data);
  out.audited = true;
  out.audit_passed = audit.passes();
  if (cls.star_index()) {
    out.star_checked = true;
    const auto& vs = res.trace.version_space;
    out.star_in_vs = std::binary_search(vs.begin(), vs.end(), *cls.star_index());
  }
  return out;
}

RunOutcome run_job(const SweepConfig& cfg, const Job& job, std::size_t sigma_index) {
  const std::uint64_t fam = fnv1a(cfg.family);
  const std::uint64_t seed =
      derive_seed(cfg.master_seed, {fam, job.cell, job.seed_index, sigma_index});
  if (cfg.family == "hard_mdp") {
    const auto sigma = sigma_for(cfg, job.cell, sigma_index);
    auto hm = hard_mdp(cfg.d, cfg.H, cfg.rho, cfg.C, job.n, sigma);
    RunOutcome out;
    const auto best = mdp_optimal_policy(hm.mdp);
    out.comparator_value = mdp_policy_value(hm.mdp, best);
    const auto data = mdp_sample(hm.mdp, hm.mu, job.n, seed);
    const double beta =
        cfg.beta_mode == "explicit"
            ? cfg.beta
            : mdp_beta_schedule(mdp_cover_counts(hm.cls), job.n, cfg.H, cfg.eps, cfg.delta, cfg.c);
    out.T = cfg.T.value_or(default_iterations(2, job.n));
    const double b = static_cast<double>(cfg.H);
    const double eta = eta_schedule_mdp(2, out.T, b);
    auto res = ofdm_hedge_mdp(data, hm.cls, beta, eta, out.T, 2, solver_of(cfg.mdp_solver));
    out.subopt = out.comparator_value - mdp_policy_value(hm.mdp, res.policy);
    out.audited = true;
    out.audit_passed = mdp_hedge_audit(res.trace, hm.cls, best, b).passes();
    return out;
  }
  if (cfg.family == "random_cb") {
    const std::uint64_t inst_seed = derive_seed(cfg.master_seed, {fam, job.cell, sigma_index, 0x1ULL});
    auto inst = random_tabular_cb(cfg.d, cfg.K, inst_seed);
    auto cls = random_realizable_class(inst, cfg.class_size, splitmix64(inst_seed));
    return run_cb(cfg, inst, cls, TabularPolicy::uniform(cfg.d, cfg.K), job.n, job.m, seed);
  }
  const auto sigma = sigma_for(cfg, job.cell, sigma_index);
  HardCB hc = cfg.family == "hard_cb_hybrid"
                  ? hard_cb_hybrid(cfg.d, cfg.rho, cfg.C, job.n, job.m, sigma)
                  : hard_cb(cfg.d, cfg.rho, cfg.C, job.n, sigma);
  return run_cb(cfg, hc.instance, hc.cls, hc.mu, job.n, job.m, seed);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, unsigned threads) {
  std::vector<Job> jobs;
  const std::size_t draws = sigma_draws(cfg);
  const bool worst = cfg.sigma_mode == "worst_of_k";
  std::size_t cell = 0;
  for (std::size_t n : cfg.n_grid) {
    for (std::size_t m : cfg.m_grid) {
      for (std::size_t s = 0; s < (worst ? 1 : draws); ++s) {
        for (std::size_t k = 0; k < cfg.seeds; ++k) jobs.push_back({cell, n, m, k, s});
      }
      ++cell;
    }
  }

  struct Slot {
    SweepRecord rec;
    std::vector<RunOutcome> outcomes;
  };
  std::vector<Slot> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lk(err_mu);
        if (first_error) return;
      }
      try {
        const Job& job = jobs[i];
        const auto t0 = std::chrono::steady_clock::now();
        Slot& slot = slots[i];
        std::size_t chosen = job.sigma_slot;
        RunOutcome picked;
        if (worst) {
          bool have = false;
          for (std::size_t s = 0; s < draws; ++s) {
            auto o = run_job(cfg, job, s);
            slot.outcomes.push_back(o);
            if (!have || o.subopt > picked.subopt) {
              have = true;
              picked = o;
              chosen = s;
            }
          }
        } else {
          picked = run_job(cfg, job, job.sigma_slot);
          slot.outcomes.push_back(picked);
        }
        const auto t1 = std::chrono::steady_clock::now();
        SweepRecord& r = slot.rec;
        r.experiment_id = cfg.experiment_id;
        r.family = cfg.family;
        r.d = cfg.d;
        r.K = cfg.K;
        r.H = cfg.family == "hard_mdp" ? cfg.H : 1;
        r.rho = cfg.rho;
        r.C = cfg.C;
        r.n = job.n;
        r.m = job.m;
        r.T = picked.T;
        r.seed = job.seed_index;
        r.sigma_id = chosen;
        r.algorithm = cfg.algorithm;
        r.subopt = picked.subopt;
        r.comparator_value = picked.comparator_value;
        r.runtime_ms = cfg.record_runtime
                           ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                           : 0.0;
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const unsigned nthreads = std::max(1U, threads);
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult res;
  res.records.reserve(slots.size());
  for (auto& s : slots) {
    res.records.push_back(std::move(s.rec));
    for (const auto& o : s.outcomes) {
      ++res.diagnostics.runs;
      if (o.audited) {
        ++res.diagnostics.audits;
        if (o.audit_passed) ++res.diagnostics.audits_passed;
      }
      if (o.star_checked) {
        ++res.diagnostics.star_checks;
        if (o.star_in_vs) ++res.diagnostics.star_in_version_space;
      }
    }
  }
  return res;
}

const char* const kCsvHeader =
    "experiment_id,family,d,K,H,rho,C,n,m,T,seed,sigma_id,algorithm,subopt,comparator_value,runtime_ms";

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ConfigError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.experiment_id << ',' << r.family << ',' << r.d << ',' << r.K << ',' << r.H << ','
       << format_double(r.rho) << ',' << format_double(r.C) << ',' << r.n << ',' << r.m << ','
       << r.T << ',' << r.seed << ',' << r.sigma_id << ',' << r.algorithm << ','
       << format_double(r.subopt) << ',' << format_double(r.comparator_value) << ','
       << format_double(r.runtime_ms) << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<SweepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_csv(out, records);
}

namespace {

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("csv: bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("csv: bad integer '" + s + "'");
  return v;
}

}  // namespace

std::vector<SweepRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError("csv: header does not match schema");
  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 16) throw ConfigError("csv: expected 16 fields");
    SweepRecord r;
    r.experiment_id = f[0];
    r.family = f[1];
    r.d = parse_count(f[2]);
    r.K = parse_count(f[3]);
    r.H = parse_count(f[4]);
    r.rho = parse_double(f[5]);
    r.C = parse_double(f[6]);
    r.n = parse_count(f[7]);
    r.m = parse_count(f[8]);
    r.T = parse_count(f[9]);
    r.seed = parse_count(f[10]);
    r.sigma_id = parse_count(f[11]);
    r.algorithm = f[12];
    r.subopt = parse_double(f[13]);
    r.comparator_value = parse_double(f[14]);
    r.runtime_ms = parse_double(f[15]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SweepRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& x) {
  if (x != "n" && x != "m") throw ConfigError("fit_rate: x must be 'n' or 'm'");
  std::map<std::size_t, std::pair<double, std::size_t>> groups;
  for (const auto& r : records) {
    auto& g = groups[x == "n" ? r.n : r.m];
    g.first += r.subopt;
    g.second += 1;
  }
  if (groups.size() < 3) throw ConfigError("fit_rate: need at least 3 distinct grid values");
  std::vector<double> lx, ly;
  for (const auto& [key, g] : groups) {
    const double mean = g.first / static_cast<double>(g.second);
    if (!(mean > 0.0)) {
      throw ParameterError("fit_rate: mean suboptimality at " + x + " = " + std::to_string(key) +
                           " is not positive");
    }
    if (key == 0) throw ParameterError("fit_rate: grid value 0 has no logarithm");
    lx.push_back(std::log(static_cast<double>(key)));
    ly.push_back(std::log(mean));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.points = lx.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += e * e;
  }
  fit.stderr_slope = std::sqrt(ssr / (k - 2.0) / sxx);
  return fit;
}

}  // namespace ofdm
