#include "ofdm/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ofdm/concentration.hpp"
#include "ofdm/envs.hpp"
#include "ofdm/error.hpp"
#include "ofdm/harness.hpp"
#include "ofdm/rng.hpp"
#include "ofdm/transfer.hpp"

namespace ofdm {

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitParameter = 3;
constexpr int kExitGate = 4;

struct Globals {
  std::optional<std::uint64_t> master_seed;
  unsigned threads = 0;
  bool quiet = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, val] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return value_or<T>(j, key, T{});
}

unsigned thread_count(const Globals& g) {
  if (g.threads > 0) return g.threads;
  return std::max(1U, std::thread::hardware_concurrency());
}

std::string fmt(double v) { return format_double(v); }

int cmd_rates(const Globals& g, const std::string& config_path, const std::string& out_path,
              bool check, std::initializer_list<const char*> families, std::ostream& out) {
  SweepConfig cfg = load_sweep_config(config_path);
  if (std::find_if(families.begin(), families.end(),
                   [&](const char* f) { return cfg.family == f; }) == families.end()) {
    throw ConfigError("family '" + cfg.family + "' is not handled by this subcommand");
  }
  if (g.master_seed) cfg.master_seed = *g.master_seed;
  if (!out_path.empty()) cfg.output = out_path;

  const SweepResult res = run_sweep(cfg, thread_count(g));
  if (!cfg.output.empty()) write_csv(cfg.output, res.records);

  const auto& dg = res.diagnostics;
  bool ok = true;
  if (!g.quiet) {
    out << "rows " << res.records.size() << " runs " << dg.runs << '\n';
    if (dg.audits > 0) out << "hedge audit passed " << dg.audits_passed << "/" << dg.audits << '\n';
    if (dg.star_checks > 0) {
      out << "f* in version space " << dg.star_in_version_space << "/" << dg.star_checks << '\n';
    }
  }
  const bool want_fit = cfg.check.slope_min || cfg.check.slope_max;
  const auto& grid = cfg.check.fit_x == "m" ? cfg.m_grid : cfg.n_grid;
  if (grid.size() >= 3) {
    try {
      const RateFit fit = fit_rate(res.records, cfg.check.fit_x);
      if (!g.quiet) {
        out << "slope " << fmt(fit.slope) << " stderr " << fmt(fit.stderr_slope) << " intercept "
            << fmt(fit.intercept) << '\n';
      }
      if (check && cfg.check.slope_min && fit.slope < *cfg.check.slope_min) ok = false;
      if (check && cfg.check.slope_max && fit.slope > *cfg.check.slope_max) ok = false;
    } catch (const ParameterError& e) {
      if (!g.quiet) out << "fit skipped: " << e.what() << '\n';
      if (check && want_fit) ok = false;
    }
  } else if (check && want_fit) {
    throw ConfigError("slope check needs at least 3 grid values");
  }
  if (check) {
    if (cfg.check.require_audit && dg.audits_passed != dg.audits) ok = false;
    if (cfg.check.max_star_exclusion && dg.star_checks > 0) {
      const double excl = 1.0 - static_cast<double>(dg.star_in_version_space) /
                                    static_cast<double>(dg.star_checks);
      if (excl > *cfg.check.max_star_exclusion) ok = false;
    }
    out << (ok ? "CHECK PASS" : "CHECK FAIL") << '\n';
  }
  return ok ? 0 : kExitGate;
}

TransferCase build_case(const json& c, std::uint64_t master) {
  const auto kind = required<std::string>(c, "kind");
  if (kind == "halfspace_sphere") {
    require_keys(c, {"kind"}, "transfer case");
    return halfspace_sphere_case();
  }
  if (kind == "threshold") {
    require_keys(c, {"kind", "G", "p"}, "transfer case");
    return threshold_case(value_or<std::size_t>(c, "G", 1000), value_or<double>(c, "p", 3.0));
  }
  if (kind == "bernoulli_gap") {
    require_keys(c, {"kind", "p"}, "transfer case");
    return bernoulli_gap_case(value_or<double>(c, "p", 0.5));
  }
  if (kind == "hard_cb") {
    require_keys(c, {"kind", "d", "rho", "C", "n", "sigma"}, "transfer case");
    const auto d = value_or<std::size_t>(c, "d", 4);
    std::vector<int> sigma = c.contains("sigma") ? value_or<std::vector<int>>(c, "sigma", {})
                                                 : random_signs(d, derive_seed(master, {fnv1a("transfer")}));
    auto hc = hard_cb(d, value_or<double>(c, "rho", 1.0), value_or<double>(c, "C", 1.0),
                      value_or<std::size_t>(c, "n", 1024), sigma);
    TabularPolicy best = optimal_policy(hc.instance);
    return TransferCase{"hard_cb", std::move(hc.instance), std::move(hc.cls), std::move(hc.mu),
                        std::move(best)};
  }
  throw ConfigError("transfer case: unknown kind '" + kind + "'");
}

int cmd_transfer(const Globals& g, const std::string& config_path, const std::string& out_path,
                 std::ostream& out) {
  const json j = read_json(config_path);
  require_keys(j, {"cases", "rho_grid", "max_factor", "output"}, "transfer config");
  const double max_factor =
      value_or<double>(j, "max_factor", std::numeric_limits<double>::infinity());
  const auto grid = required<std::vector<double>>(j, "rho_grid");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError("transfer config: rho_grid must be nonempty and ascending");
  }
  const json& cases = j.at("cases");
  if (!cases.is_array() || cases.empty()) throw ConfigError("transfer config: cases must be a nonempty array");
  const std::string path = out_path.empty() ? value_or<std::string>(j, "output", "") : out_path;

  std::ostringstream csv;
  csv << "case,rho,transfer_factor,hk_factor,concentrability\n";
  std::ostringstream summary;
  for (const auto& c : cases) {
    const TransferCase tc = build_case(c, g.master_seed.value_or(0));
    const double conc = concentrability(tc.mu, tc.pi, tc.instance.context_probs());
    for (double rho : grid) {
      const auto tf = transfer_factor(tc.cls, tc.instance, tc.mu, tc.pi, rho);
      const auto hk = hk_transfer_factor(tc.cls, tc.instance, tc.mu, tc.pi, rho);
      csv << tc.name << ',' << fmt(rho) << ',' << fmt(tf.factor) << ',' << fmt(hk.factor) << ','
          << fmt(conc) << '\n';
    }
    const auto me = minimal_exponent(tc.cls, tc.instance, tc.mu, tc.pi, grid, max_factor);
    summary << tc.name << " minimal_rho " << (std::isnan(me.rho) ? "none" : fmt(me.rho)) << '\n';
  }
  if (!path.empty()) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << csv.str();
  }
  if (!g.quiet) out << csv.str() << summary.str();
  return 0;
}

int cmd_cover(const Globals& g, const std::string& config_path, std::ostream& out) {
  const json j = read_json(config_path);
  require_keys(j, {"vectors", "family", "d", "K", "rho", "C", "n", "class_size", "eps_grid", "delta",
                   "seed"},
               "cover config");
  const auto eps_grid = value_or<std::vector<double>>(j, "eps_grid", {0.0});
  for (double e : eps_grid) {
    if (!(e >= 0.0)) throw ConfigError("cover config: eps must be nonnegative");
  }
  if (j.contains("vectors")) {
    const auto vecs = value_or<std::vector<std::vector<double>>>(j, "vectors", {});
    if (vecs.empty()) throw ConfigError("cover config: vectors must be nonempty");
    out << "eps,cover\n";
    for (double e : eps_grid) out << fmt(e) << ',' << covering_number_l1(vecs, e) << '\n';
    return 0;
  }
  const auto family = value_or<std::string>(j, "family", "hard_cb");
  const auto d = value_or<std::size_t>(j, "d", 8);
  const auto n = value_or<std::size_t>(j, "n", 1024);
  const auto delta = value_or<double>(j, "delta", 0.1);
  const std::uint64_t seed = value_or<std::uint64_t>(j, "seed", g.master_seed.value_or(0));
  std::optional<CBInstance> inst;
  std::optional<FiniteFunctionClass> cls;
  std::optional<TabularPolicy> mu;
  if (family == "hard_cb") {
    auto hc = hard_cb(d, value_or<double>(j, "rho", 1.0), value_or<double>(j, "C", 1.0), n,
                      random_signs(d, derive_seed(seed, {fnv1a("cover")})));
    inst.emplace(std::move(hc.instance));
    cls.emplace(std::move(hc.cls));
    mu.emplace(std::move(hc.mu));
  } else if (family == "random_cb") {
    const auto K = value_or<std::size_t>(j, "K", 2);
    inst.emplace(random_tabular_cb(d, K, seed));
    cls.emplace(random_realizable_class(*inst, value_or<std::size_t>(j, "class_size", 16),
                                        splitmix64(seed)));
    mu.emplace(TabularPolicy::uniform(d, K));
  } else {
    throw ConfigError("cover config: family must be hard_cb or random_cb");
  }
  const auto data = sample_dataset(*inst, *mu, n, derive_seed(seed, {fnv1a("cover-data")}));
  out << "eps";
  for (std::size_t a = 0; a < cls->actions(); ++a) out << ",action" << a;
  out << ",product,saturated,beta\n";
  for (double e : eps_grid) {
    std::vector<std::uint64_t> counts;
    for (std::size_t a = 0; a < cls->actions(); ++a) {
      counts.push_back(covering_number_l1(restrict_to_sample(*cls, data, a), e));
    }
    const auto prod = product_cover_bound(counts);
    out << fmt(e);
    for (auto c : counts) out << ',' << c;
    out << ',' << prod.value << ',' << (prod.saturated ? "yes" : "no") << ','
        << fmt(beta_schedule(static_cast<double>(prod.value), n, e, delta)) << '\n';
  }
  return 0;
}

int cmd_concentration(const Globals& g, const std::string& config_path, bool check, std::ostream& out) {
  const json j = read_json(config_path);
  require_keys(j, {"kind", "Z", "functions", "n", "delta", "trials", "seed", "U", "G", "b", "states",
                   "actions"},
               "concentration config");
  const auto kind = value_or<std::string>(j, "kind", "generic");
  const auto n = value_or<std::size_t>(j, "n", 200);
  const auto delta = value_or<double>(j, "delta", 0.1);
  const auto trials = value_or<std::size_t>(j, "trials", 1000);
  const std::uint64_t seed = value_or<std::uint64_t>(j, "seed", g.master_seed.value_or(0));
  const double gate = violation_gate(delta, trials);
  bool ok = true;
  if (kind == "generic") {
    // Indicators of the first `functions` points of a uniform Z.
    const auto Z = value_or<std::size_t>(j, "Z", 32);
    const auto count = value_or<std::size_t>(j, "functions", 16);
    if (count == 0 || count > Z) throw ConfigError("concentration config: need 1 <= functions <= Z");
    std::vector<std::vector<double>> G(count, std::vector<double>(Z, 0.0));
    for (std::size_t k = 0; k < count; ++k) G[k][k] = 1.0;
    const std::vector<double> probs(Z, 1.0 / static_cast<double>(Z));
    const auto rep = bernstein_check_generic(G, probs, 1.0, n, delta, 0.0, trials, seed);
    out << "generic violations " << rep.violations << "/" << rep.trials << " fraction "
        << fmt(rep.fraction()) << " gate " << fmt(gate) << '\n';
    ok = rep.fraction() <= gate;
  } else if (kind == "bellman") {
    const auto nu = value_or<std::size_t>(j, "U", 8);
    const auto ng = value_or<std::size_t>(j, "G", 8);
    const auto S = value_or<std::size_t>(j, "states", 3);
    const auto K = value_or<std::size_t>(j, "actions", 2);
    if (nu == 0 || ng == 0 || S == 0 || K == 0) throw ConfigError("concentration config: sizes must be positive");
    const auto sampler = TabularStepSampler::random(derive_seed(seed, {fnv1a("sampler")}), S, K);
    Rng rng(derive_seed(seed, {fnv1a("classes")}));
    std::vector<std::vector<double>> G(ng, std::vector<double>(S));
    for (auto& v : G) {
      for (double& x : v) x = rng.uniform();
    }
    std::vector<Table> U;
    for (std::size_t i = 0; i < nu; ++i) {
      Table t(S, K);
      for (double& x : t.values()) x = 2.0 * rng.uniform();
      U.push_back(std::move(t));
    }
    const auto rep = bernstein_check_bellman(U, G, sampler, 2.0, n, delta, 0.0, trials, seed);
    out << "bellman first violations " << rep.first.violations << "/" << trials << " fraction "
        << fmt(rep.first.fraction()) << '\n'
        << "bellman second violations " << rep.second.violations << "/" << trials << " fraction "
        << fmt(rep.second.fraction()) << '\n'
        << "gate " << fmt(gate) << '\n';
    ok = rep.first.fraction() <= gate && rep.second.fraction() <= gate;
  } else {
    throw ConfigError("concentration config: kind must be generic or bellman");
  }
  if (check) out << (ok ? "CHECK PASS" : "CHECK FAIL") << '\n';
  return check && !ok ? kExitGate : 0;
}

int cmd_fit(const std::string& csv, const std::string& x, const std::string& algorithm,
            const std::string& family, std::ostream& out) {
  auto records = read_csv(csv);
  std::erase_if(records, [&](const SweepRecord& r) {
    return (!algorithm.empty() && r.algorithm != algorithm) || (!family.empty() && r.family != family);
  });
  const RateFit fit = fit_rate(records, x);
  out << "slope " << fmt(fit.slope) << " stderr " << fmt(fit.stderr_slope) << " intercept "
      << fmt(fit.intercept) << " points " << fit.points << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ofdm-lab: offline decision-making simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--master-seed", seed, "Override the master seed");
  app.add_option("--threads", g.threads, "Worker threads (default: hardware concurrency)");
  app.add_flag("--quiet", g.quiet, "Suppress summaries");

  std::string config, out_path, csv, fit_x = "n", fit_alg, fit_family;
  bool check = false;
  int code = 0;

  auto add_rates = [&](const char* name, const char* help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config, "Sweep config (JSON)")->required();
    sc->add_option("--out", out_path, "CSV output path (overrides config)");
    sc->add_flag("--check", check, "Exit 4 when a configured gate fails");
    return sc;
  };
  auto* offline = add_rates("rates-offline", "Offline rate sweep (hard_cb, random_cb)");
  auto* hybrid = add_rates("rates-hybrid", "Hybrid rate sweep (hard_cb_hybrid)");
  auto* mdp = add_rates("rates-mdp", "MDP rate sweep (hard_mdp)");
  auto* transfer = app.add_subcommand("transfer", "Transfer factor, HK factor and concentrability");
  transfer->add_option("--config", config)->required();
  transfer->add_option("--out", out_path, "CSV output path");
  auto* cover = app.add_subcommand("cover", "Empirical L1 cover counts and beta");
  cover->add_option("--config", config)->required();
  auto* conc = app.add_subcommand("concentration", "Monte-Carlo Bernstein checks");
  conc->add_option("--config", config)->required();
  conc->add_flag("--check", check, "Exit 4 when the violation fraction exceeds the gate");
  auto* fit = app.add_subcommand("fit", "Log-log rate fit of a sweep CSV");
  fit->add_option("--csv", csv)->required();
  fit->add_option("--x", fit_x)->check(CLI::IsMember({"n", "m"}));
  fit->add_option("--algorithm", fit_alg, "Keep only rows of this algorithm");
  fit->add_option("--family", fit_family, "Keep only rows of this family");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (seed_opt->count() > 0) g.master_seed = seed;

  try {
    if (offline->parsed()) code = cmd_rates(g, config, out_path, check, {"hard_cb", "random_cb"}, out);
    else if (hybrid->parsed()) code = cmd_rates(g, config, out_path, check, {"hard_cb_hybrid"}, out);
    else if (mdp->parsed()) code = cmd_rates(g, config, out_path, check, {"hard_mdp"}, out);
    else if (transfer->parsed()) code = cmd_transfer(g, config, out_path, out);
    else if (cover->parsed()) code = cmd_cover(g, config, out);
    else if (conc->parsed()) code = cmd_concentration(g, config, check, out);
    else if (fit->parsed()) code = cmd_fit(csv, fit_x, fit_alg, fit_family, out);
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return code;
}

}  // namespace ofdm
