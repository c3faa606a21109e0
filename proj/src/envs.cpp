#include "ofdm/envs.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ofdm/error.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

std::size_t sign_index(const std::vector<int>& alpha) {
  if (alpha.size() > 63) throw ConfigError("sign_index: dimension too large");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 1) {
      idx |= std::size_t{1} << i;
    } else if (alpha[i] != -1) {
      throw ConfigError("sign vector entries must be -1 or +1");
    }
  }
  return idx;
}

std::vector<int> index_signs(std::size_t index, std::size_t d) {
  std::vector<int> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = ((index >> i) & 1U) ? 1 : -1;
  return out;
}

std::vector<int> random_signs(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(d);
  for (auto& s : out) s = rng.bernoulli(0.5) ? 1 : -1;
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_common(std::size_t d, double rho, double C, std::size_t n, const std::vector<int>& sigma) {
  if (d == 0) throw ParameterError("hard instance: d must be at least 1");
  if (d > kMaxSignDim) throw ParameterError("hard instance: d must be at most 20");
  if (!(rho >= 1.0)) throw ParameterError("hard instance: rho must be at least 1");
  if (!(C > 0.0)) throw ParameterError("hard instance: C must be positive");
  if (n == 0) throw ParameterError("hard instance: n must be at least 1");
  if (sigma.size() != d) throw ConfigError("hard instance: sigma length must equal d");
  sign_index(sigma);
}

std::string sign_label(const std::vector<int>& alpha) {
  std::string s;
  for (int a : alpha) s.push_back(a > 0 ? '+' : '-');
  return s;
}

HardCB build_hard_cb(HardCBSpec spec) {
  const std::size_t d = spec.d;
  const double eps = spec.epsilon;
  if (!(eps > 0.0 && eps < 0.5)) {
    throw ParameterError("hard instance: need 0 < epsilon < 1/2, got epsilon = " + fmt(eps));
  }
  spec.mu_a2 = std::pow(eps, 2.0 * spec.rho - 2.0) / spec.C;
  if (!(spec.mu_a2 <= 1.0)) {
    throw ParameterError("hard instance: need epsilon^(2 rho - 2) / C <= 1, got mu(a2) = " +
                         fmt(spec.mu_a2));
  }

  Table means(d, 2);
  for (std::size_t i = 0; i < d; ++i) {
    means(i, 0) = 0.5;
    means(i, 1) = 0.5 + spec.sigma[i] * eps / 2.0;
  }
  CBInstance inst(std::vector<double>(d, 1.0 / static_cast<double>(d)), means, RewardLaw::bernoulli);

  Table mu_t(d, 2);
  for (std::size_t i = 0; i < d; ++i) {
    mu_t(i, 0) = 1.0 - spec.mu_a2;
    mu_t(i, 1) = spec.mu_a2;
  }

  const std::size_t N = std::size_t{1} << d;
  std::vector<Table> tables;
  std::vector<std::string> labels;
  tables.reserve(N);
  labels.reserve(N);
  for (std::size_t j = 0; j < N; ++j) {
    const auto alpha = index_signs(j, d);
    Table f(d, 2);
    for (std::size_t i = 0; i < d; ++i) {
      f(i, 0) = 0.5;
      f(i, 1) = 0.5 + alpha[i] * eps / 2.0;
    }
    tables.push_back(std::move(f));
    labels.push_back(sign_label(alpha));
  }
  FiniteFunctionClass cls(std::move(tables), sign_index(spec.sigma), std::move(labels));
  return HardCB{std::move(inst), TabularPolicy(std::move(mu_t)), std::move(cls), std::move(spec)};
}

}  // namespace

double hard_cb_epsilon(std::size_t d, double rho, double C, std::size_t n) {
  return std::pow(C * static_cast<double>(d) / (32.0 * static_cast<double>(n)), 1.0 / (2.0 * rho));
}

double hard_cb_hybrid_epsilon(std::size_t d, double rho, double C, std::size_t n,
                              std::optional<std::size_t> m) {
  const double off =
      std::pow(C * static_cast<double>(d) / (64.0 * static_cast<double>(n)), 1.0 / (2.0 * rho));
  if (!m) return off;
  const double on = 0.125 * std::sqrt(static_cast<double>(d) / static_cast<double>(*m));
  return std::min(off, on);
}

HardCB hard_cb(std::size_t d, double rho, double C, std::size_t n, const std::vector<int>& sigma) {
  check_common(d, rho, C, n, sigma);
  HardCBSpec spec;
  spec.d = d;
  spec.rho = rho;
  spec.C = C;
  spec.n = n;
  spec.sigma = sigma;
  spec.epsilon = hard_cb_epsilon(d, rho, C, n);
  return build_hard_cb(std::move(spec));
}

HardCB hard_cb_hybrid(std::size_t d, double rho, double C, std::size_t n,
                      std::optional<std::size_t> m, const std::vector<int>& sigma) {
  check_common(d, rho, C, n, sigma);
  if (m && *m == 0) throw ParameterError("hybrid hard instance: m must be at least 1");
  HardCBSpec spec;
  spec.d = d;
  spec.rho = rho;
  spec.C = C;
  spec.n = n;
  spec.m = m;
  spec.sigma = sigma;
  spec.epsilon = hard_cb_hybrid_epsilon(d, rho, C, n, m);
  return build_hard_cb(std::move(spec));
}

double hard_mdp_epsilon(std::size_t d, std::size_t H, double rho, double C, std::size_t n) {
  const double Hd = static_cast<double>(H);
  return std::pow(C * static_cast<double>(d) /
                      (32.0 * static_cast<double>(n) * std::pow(Hd, 2.0 * rho - 2.0)),
                  1.0 / (2.0 * rho));
}

HardMDP hard_mdp(std::size_t d, std::size_t H, double rho, double C, std::size_t n,
                 const std::vector<int>& sigma, HardMDPClass kind, RewardLaw law) {
  check_common(d, rho, C, n, sigma);
  if (H < 2) throw ParameterError("hard MDP: H must be at least 2");
  const double Hd = static_cast<double>(H);
  const double need = C * static_cast<double>(d) * std::pow(Hd, 2.0 * rho) / 32.0;
  if (static_cast<double>(n) < need) {
    throw ParameterError("hard MDP: need n >= C d H^(2 rho) / 32 = " + fmt(need));
  }
  HardMDPSpec spec;
  spec.d = d;
  spec.H = H;
  spec.rho = rho;
  spec.C = C;
  spec.n = n;
  spec.sigma = sigma;
  spec.kind = kind;
  spec.epsilon = hard_mdp_epsilon(d, H, rho, C, n);
  const double eps = spec.epsilon;
  if (!(eps > 0.0 && eps < 0.5)) {
    throw ParameterError("hard MDP: need 0 < epsilon < 1/2, got epsilon = " + fmt(eps));
  }
  spec.mu_a2 = std::pow(eps, 2.0 * rho - 2.0) * std::pow(Hd, 2.0 * rho - 2.0) / C;
  if (!(spec.mu_a2 <= 1.0)) {
    throw ParameterError("hard MDP: need (epsilon H)^(2 rho - 2) / C <= 1, got mu(a2) = " +
                         fmt(spec.mu_a2));
  }

  const std::size_t S = 3 * d, K = 2;
  std::vector<std::size_t> next(H * S * K);
  std::vector<double> reward(H * S * K);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < d; ++i) {
      const double red = 0.5 + sigma[i] * eps / 2.0;
      const std::size_t x = 3 * i, xb = 3 * i + 1, xt = 3 * i + 2;
      auto at = [&](std::size_t s, std::size_t a) { return (h * S + s) * K + a; };
      next[at(x, 0)] = xb;
      reward[at(x, 0)] = 0.5;
      next[at(x, 1)] = xt;
      reward[at(x, 1)] = red;
      for (std::size_t a = 0; a < K; ++a) {
        next[at(xb, a)] = xb;
        reward[at(xb, a)] = 0.5;
        next[at(xt, a)] = xt;
        reward[at(xt, a)] = red;
      }
    }
  }
  std::vector<double> init(S, 0.0);
  for (std::size_t i = 0; i < d; ++i) init[3 * i] = 1.0 / static_cast<double>(d);
  MDPInstance mdp(S, K, H, std::move(next), std::move(reward), std::move(init), law);

  Table mu_t(S, K);
  for (std::size_t s = 0; s < S; ++s) {
    mu_t(s, 0) = 1.0 - spec.mu_a2;
    mu_t(s, 1) = spec.mu_a2;
  }
  MDPPolicy mu{std::vector<TabularPolicy>(H, TabularPolicy(mu_t))};

  auto make_table = [&](double base, const std::vector<double>& red_values) {
    Table f(S, K);
    for (std::size_t i = 0; i < d; ++i) {
      f(3 * i, 0) = base;
      f(3 * i, 1) = red_values[i];
      for (std::size_t a = 0; a < K; ++a) {
        f(3 * i + 1, a) = base;
        f(3 * i + 2, a) = red_values[i];
      }
    }
    return f;
  };

  std::vector<std::vector<Table>> per_step(H);
  std::vector<std::size_t> star(H);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t L = H - h;  // remaining steps, H - h + 1 in 1-based terms
    const double Ld = static_cast<double>(L);
    std::vector<double> red(d);
    if (kind == HardMDPClass::literal) {
      const std::size_t N = std::size_t{1} << d;
      for (std::size_t j = 0; j < N; ++j) {
        const auto alpha = index_signs(j, d);
        for (std::size_t i = 0; i < d; ++i) red[i] = Ld * (0.5 + alpha[i] * eps / 2.0);
        per_step[h].push_back(make_table(Ld / 2.0, red));
      }
      star[h] = sign_index(sigma);
    } else {
      // Mixed radix over d digits, digit k <-> m_i = -L + 2k.
      const std::size_t radix = L + 1;
      std::size_t N = 1;
      for (std::size_t i = 0; i < d; ++i) N *= radix;
      for (std::size_t j = 0; j < N; ++j) {
        std::size_t rest = j;
        for (std::size_t i = 0; i < d; ++i) {
          const double m = -Ld + 2.0 * static_cast<double>(rest % radix);
          rest /= radix;
          red[i] = Ld / 2.0 + m * eps / 2.0;
        }
        per_step[h].push_back(make_table(Ld / 2.0, red));
      }
      std::size_t s_idx = 0, place = 1;
      for (std::size_t i = 0; i < d; ++i) {
        s_idx += (sigma[i] > 0 ? L : 0) * place;
        place *= radix;
      }
      star[h] = s_idx;
    }
  }
  MDPFunctionClass cls(std::move(per_step), std::move(star));
  return HardMDP{std::move(mdp), std::move(mu), std::move(cls), std::move(spec)};
}

CBInstance random_tabular_cb(std::size_t d, std::size_t K, std::uint64_t seed) {
  if (d == 0 || K < 2) throw ConfigError("random_tabular_cb: need d >= 1 and K >= 2");
  Rng rng(seed);
  Table means(d, K);
  for (double& v : means.values()) v = rng.uniform();
  return CBInstance(std::vector<double>(d, 1.0 / static_cast<double>(d)), std::move(means),
                    RewardLaw::bernoulli);
}

FiniteFunctionClass random_realizable_class(const CBInstance& inst, std::size_t size,
                                            std::uint64_t seed) {
  if (size == 0) throw ConfigError("random_realizable_class: size must be at least 1");
  Rng rng(seed);
  const std::size_t star = rng.below(size);
  std::vector<Table> tables;
  tables.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    if (i == star) {
      tables.push_back(inst.mean_rewards());
      continue;
    }
    Table f(inst.num_contexts(), inst.num_actions());
    for (double& v : f.values()) v = rng.uniform();
    tables.push_back(std::move(f));
  }
  return FiniteFunctionClass(std::move(tables), star);
}

TransferCase halfspace_sphere_case() {
  constexpr std::size_t P = 360;
  const double deg = std::numbers::pi / 180.0;
  std::vector<double> px(2 * P), py(2 * P);
  for (std::size_t k = 0; k < P; ++k) {
    for (std::size_t r = 0; r < 2; ++r) {
      const double radius = r == 0 ? 1.0 : 2.0;
      px[r * P + k] = radius * std::cos(static_cast<double>(k) * deg);
      py[r * P + k] = radius * std::sin(static_cast<double>(k) * deg);
    }
  }
  std::vector<Table> tables;
  for (std::size_t j = 0; j < P; ++j) {
    const double w = (static_cast<double>(j) + 0.5) * deg;
    Table f(1, 2 * P);
    for (std::size_t k = 0; k < 2 * P; ++k) {
      f(0, k) = std::cos(w) * px[k] + std::sin(w) * py[k] > 0.0 ? 1.0 : 0.0;
    }
    tables.push_back(std::move(f));
  }
  Table mu(1, 2 * P, 0.0), pi(1, 2 * P, 0.0);
  for (std::size_t k = 0; k < P; ++k) {
    mu(0, k) = 1.0 / static_cast<double>(P);
    pi(0, P + k) = 1.0 / static_cast<double>(P);
  }
  const Table star = tables.front();
  FiniteFunctionClass cls(std::move(tables), 0);
  return TransferCase{"halfspace_sphere", CBInstance({1.0}, star, RewardLaw::bernoulli),
                      std::move(cls), TabularPolicy(std::move(mu)), TabularPolicy(std::move(pi))};
}

TransferCase threshold_case(std::size_t G, double behavior_exponent) {
  if (G < 1000 || G % 1000 != 0) throw ConfigError("threshold_case: G must be a positive multiple of 1000");
  if (!(behavior_exponent > -1.0)) throw ConfigError("threshold_case: exponent must exceed -1");
  const double Gd = static_cast<double>(G);
  std::vector<double> a(G);
  for (std::size_t k = 0; k < G; ++k) a[k] = -1.0 + (static_cast<double>(k) + 0.5) * (2.0 / Gd);

  Table mu(1, G), pi(1, G, 1.0 / Gd);
  double z = 0.0;
  for (std::size_t k = 0; k < G; ++k) {
    mu(0, k) = a[k] > 0.0 ? std::pow(a[k], behavior_exponent) : 1.0;
    z += mu(0, k);
  }
  for (std::size_t k = 0; k < G; ++k) mu(0, k) /= z;
  // Renormalize exactly enough to pass the simplex check.
  {
    double s = 0.0;
    for (std::size_t k = 0; k < G; ++k) s += mu(0, k);
    for (std::size_t k = 0; k < G; ++k) mu(0, k) /= s;
  }

  const std::size_t half = G / 2, stride = G / 1000;
  std::vector<Table> tables;
  std::optional<std::size_t> star;
  for (std::size_t j = 0; j <= G; ++j) {
    const std::size_t off = j > half ? j - half : half - j;
    if (off > 50 && j % stride != 0) continue;
    const double t = -1.0 + 2.0 * static_cast<double>(j) / Gd;
    Table f(1, G);
    for (std::size_t k = 0; k < G; ++k) f(0, k) = a[k] >= t ? 1.0 : 0.0;
    if (j == half) star = tables.size();
    tables.push_back(std::move(f));
  }
  const Table star_table = tables[*star];
  FiniteFunctionClass cls(std::move(tables), star);
  return TransferCase{"threshold", CBInstance({1.0}, star_table, RewardLaw::bernoulli),
                      std::move(cls), TabularPolicy(std::move(mu)), TabularPolicy(std::move(pi))};
}

TransferCase bernoulli_gap_case(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("bernoulli_gap_case: p must lie in (0,1)");
  Table star(2, 2, 0.5), other(2, 2, 0.5);
  star(0, 0) = 1.0;
  other(0, 0) = 0.0;
  FiniteFunctionClass cls({star, other}, 0);
  return TransferCase{"bernoulli_gap", CBInstance({p, 1.0 - p}, star, RewardLaw::bernoulli),
                      std::move(cls), TabularPolicy::constant_action(2, 2, 0),
                      TabularPolicy::constant_action(2, 2, 0)};
}

}  // namespace ofdm
