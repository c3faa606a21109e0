#include "ofdm/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include "ofdm/error.hpp"
#include "ofdm/fnclass.hpp"
#include "ofdm/rng.hpp"

namespace ofdm {

namespace {

constexpr double kLossSlack = 1e-12;

}  // namespace

MDPInstance::MDPInstance(std::size_t states, std::size_t actions, std::size_t horizon,
                         std::vector<std::size_t> next, std::vector<double> mean_reward,
                         std::vector<double> initial, RewardLaw law)
    : S_(states),
      K_(actions),
      H_(horizon),
      next_(std::move(next)),
      mean_reward_(std::move(mean_reward)),
      initial_(std::move(initial)),
      law_(law) {
  if (S_ == 0 || K_ == 0 || H_ == 0) throw ConfigError("mdp: empty dimensions");
  const std::size_t cells = H_ * S_ * K_;
  if (next_.size() != cells || mean_reward_.size() != cells) {
    throw ConfigError("mdp: transition or reward table has the wrong size");
  }
  for (std::size_t s : next_) {
    if (s >= S_) throw ConfigError("mdp: transition target out of range");
  }
  for (double r : mean_reward_) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("mdp: mean reward outside [0,1]");
  }
  if (initial_.size() != S_) throw ConfigError("mdp: initial distribution has the wrong size");
  double sum = 0.0;
  for (double p : initial_) {
    if (!(p >= 0.0)) throw ConfigError("mdp: negative initial probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("mdp: initial distribution does not sum to 1");
}

MDPPolicy MDPPolicy::uniform(std::size_t states, std::size_t actions, std::size_t horizon) {
  return MDPPolicy{std::vector<TabularPolicy>(horizon, TabularPolicy::uniform(states, actions))};
}

MDPPolicy MDPPolicy::constant_action(std::size_t states, std::size_t actions, std::size_t horizon,
                                     std::size_t action) {
  return MDPPolicy{std::vector<TabularPolicy>(
      horizon, TabularPolicy::constant_action(states, actions, action))};
}

MDPFunctionClass::MDPFunctionClass(std::vector<std::vector<Table>> per_step,
                                   std::optional<std::vector<std::size_t>> star)
    : per_step_(std::move(per_step)), star_(std::move(star)) {
  if (per_step_.empty()) throw ConfigError("mdp class: no steps");
  const std::size_t H = per_step_.size();
  const Table* shape = nullptr;
  for (std::size_t h = 0; h < H; ++h) {
    if (per_step_[h].empty()) throw ConfigError("mdp class: empty step class");
    const double hi = static_cast<double>(H - h);
    for (const auto& t : per_step_[h]) {
      if (shape == nullptr) shape = &t;
      if (!t.same_shape(*shape)) throw ConfigError("mdp class: tables differ in shape");
      for (double v : t.values()) {
        if (!(v >= 0.0 && v <= hi)) throw ConfigError("mdp class: entry outside [0, H - h]");
      }
    }
  }
  if (star_) {
    if (star_->size() != H) throw ConfigError("mdp class: star tuple has the wrong length");
    for (std::size_t h = 0; h < H; ++h) {
      if ((*star_)[h] >= per_step_[h].size()) throw ConfigError("mdp class: star index out of range");
    }
  }
}

double MDPFunctionClass::joint_size() const {
  double p = 1.0;
  for (const auto& s : per_step_) p *= static_cast<double>(s.size());
  return p;
}

namespace {

void check_policy(const MDPInstance& mdp, const MDPPolicy& pi) {
  if (pi.horizon() != mdp.horizon()) throw ConfigError("mdp policy horizon does not match");
  for (const auto& p : pi.steps) {
    if (p.contexts() != mdp.states() || p.actions() != mdp.actions()) {
      throw ConfigError("mdp policy shape does not match");
    }
  }
}

}  // namespace

TrajectoryDataset mdp_sample(const MDPInstance& mdp, const MDPPolicy& mu, std::size_t n,
                             std::uint64_t seed) {
  check_policy(mdp, mu);
  if (n == 0) throw ConfigError("mdp_sample: n must be at least 1");
  Rng rng(seed);
  TrajectoryDataset data;
  data.horizon = mdp.horizon();
  data.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Transition> traj;
    traj.reserve(mdp.horizon());
    std::size_t s = rng.categorical(mdp.initial());
    for (std::size_t h = 0; h < mdp.horizon(); ++h) {
      const std::size_t a = rng.categorical(mu.steps[h].probs().row(s));
      const double mean = mdp.reward(h, s, a);
      const double r =
          mdp.law() == RewardLaw::bernoulli ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean;
      const std::size_t s2 = mdp.next(h, s, a);
      traj.push_back({s, a, r, s2});
      s = s2;
    }
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

double value_at(const Table& f, const TabularPolicy& pi, std::size_t s) {
  double v = 0.0;
  for (std::size_t a = 0; a < f.cols(); ++a) v += pi(s, a) * f(s, a);
  return v;
}

double bellman_loss(const Table& f_h, const Table* f_next, const TabularPolicy* pi_next,
                    const Transition& step) {
  if (step.state >= f_h.rows() || step.action >= f_h.cols()) {
    throw ConfigError("bellman_loss: index out of range");
  }
  double target = step.reward;
  if (f_next != nullptr) {
    if (pi_next == nullptr) throw ConfigError("bellman_loss: next-step policy missing");
    if (step.next_state >= f_next->rows()) throw ConfigError("bellman_loss: index out of range");
    target += value_at(*f_next, *pi_next, step.next_state);
  }
  const double e = f_h(step.state, step.action) - target;
  return e * e;
}

Table bellman_backup(const MDPInstance& mdp, std::size_t h, const Table* f_next,
                     const TabularPolicy* pi_next) {
  Table out(mdp.states(), mdp.actions());
  for (std::size_t s = 0; s < mdp.states(); ++s) {
    for (std::size_t a = 0; a < mdp.actions(); ++a) {
      double v = mdp.reward(h, s, a);
      if (f_next != nullptr) v += value_at(*f_next, *pi_next, mdp.next(h, s, a));
      out(s, a) = v;
    }
  }
  return out;
}

std::vector<Table> q_values(const MDPInstance& mdp, const MDPPolicy& pi) {
  check_policy(mdp, pi);
  const std::size_t H = mdp.horizon();
  std::vector<Table> q(H);
  for (std::size_t k = 0; k < H; ++k) {
    const std::size_t h = H - 1 - k;
    if (h + 1 == H) {
      q[h] = bellman_backup(mdp, h, nullptr, nullptr);
    } else {
      q[h] = bellman_backup(mdp, h, &q[h + 1], &pi.steps[h + 1]);
    }
  }
  return q;
}

double mdp_policy_value(const MDPInstance& mdp, const MDPPolicy& pi) {
  const auto q = q_values(mdp, pi);
  double v = 0.0;
  for (std::size_t s = 0; s < mdp.states(); ++s) {
    if (mdp.initial()[s] == 0.0) continue;
    v += mdp.initial()[s] * value_at(q[0], pi.steps[0], s);
  }
  return v;
}

double mdp_policy_value(const MDPInstance& mdp, const MDPRandomizedPolicy& pi) {
  if (pi.iterates.empty()) throw ConfigError("mdp randomized policy: no iterates");
  double v = 0.0;
  for (const auto& p : pi.iterates) v += mdp_policy_value(mdp, p);
  return v / static_cast<double>(pi.iterates.size());
}

MDPPolicy mdp_optimal_policy(const MDPInstance& mdp) {
  const std::size_t H = mdp.horizon();
  std::vector<std::vector<std::size_t>> best(H, std::vector<std::size_t>(mdp.states()));
  std::vector<double> v_next(mdp.states(), 0.0);
  for (std::size_t k = 0; k < H; ++k) {
    const std::size_t h = H - 1 - k;
    std::vector<double> v(mdp.states());
    for (std::size_t s = 0; s < mdp.states(); ++s) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mdp.actions(); ++a) {
        const double q = mdp.reward(h, s, a) + v_next[mdp.next(h, s, a)];
        if (q > top) {
          top = q;
          best[h][s] = a;
        }
      }
      v[s] = top;
    }
    v_next = std::move(v);
  }
  MDPPolicy out;
  for (std::size_t h = 0; h < H; ++h) {
    out.steps.push_back(TabularPolicy::deterministic(best[h], mdp.actions()));
  }
  return out;
}

std::vector<Table> occupancy(const MDPInstance& mdp, const MDPPolicy& pi) {
  check_policy(mdp, pi);
  std::vector<Table> d;
  std::vector<double> state_mass = mdp.initial();
  for (std::size_t h = 0; h < mdp.horizon(); ++h) {
    Table occ(mdp.states(), mdp.actions(), 0.0);
    std::vector<double> next_mass(mdp.states(), 0.0);
    for (std::size_t s = 0; s < mdp.states(); ++s) {
      if (state_mass[s] == 0.0) continue;
      for (std::size_t a = 0; a < mdp.actions(); ++a) {
        const double m = state_mass[s] * pi.steps[h](s, a);
        occ(s, a) = m;
        next_mass[mdp.next(h, s, a)] += m;
      }
    }
    d.push_back(std::move(occ));
    state_mass = std::move(next_mass);
  }
  return d;
}

namespace {

// Sufficient statistics of one step of the data, grouped by (s, a, s').
struct StepGroups {
  struct Group {
    std::size_t cell;  // s * K + a
    std::size_t next_state;
    double count;
    double reward_sum;
  };
  std::vector<Group> groups;
  std::vector<std::size_t> cells;    // distinct visited cells
  std::vector<double> cell_count;    // aligned with cells
  std::vector<double> cell_reward;   // aligned with cells
  std::vector<std::size_t> group_slot;  // group -> position in cells
  double reward_sq_total = 0.0;
};

struct DataSummary {
  std::size_t n = 0;
  std::vector<StepGroups> steps;
  std::vector<double> initial_weights;
};

DataSummary summarize(const TrajectoryDataset& data, std::size_t H, std::size_t S, std::size_t K) {
  if (data.n() == 0) throw ConfigError("mdp: empty dataset");
  if (data.horizon != H) throw ConfigError("mdp: dataset horizon does not match class");
  DataSummary out;
  out.n = data.n();
  out.steps.resize(H);
  out.initial_weights.assign(S, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> acc;
    double sq = 0.0;
    for (const auto& traj : data.trajectories) {
      if (traj.size() != H) throw ConfigError("mdp: trajectory length does not match horizon");
      const auto& t = traj[h];
      if (t.state >= S || t.action >= K || t.next_state >= S) {
        throw ConfigError("mdp: transition index out of range");
      }
      auto& slot = acc[{t.state * K + t.action, t.next_state}];
      slot.first += 1.0;
      slot.second += t.reward;
      sq += t.reward * t.reward;
    }
    auto& sg = out.steps[h];
    sg.reward_sq_total = sq;
    std::map<std::size_t, std::size_t> cell_pos;
    for (const auto& [key, val] : acc) {
      auto [it, fresh] = cell_pos.emplace(key.first, sg.cells.size());
      if (fresh) {
        sg.cells.push_back(key.first);
        sg.cell_count.push_back(0.0);
        sg.cell_reward.push_back(0.0);
      }
      sg.cell_count[it->second] += val.first;
      sg.cell_reward[it->second] += val.second;
      sg.groups.push_back({key.first, key.second, val.first, val.second});
      sg.group_slot.push_back(it->second);
    }
  }
  for (const auto& traj : data.trajectories) out.initial_weights[traj[0].state] += 1.0;
  for (double& w : out.initial_weights) w /= static_cast<double>(out.n);
  return out;
}

// excess[g][f'] = l_h(g, f') - min_g' l_h(g', f') for a fixed next-step
// policy, with l_h the n-normalized step loss. At the last step the second
// index has a single entry standing for f_{H} = 0.
using ExcessMatrix = std::vector<std::vector<double>>;

ExcessMatrix step_excess(const StepGroups& sg, std::size_t n, const std::vector<Table>& cur,
                         const std::vector<Table>* next_class, const TabularPolicy* pi_next) {
  const std::size_t nf = next_class ? next_class->size() : 1;
  const std::size_t nc = sg.cells.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // A(g) = sum_cells (c g^2 - 2 g R) + Q
  std::vector<std::vector<double>> gvals(cur.size(), std::vector<double>(nc));
  std::vector<double> A(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) {
    double a = sg.reward_sq_total;
    for (std::size_t c = 0; c < nc; ++c) {
      const double g = cur[i].values()[sg.cells[c]];
      gvals[i][c] = g;
      a += sg.cell_count[c] * g * g - 2.0 * g * sg.cell_reward[c];
    }
    A[i] = a;
  }
  ExcessMatrix ex(cur.size(), std::vector<double>(nf));
  std::vector<double> w(nc);
  for (std::size_t j = 0; j < nf; ++j) {
    // B(f') = sum_groups (2 R v' + c v'^2), w(cell) = sum_{s'} c v'(s')
    double B = 0.0;
    std::fill(w.begin(), w.end(), 0.0);
    if (next_class) {
      for (std::size_t k = 0; k < sg.groups.size(); ++k) {
        const auto& gr = sg.groups[k];
        const double v = value_at((*next_class)[j], *pi_next, gr.next_state);
        B += 2.0 * gr.reward_sum * v + gr.count * v * v;
        w[sg.group_slot[k]] += gr.count * v;
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double cross = 0.0;
      for (std::size_t c = 0; c < nc; ++c) cross += gvals[i][c] * w[c];
      const double l = std::max(0.0, (A[i] + B - 2.0 * cross) * inv_n);
      ex[i][j] = l;
      best = std::min(best, l);
    }
    for (std::size_t i = 0; i < cur.size(); ++i) ex[i][j] -= best;
  }
  return ex;
}

std::vector<ExcessMatrix> all_excess(const DataSummary& sum, const MDPFunctionClass& cls,
                                     const MDPPolicy& pi) {
  const std::size_t H = cls.horizon();
  std::vector<ExcessMatrix> out(H);
  for (std::size_t h = 0; h < H; ++h) {
    if (h + 1 < H) {
      out[h] = step_excess(sum.steps[h], sum.n, cls.step(h), &cls.step(h + 1), &pi.steps[h + 1]);
    } else {
      out[h] = step_excess(sum.steps[h], sum.n, cls.step(h), nullptr, nullptr);
    }
  }
  return out;
}

// W[h][i]: least right-nested cost over completions starting at f_h = i.
std::vector<std::vector<double>> chain_costs(const std::vector<ExcessMatrix>& ex) {
  const std::size_t H = ex.size();
  std::vector<std::vector<double>> W(H);
  W[H - 1].resize(ex[H - 1].size());
  for (std::size_t i = 0; i < ex[H - 1].size(); ++i) W[H - 1][i] = ex[H - 1][i][0];
  for (std::size_t k = 1; k < H; ++k) {
    const std::size_t h = H - 1 - k;
    W[h].assign(ex[h].size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ex[h].size(); ++i) {
      for (std::size_t j = 0; j < W[h + 1].size(); ++j) {
        W[h][i] = std::min(W[h][i], ex[h][i][j] + W[h + 1][j]);
      }
    }
  }
  return W;
}

// Right-nested tuple cost E_0 + (E_1 + (... + E_{H-1})).
double tuple_cost(const std::vector<ExcessMatrix>& ex, const std::vector<std::size_t>& t) {
  const std::size_t H = ex.size();
  double c = ex[H - 1][t[H - 1]][0];
  for (std::size_t k = 1; k < H; ++k) {
    const std::size_t h = H - 1 - k;
    c = ex[h][t[h]][t[h + 1]] + c;
  }
  return c;
}

template <class Visit>
void for_each_tuple(const MDPFunctionClass& cls, Visit&& visit) {
  const std::size_t H = cls.horizon();
  std::vector<std::size_t> t(H, 0);
  while (true) {
    visit(t);
    std::size_t h = H;
    while (h > 0) {
      --h;
      if (++t[h] < cls.size(h)) break;
      t[h] = 0;
      if (h == 0) return;
    }
  }
}

MDPSolver resolve(const MDPFunctionClass& cls, MDPSolver solver) {
  if (solver == MDPSolver::automatic) {
    return cls.joint_size() <= kJointGuard ? MDPSolver::joint : MDPSolver::chain;
  }
  if (solver == MDPSolver::joint && cls.joint_size() > kJointGuard) {
    throw ConfigError("mdp version space: joint class exceeds the enumeration guard; use the chain solver");
  }
  return solver;
}

void check_class(const MDPFunctionClass& cls, std::size_t& S, std::size_t& K) {
  S = cls.step(0).front().rows();
  K = cls.step(0).front().cols();
}

}  // namespace

MDPVersionSpace mdp_version_space(const MDPFunctionClass& cls, const TrajectoryDataset& data,
                                  const MDPPolicy& pi, double beta, MDPSolver solver) {
  if (!(beta >= 0.0)) throw ConfigError("mdp version space: beta must be nonnegative");
  std::size_t S = 0, K = 0;
  check_class(cls, S, K);
  if (pi.horizon() != cls.horizon()) throw ConfigError("mdp version space: policy horizon mismatch");
  const auto sum = summarize(data, cls.horizon(), S, K);
  const auto ex = all_excess(sum, cls, pi);
  MDPVersionSpace vs;
  vs.beta = beta;
  vs.solver = resolve(cls, solver);
  if (vs.solver == MDPSolver::chain) {
    vs.first_step_cost = chain_costs(ex)[0];
    return vs;
  }
  vs.first_step_cost.assign(cls.size(0), std::numeric_limits<double>::infinity());
  for_each_tuple(cls, [&](const std::vector<std::size_t>& t) {
    const double c = tuple_cost(ex, t);
    vs.first_step_cost[t[0]] = std::min(vs.first_step_cost[t[0]], c);
    if (c <= beta + kLossSlack) vs.members.push_back(t);
  });
  return vs;
}

MDPHedgeResult ofdm_hedge_mdp(const TrajectoryDataset& data, const MDPFunctionClass& cls,
                              double beta, double eta, std::size_t T, std::size_t K,
                              MDPSolver solver) {
  if (T == 0) throw ConfigError("ofdm_hedge_mdp: T must be at least 1");
  if (!(beta >= 0.0) || !(eta >= 0.0)) throw ConfigError("ofdm_hedge_mdp: beta and eta must be nonnegative");
  std::size_t S = 0, Kc = 0;
  check_class(cls, S, Kc);
  if (Kc != K) throw ConfigError("ofdm_hedge_mdp: action count does not match class");
  const std::size_t H = cls.horizon();
  const auto sum = summarize(data, H, S, K);

  MDPHedgeResult res;
  res.trace.beta = beta;
  res.trace.eta = eta;
  res.trace.T = T;
  res.trace.solver = resolve(cls, solver);

  std::vector<Table> logw(H, Table(S, K, 0.0));
  MDPPolicy pi = MDPPolicy::uniform(S, K, H);

  for (std::size_t t = 0; t < T; ++t) {
    const auto ex = all_excess(sum, cls, pi);
    std::vector<double> objective(cls.size(0));
    for (std::size_t i = 0; i < cls.size(0); ++i) {
      objective[i] = plug_in_value(cls.step(0)[i], pi.steps[0], sum.initial_weights);
    }

    std::vector<std::size_t> chosen(H, 0);
    double chosen_obj = std::numeric_limits<double>::infinity();
    double chosen_cost = std::numeric_limits<double>::infinity();
    bool found = false;
    if (res.trace.solver == MDPSolver::chain) {
      const auto W = chain_costs(ex);
      for (std::size_t i = 0; i < cls.size(0); ++i) {
        if (!(W[0][i] <= beta + kLossSlack)) continue;
        if (!found || objective[i] < chosen_obj ||
            (objective[i] == chosen_obj && W[0][i] < chosen_cost)) {
          found = true;
          chosen_obj = objective[i];
          chosen_cost = W[0][i];
          chosen[0] = i;
        }
      }
      for (std::size_t h = 0; h + 1 < H; ++h) {
        const double target = W[h][chosen[h]];
        for (std::size_t j = 0; j < W[h + 1].size(); ++j) {
          if (ex[h][chosen[h]][j] + W[h + 1][j] == target) {
            chosen[h + 1] = j;
            break;
          }
        }
      }
    } else {
      for_each_tuple(cls, [&](const std::vector<std::size_t>& tup) {
        const double c = tuple_cost(ex, tup);
        if (!(c <= beta + kLossSlack)) return;
        const double o = objective[tup[0]];
        if (!found || o < chosen_obj || (o == chosen_obj && c < chosen_cost)) {
          found = true;
          chosen_obj = o;
          chosen_cost = c;
          chosen = tup;
        }
      });
    }
    if (!found) throw ConfigError("ofdm_hedge_mdp: empty version space");

    res.trace.selected.push_back(chosen);
    res.trace.objective.push_back(chosen_obj);
    res.trace.policies.push_back(pi);

    for (std::size_t h = 0; h < H; ++h) {
      const Table& f = cls.step(h)[chosen[h]];
      Table probs(S, K);
      for (std::size_t s = 0; s < S; ++s) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < K; ++a) {
          logw[h](s, a) += eta * f(s, a);
          top = std::max(top, logw[h](s, a));
        }
        double z = 0.0;
        for (std::size_t a = 0; a < K; ++a) {
          probs(s, a) = std::exp(logw[h](s, a) - top);
          z += probs(s, a);
        }
        for (std::size_t a = 0; a < K; ++a) probs(s, a) /= z;
      }
      pi.steps[h] = TabularPolicy(std::move(probs));
    }
  }
  res.policy.iterates = res.trace.policies;
  return res;
}

MDPAudit mdp_hedge_audit(const MDPHedgeTrace& trace, const MDPFunctionClass& cls,
                         const MDPPolicy& comparator, double b) {
  MDPAudit out;
  const std::size_t T = trace.policies.size();
  if (T == 0) throw ConfigError("mdp_hedge_audit: empty trace");
  const std::size_t H = cls.horizon();
  const std::size_t S = trace.policies.front().steps.front().contexts();
  const std::size_t K = trace.policies.front().steps.front().actions();
  out.rhs = 4.0 * b * std::sqrt(static_cast<double>(T) * std::log(static_cast<double>(K)));
  out.lhs = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const Table& f = cls.step(h)[trace.selected[t][h]];
        acc += value_at(f, comparator.steps[h], s) - value_at(f, trace.policies[t].steps[h], s);
      }
      out.lhs = std::max(out.lhs, acc);
    }
  }
  return out;
}

double eta_schedule_mdp(std::size_t K, std::size_t T, double b) {
  if (!(b > 0.0)) throw ParameterError("eta_schedule_mdp: b must be positive");
  if (K < 1 || T < 1) throw ParameterError("eta_schedule_mdp: K and T must be at least 1");
  const double lnK = std::log(static_cast<double>(K));
  if (static_cast<double>(T) < lnK / (std::numbers::e - 2.0)) {
    throw ParameterError("eta_schedule_mdp: T must be at least ln K / (e - 2)");
  }
  return std::sqrt(lnK / (4.0 * (std::numbers::e - 2.0) * b * b * static_cast<double>(T)));
}

MDPTransferEstimate mdp_transfer_factor(const MDPFunctionClass& cls, const MDPInstance& mdp,
                                        const MDPPolicy& mu, const MDPPolicy& pi, double rho) {
  if (!(rho >= 0.0)) throw ConfigError("mdp_transfer_factor: rho must be nonnegative");
  if (cls.horizon() != mdp.horizon()) throw ConfigError("mdp_transfer_factor: horizon mismatch");
  const auto dmu = occupancy(mdp, mu);
  const auto dpi = occupancy(mdp, pi);
  MDPTransferEstimate out;
  for (std::size_t h = 0; h < cls.horizon(); ++h) {
    const auto& F = cls.step(h);
    TransferEstimate est;
    est.rho = rho;
    const auto wm = dmu[h].values();
    const auto wp = dpi[h].values();
    for (std::size_t i = 0; i < F.size(); ++i) {
      const auto fi = F[i].values();
      for (std::size_t j = i + 1; j < F.size(); ++j) {
        const auto fj = F[j].values();
        double num = 0.0, den = 0.0;
        for (std::size_t c = 0; c < fi.size(); ++c) {
          const double d = fi[c] - fj[c];
          num += wp[c] * d;
          den += wm[c] * d * d;
        }
        const double r = transfer_ratio(std::abs(num), 2.0 * rho, den);
        if (r > est.factor) {
          est.factor = r;
          est.witness = i * F.size() + j;
        }
      }
    }
    out.factor = std::max(out.factor, est.factor);
    out.per_step.push_back(est);
  }
  return out;
}

double mdp_beta_schedule(const std::vector<double>& per_step_cover_counts, std::size_t n,
                         std::size_t H, double eps, double delta, double c) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("mdp_beta_schedule: delta must lie in (0,1)");
  if (!(c > 0.0)) throw ConfigError("mdp_beta_schedule: c must be positive");
  if (n == 0 || H == 0 || per_step_cover_counts.empty()) {
    throw ConfigError("mdp_beta_schedule: n, H and cover counts must be nonempty");
  }
  double d = 0.0;
  for (double N : per_step_cover_counts) {
    if (!(N >= 1.0)) throw ConfigError("mdp_beta_schedule: cover counts must be at least 1");
    d = std::max(d, std::log(N));
  }
  const double Hd = static_cast<double>(H);
  return c * (Hd * Hd * eps +
              Hd * Hd * Hd * (d + std::log(Hd / delta)) / static_cast<double>(n));
}

std::vector<double> mdp_cover_counts(const MDPFunctionClass& cls) {
  std::vector<double> out;
  for (std::size_t h = 0; h < cls.horizon(); ++h) {
    const auto& F = cls.step(h);
    std::map<std::vector<double>, bool> whole;
    const std::size_t S = F.front().rows(), K = F.front().cols();
    std::vector<std::map<std::vector<double>, bool>> slices(K);
    for (const auto& t : F) {
      whole.emplace(std::vector<double>(t.values().begin(), t.values().end()), true);
      for (std::size_t a = 0; a < K; ++a) {
        std::vector<double> col(S);
        for (std::size_t s = 0; s < S; ++s) col[s] = t(s, a);
        slices[a].emplace(std::move(col), true);
      }
    }
    std::vector<std::uint64_t> counts;
    for (const auto& m : slices) counts.push_back(m.size());
    const auto prod = product_cover_bound(counts);
    out.push_back(std::max(static_cast<double>(whole.size()), static_cast<double>(prod.value)));
  }
  return out;
}

}  // namespace ofdm
