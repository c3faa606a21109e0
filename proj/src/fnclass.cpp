#include "ofdm/fnclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ofdm/error.hpp"

namespace ofdm {

namespace {

// Absolute slack on version-space comparisons so that losses which are equal
// in exact arithmetic are not split by rounding.
constexpr double kLossSlack = 1e-12;

}  // namespace

FiniteFunctionClass::FiniteFunctionClass(std::vector<Table> tables,
                                         std::optional<std::size_t> star_index,
                                         std::vector<std::string> labels)
    : tables_(std::move(tables)), star_index_(star_index), labels_(std::move(labels)) {
  if (tables_.empty()) throw ConfigError("function class: empty");
  for (const auto& t : tables_) {
    if (!t.same_shape(tables_.front()) || t.empty()) {
      throw ConfigError("function class: tables differ in shape");
    }
    for (double v : t.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("function class: entry outside [0,1]");
    }
  }
  if (star_index_ && *star_index_ >= tables_.size()) {
    throw ConfigError("function class: star index out of range");
  }
  if (!labels_.empty() && labels_.size() != tables_.size()) {
    throw ConfigError("function class: label count does not match class size");
  }
}

DatasetStats::DatasetStats(const OfflineDataset& data, std::size_t contexts, std::size_t actions)
    : n(data.n()),
      count(contexts, actions, 0.0),
      reward_sum(contexts, actions, 0.0),
      reward_sq_sum(contexts, actions, 0.0),
      context_weights(contexts, 0.0) {
  if (n == 0) throw ConfigError("dataset is empty");
  data.validate(contexts, actions);
  for (const auto& r : data.records) {
    count(r.context, r.action) += 1.0;
    reward_sum(r.context, r.action) += r.reward;
    reward_sq_sum(r.context, r.action) += r.reward * r.reward;
    context_weights[r.context] += 1.0;
  }
  for (double& w : context_weights) w /= static_cast<double>(n);
}

double DatasetStats::sq_loss(const Table& f) const {
  double total = 0.0;
  const auto c = count.values();
  const auto s = reward_sum.values();
  const auto q = reward_sq_sum.values();
  const auto v = f.values();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    total += c[i] * v[i] * v[i] - 2.0 * v[i] * s[i] + q[i];
  }
  return std::max(0.0, total / static_cast<double>(n));
}

double empirical_sq_loss(const Table& f, const OfflineDataset& data) {
  if (data.n() == 0) throw ConfigError("empirical_sq_loss: empty dataset");
  data.validate(f.rows(), f.cols());
  double total = 0.0;
  for (const auto& r : data.records) {
    const double e = f(r.context, r.action) - r.reward;
    total += e * e;
  }
  return total / static_cast<double>(data.n());
}

std::vector<double> empirical_losses(const FiniteFunctionClass& cls, const OfflineDataset& data) {
  DatasetStats stats(data, cls.contexts(), cls.actions());
  std::vector<double> out(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) out[i] = stats.sq_loss(cls[i]);
  return out;
}

std::size_t erm(const FiniteFunctionClass& cls, const OfflineDataset& data) {
  const auto losses = empirical_losses(cls, data);
  return static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
}

VersionSpace version_space_from_losses(std::span<const double> losses, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("version_space: beta must be nonnegative");
  VersionSpace vs;
  vs.beta = beta;
  vs.erm_index =
      static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
  const double floor = losses[vs.erm_index];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (losses[i] - floor <= beta + kLossSlack) vs.member_indices.push_back(i);
  }
  return vs;
}

VersionSpace version_space(const FiniteFunctionClass& cls, const OfflineDataset& data, double beta) {
  const auto losses = empirical_losses(cls, data);
  return version_space_from_losses(losses, beta);
}

double plug_in_value(const Table& f, const TabularPolicy& pi, std::span<const double> context_weights) {
  return expect_under(context_weights, pi, f);
}

std::size_t pessimistic_select(const FiniteFunctionClass& cls, const VersionSpace& vs,
                               const TabularPolicy& pi, std::span<const double> context_weights) {
  if (pi.contexts() != cls.contexts() || pi.actions() != cls.actions()) {
    throw ConfigError("pessimistic_select: policy shape does not match class");
  }
  std::size_t best = vs.member_indices.front();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i : vs.member_indices) {
    const double v = plug_in_value(cls[i], pi, context_weights);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

std::size_t pessimistic_select(const FiniteFunctionClass& cls, const OfflineDataset& data,
                               double beta, const TabularPolicy& pi) {
  DatasetStats stats(data, cls.contexts(), cls.actions());
  std::vector<double> losses(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) losses[i] = stats.sq_loss(cls[i]);
  const auto vs = version_space_from_losses(losses, beta);
  return pessimistic_select(cls, vs, pi, stats.context_weights);
}

namespace {

double mean_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Greedy cover at radius t: the lowest-index uncovered vector becomes a center.
std::size_t greedy_cover(const std::vector<std::vector<double>>& dist, double t) {
  const std::size_t m = dist.size();
  std::vector<bool> covered(m, false);
  std::size_t centers = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (covered[i]) continue;
    ++centers;
    for (std::size_t j = i; j < m; ++j) {
      if (!covered[j] && dist[i][j] <= t) covered[j] = true;
    }
  }
  return centers;
}

}  // namespace

std::size_t covering_number_l1(const std::vector<std::vector<double>>& vectors, double eps) {
  if (vectors.empty()) throw ConfigError("covering_number_l1: no vectors");
  if (!(eps >= 0.0)) throw ConfigError("covering_number_l1: eps must be nonnegative");
  const std::size_t len = vectors.front().size();
  if (len == 0) throw ConfigError("covering_number_l1: empty vectors");
  for (const auto& v : vectors) {
    if (v.size() != len) throw ConfigError("covering_number_l1: vectors differ in length");
  }

  // Deduplicate first; exact at eps = 0.
  std::vector<std::vector<double>> uniq;
  {
    std::map<std::vector<double>, bool> seen;
    for (const auto& v : vectors) {
      if (seen.emplace(v, true).second) uniq.push_back(v);
    }
  }
  if (eps == 0.0 || uniq.size() == 1) return uniq.size();

  const std::size_t m = uniq.size();
  std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
  std::vector<double> thresholds{0.0};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      dist[i][j] = dist[j][i] = mean_l1(uniq[i], uniq[j]);
      if (dist[i][j] <= eps) thresholds.push_back(dist[i][j]);
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  // Minimum over every radius t <= eps at which the cover structure can
  // change; this keeps the result nonincreasing in eps.
  std::size_t best = m;
  for (double t : thresholds) best = std::min(best, greedy_cover(dist, t));
  return best;
}

std::vector<std::vector<double>> restrict_to_sample(const FiniteFunctionClass& cls,
                                                    const OfflineDataset& data, std::size_t action) {
  if (action >= cls.actions()) throw ConfigError("restrict_to_sample: action out of range");
  data.validate(cls.contexts(), cls.actions());
  std::vector<std::vector<double>> out(cls.size(), std::vector<double>(data.n()));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    for (std::size_t t = 0; t < data.n(); ++t) out[i][t] = cls[i](data.records[t].context, action);
  }
  return out;
}

std::vector<std::vector<double>> restrict_to_sample(const FiniteFunctionClass& cls,
                                                    const OfflineDataset& data,
                                                    const TabularPolicy& pi) {
  data.validate(cls.contexts(), cls.actions());
  std::vector<std::vector<double>> out(cls.size(), std::vector<double>(data.n()));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    for (std::size_t t = 0; t < data.n(); ++t) {
      const std::size_t x = data.records[t].context;
      double v = 0.0;
      for (std::size_t a = 0; a < cls.actions(); ++a) v += pi(x, a) * cls[i](x, a);
      out[i][t] = v;
    }
  }
  return out;
}

CoverProduct product_cover_bound(std::span<const std::uint64_t> per_action_counts) {
  CoverProduct out;
  for (std::uint64_t c : per_action_counts) {
    if (c == 0) throw ConfigError("product_cover_bound: counts must be at least 1");
    if (out.saturated) continue;
    if (out.value > kCoverCap / c) {
      out.value = kCoverCap;
      out.saturated = true;
    } else {
      out.value *= c;
      if (out.value > kCoverCap) {
        out.value = kCoverCap;
        out.saturated = true;
      }
    }
  }
  return out;
}

double beta_schedule(double cover_count, std::size_t n, double eps, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("beta_schedule: delta must lie in (0,1)");
  if (n == 0) throw ConfigError("beta_schedule: n must be at least 1");
  if (!(eps >= 0.0)) throw ConfigError("beta_schedule: eps must be nonnegative");
  if (!(cover_count >= 1.0)) throw ConfigError("beta_schedule: cover count must be at least 1");
  return 32.0 * eps +
         (4.0 * std::log(cover_count) + 24.0 * std::log(12.0 / delta)) / static_cast<double>(n);
}

}  // namespace ofdm
