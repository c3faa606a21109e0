#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ofdm/core.hpp"
#include "ofdm/table.hpp"

namespace ofdm {

class FiniteFunctionClass {
 public:
  FiniteFunctionClass(std::vector<Table> tables, std::optional<std::size_t> star_index = std::nullopt,
                      std::vector<std::string> labels = {});

  std::size_t size() const { return tables_.size(); }
  std::size_t contexts() const { return tables_.front().rows(); }
  std::size_t actions() const { return tables_.front().cols(); }
  const Table& operator[](std::size_t i) const { return tables_[i]; }
  const std::vector<Table>& tables() const { return tables_; }
  std::optional<std::size_t> star_index() const { return star_index_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<Table> tables_;
  std::optional<std::size_t> star_index_;
  std::vector<std::string> labels_;
};

// Sufficient statistics of a dataset for squared-loss evaluation: per (x, a)
// visit counts, reward sums and squared-reward sums, plus the empirical
// context distribution.
struct DatasetStats {
  std::size_t n = 0;
  Table count;
  Table reward_sum;
  Table reward_sq_sum;
  std::vector<double> context_weights;

  DatasetStats(const OfflineDataset& data, std::size_t contexts, std::size_t actions);
  // (1/n) sum_i (f(x_i,a_i) - r_i)^2 from the statistics.
  double sq_loss(const Table& f) const;
};

double empirical_sq_loss(const Table& f, const OfflineDataset& data);
std::vector<double> empirical_losses(const FiniteFunctionClass& cls, const OfflineDataset& data);
std::size_t erm(const FiniteFunctionClass& cls, const OfflineDataset& data);

struct VersionSpace {
  std::vector<std::size_t> member_indices;
  double beta = 0.0;
  std::size_t erm_index = 0;
};

VersionSpace version_space_from_losses(std::span<const double> losses, double beta);
VersionSpace version_space(const FiniteFunctionClass& cls, const OfflineDataset& data, double beta);

// P-hat f(., pi) = sum_x w(x) sum_a pi(a|x) f(x,a) with empirical context weights w.
double plug_in_value(const Table& f, const TabularPolicy& pi, std::span<const double> context_weights);

// Lowest-index minimizer of plug_in_value over the version-space members.
std::size_t pessimistic_select(const FiniteFunctionClass& cls, const VersionSpace& vs,
                               const TabularPolicy& pi, std::span<const double> context_weights);
std::size_t pessimistic_select(const FiniteFunctionClass& cls, const OfflineDataset& data,
                               double beta, const TabularPolicy& pi);

// Empirical L1 cover size of a set of vectors (one per function, entries are
// the function evaluated at the sample points). Exact at eps = 0; an upper
// bound on the minimal cover otherwise, nonincreasing in eps.
std::size_t covering_number_l1(const std::vector<std::vector<double>>& vectors, double eps);

// Restriction of every class member's a-slice to the dataset's contexts.
std::vector<std::vector<double>> restrict_to_sample(const FiniteFunctionClass& cls,
                                                    const OfflineDataset& data, std::size_t action);
// Restriction of f(x, pi) to the dataset's contexts.
std::vector<std::vector<double>> restrict_to_sample(const FiniteFunctionClass& cls,
                                                    const OfflineDataset& data,
                                                    const TabularPolicy& pi);

inline constexpr std::uint64_t kCoverCap = std::uint64_t{1} << 62;

struct CoverProduct {
  std::uint64_t value = 1;
  bool saturated = false;
};

// Product of per-action counts, saturating at kCoverCap.
CoverProduct product_cover_bound(std::span<const std::uint64_t> per_action_counts);

// 32 eps + (4 ln N + 24 ln(12/delta)) / n.
double beta_schedule(double cover_count, std::size_t n, double eps, double delta);

}  // namespace ofdm
