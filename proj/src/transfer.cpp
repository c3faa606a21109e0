#include "ofdm/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "ofdm/error.hpp"

namespace ofdm {

double transfer_ratio(double base, double exponent, double denominator) {
  if (base <= kZeroTol) return 0.0;
  if (denominator <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(base, exponent) / denominator;
}

namespace {

enum class Numerator { signed_mean, squared_mean };

TransferEstimate sup_ratio(const FiniteFunctionClass& cls, const CBInstance& inst,
                           const TabularPolicy& mu, const TabularPolicy& pi, double rho,
                           Numerator kind) {
  if (!cls.star_index()) throw ConfigError("transfer: class has no star index");
  if (!(rho >= 0.0)) throw ConfigError("transfer: rho must be nonnegative");
  check_shape(inst, mu);
  check_shape(inst, pi);
  if (cls.contexts() != inst.num_contexts() || cls.actions() != inst.num_actions()) {
    throw ConfigError("transfer: class shape does not match instance");
  }
  const Table& star = cls[*cls.star_index()];
  const auto& px = inst.context_probs();
  TransferEstimate out;
  out.rho = rho;
  Table diff(star.rows(), star.cols());
  Table diff_sq(star.rows(), star.cols());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (i == *cls.star_index()) continue;
    const Table& f = cls[i];
    for (std::size_t x = 0; x < star.rows(); ++x) {
      for (std::size_t a = 0; a < star.cols(); ++a) {
        const double d = star(x, a) - f(x, a);
        diff(x, a) = d;
        diff_sq(x, a) = d * d;
      }
    }
    const double den = expect_under(px, mu, diff_sq);
    const double r = kind == Numerator::signed_mean
                         ? transfer_ratio(std::abs(expect_under(px, pi, diff)), 2.0 * rho, den)
                         : transfer_ratio(expect_under(px, pi, diff_sq), rho, den);
    if (r > out.factor) {
      out.factor = r;
      out.witness = i;
    }
  }
  return out;
}

}  // namespace

TransferEstimate transfer_factor(const FiniteFunctionClass& cls, const CBInstance& inst,
                                 const TabularPolicy& mu, const TabularPolicy& pi, double rho) {
  return sup_ratio(cls, inst, mu, pi, rho, Numerator::signed_mean);
}

TransferEstimate hk_transfer_factor(const FiniteFunctionClass& cls, const CBInstance& inst,
                                    const TabularPolicy& mu, const TabularPolicy& pi, double rho) {
  return sup_ratio(cls, inst, mu, pi, rho, Numerator::squared_mean);
}

TransferEstimate minimal_exponent(const FiniteFunctionClass& cls, const CBInstance& inst,
                                  const TabularPolicy& mu, const TabularPolicy& pi,
                                  std::span<const double> rho_grid, double max_factor) {
  if (rho_grid.empty()) throw ConfigError("minimal_exponent: empty grid");
  for (std::size_t i = 1; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > rho_grid[i - 1])) throw ConfigError("minimal_exponent: grid not ascending");
  }
  for (double rho : rho_grid) {
    auto est = transfer_factor(cls, inst, mu, pi, rho);
    if (std::isfinite(est.factor) && est.factor <= max_factor) return est;
  }
  TransferEstimate none;
  none.rho = std::numeric_limits<double>::quiet_NaN();
  none.factor = std::numeric_limits<double>::infinity();
  return none;
}

double concentrability(const TabularPolicy& mu, const TabularPolicy& pi,
                       std::span<const double> context_probs) {
  if (!mu.probs().same_shape(pi.probs())) throw ConfigError("concentrability: shape mismatch");
  if (!context_probs.empty() && context_probs.size() != mu.contexts()) {
    throw ConfigError("concentrability: context weights do not match policy");
  }
  double sup = 0.0;
  for (std::size_t x = 0; x < mu.contexts(); ++x) {
    if (!context_probs.empty() && context_probs[x] == 0.0) continue;
    for (std::size_t a = 0; a < mu.actions(); ++a) {
      if (pi(x, a) <= 0.0) continue;
      if (mu(x, a) <= 0.0) return std::numeric_limits<double>::infinity();
      sup = std::max(sup, pi(x, a) / mu(x, a));
    }
  }
  return sup;
}

}  // namespace ofdm
