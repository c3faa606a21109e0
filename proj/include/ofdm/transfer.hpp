#pragma once

#include <limits>
#include <optional>
#include <span>

#include "ofdm/core.hpp"
#include "ofdm/fnclass.hpp"

namespace ofdm {

struct TransferEstimate {
  double rho = 0.0;
  double factor = 0.0;  // may be +inf
  std::optional<std::size_t> witness;
};

// base^exponent / denominator with the conventions shared by the CB and MDP
// oracles: a base at or below kZeroTol counts as 0, 0/0 is 0 and positive/0
// is +inf.
inline constexpr double kZeroTol = 1e-12;
double transfer_ratio(double base, double exponent, double denominator);

// sup over f != f* of |E_{D x pi}[f* - f]|^{2 rho} / E_{D x mu}[(f* - f)^2].
TransferEstimate transfer_factor(const FiniteFunctionClass& cls, const CBInstance& inst,
                                 const TabularPolicy& mu, const TabularPolicy& pi, double rho);

// Same supremum with numerator (E_{D x pi}[(f* - f)^2])^rho.
TransferEstimate hk_transfer_factor(const FiniteFunctionClass& cls, const CBInstance& inst,
                                    const TabularPolicy& mu, const TabularPolicy& pi, double rho);

// Smallest grid exponent whose factor is finite and at most max_factor; the
// returned estimate has factor +inf and rho = NaN when no grid point qualifies.
TransferEstimate minimal_exponent(const FiniteFunctionClass& cls, const CBInstance& inst,
                                  const TabularPolicy& mu, const TabularPolicy& pi,
                                  std::span<const double> rho_grid,
                                  double max_factor = std::numeric_limits<double>::infinity());

// sup over (x, a) with pi(a|x) > 0 of pi(a|x) / mu(a|x). Contexts with zero
// probability under context_probs are skipped when it is supplied.
double concentrability(const TabularPolicy& mu, const TabularPolicy& pi,
                       std::span<const double> context_probs = {});

}  // namespace ofdm
