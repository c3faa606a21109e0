#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ofdm/core.hpp"
#include "ofdm/fnclass.hpp"
#include "ofdm/mdp.hpp"

namespace ofdm {

inline constexpr std::size_t kMaxSignDim = 20;

struct HardCBSpec {
  std::size_t d = 0;
  double rho = 1.0;
  double C = 1.0;
  std::size_t n = 0;
  std::optional<std::size_t> m;  // hybrid only; nullopt means no online limb
  std::vector<int> sigma;
  double epsilon = 0.0;
  double mu_a2 = 0.0;
};

struct HardCB {
  CBInstance instance;
  TabularPolicy mu;
  FiniteFunctionClass cls;
  HardCBSpec spec;
};

// Sign-vector encoding used for class indices: bit i of the index is set
// iff alpha_i = +1.
std::size_t sign_index(const std::vector<int>& alpha);
std::vector<int> index_signs(std::size_t index, std::size_t d);
std::vector<int> random_signs(std::size_t d, std::uint64_t seed);

double hard_cb_epsilon(std::size_t d, double rho, double C, std::size_t n);
double hard_cb_hybrid_epsilon(std::size_t d, double rho, double C, std::size_t n,
                              std::optional<std::size_t> m);

HardCB hard_cb(std::size_t d, double rho, double C, std::size_t n, const std::vector<int>& sigma);
HardCB hard_cb_hybrid(std::size_t d, double rho, double C, std::size_t n,
                      std::optional<std::size_t> m, const std::vector<int>& sigma);

// Hard MDP state layout: x_i = 3i, xbar_i = 3i + 1, xtilde_i = 3i + 2;
// a_1 = 0, a_2 = 1.
enum class HardMDPClass {
  // Per step h (1-based) and context i, an integer m_i of parity H - h + 1 in
  // [-(H-h+1), H-h+1] with f_h(x_i, a_2) = f_h(xtilde_i, .) = (H-h+1)/2 + m_i eps/2.
  // Realizable and closed under every policy's Bellman backup.
  closed,
  // The sign-indexed tables f_h^alpha, 2^d per step. Realizable but not
  // closed under the Bellman backup.
  literal,
};

struct HardMDPSpec {
  std::size_t d = 0;
  std::size_t H = 0;
  double rho = 1.0;
  double C = 1.0;
  std::size_t n = 0;
  std::vector<int> sigma;
  double epsilon = 0.0;
  double mu_a2 = 0.0;
  HardMDPClass kind = HardMDPClass::closed;
};

struct HardMDP {
  MDPInstance mdp;
  MDPPolicy mu;
  MDPFunctionClass cls;
  HardMDPSpec spec;
};

double hard_mdp_epsilon(std::size_t d, std::size_t H, double rho, double C, std::size_t n);

HardMDP hard_mdp(std::size_t d, std::size_t H, double rho, double C, std::size_t n,
                 const std::vector<int>& sigma, HardMDPClass kind = HardMDPClass::closed,
                 RewardLaw law = RewardLaw::bernoulli);

CBInstance random_tabular_cb(std::size_t d, std::size_t K, std::uint64_t seed);

// Class of `size` tables with entries uniform on [0, 1], with the instance's
// mean table placed at a seed-determined index.
FiniteFunctionClass random_realizable_class(const CBInstance& inst, std::size_t size,
                                            std::uint64_t seed);

// A behavior/target pair with its class, for the coverage oracles.
struct TransferCase {
  std::string name;
  CBInstance instance;
  FiniteFunctionClass cls;
  TabularPolicy mu;
  TabularPolicy pi;
};

// One context; actions are 360 points on the unit circle followed by 360 on
// the radius-2 circle (integer degrees). The class is the 360 origin
// halfspaces with normals at half-integer degrees; mu is uniform on the inner
// circle and pi uniform on the outer one.
TransferCase halfspace_sphere_case();

// One context; actions are the G midpoints of [-1, 1]; class members are
// thresholds 1{a >= t} with t on the grid -1 + 2j/G, f* at t = 0. mu has
// weight a^p on positive actions and 1 on negative ones; pi is uniform.
// Under the absolute-value numerator the critical exponent is (p + 1) / 2.
// Only thresholds within 50 grid steps of 0, and every (G/1000)-th one, are
// kept so that refinement does not blow up the class.
TransferCase threshold_case(std::size_t G, double behavior_exponent);

// Two contexts with probabilities (p, 1 - p); f* - f is the indicator of
// (x_1, a_1), and mu = pi = always a_1.
TransferCase bernoulli_gap_case(double p);

}  // namespace ofdm
