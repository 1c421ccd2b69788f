#pragma once

// Closed-form entropy and sufficient-dimension estimates for an effective
// reservoir, plus brute-force branch-weight enumeration used to check them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rnet/reservoir_network.hpp"
#include "rnet/tensor.hpp"

namespace rnet {

enum class LogBase { natural, base10 };

struct EstimateInputs {
  std::size_t n = 1;         // interaction terms
  double gamma = 1.0;        // coupling rate
  double memory_time = 1.0;  // T
  double tau_min = 0.1;      // minimal reservoir time scale
  LogBase log_base = LogBase::natural;

  void validate() const;
  /// The closed forms are derived for gamma * tau_min well below one.
  bool small_coupling() const noexcept { return gamma * tau_min <= 1.0; }
};

struct DimensionEstimate {
  double entropy = 0.0;
  double d_suff = 1.0;  // exp(entropy), natural exponential in every log base
};

/// S = 2 n gamma T [1 - log(gamma tau_min)], d_suff = e^S.
DimensionEstimate dsuff(const EstimateInputs& inputs);

/// With include_full, the two-term entropy of the idealized branch
/// distribution over T/tau_min steps; otherwise its small gamma*tau_min limit
/// 2 n gamma T [1 - log(gamma tau_min)].
double entropy_estimate(const EstimateInputs& inputs, bool include_full);

/// -(2n gT/(1+x)) ln(g tau/(1+x)) - (K/(1+x)) ln(1/(1+x)), x = 2n g tau,
/// K = gT / g tau. Natural log.
double entropy_closed_form(std::size_t n, double gamma_tau, double gamma_T);

/// Normalized weights over all index strings of length `length` in base
/// `base`; string j is the mixed-radix expansion of j with the first site
/// slowest.
struct BranchWeights {
  int base = 1;
  std::size_t length = 0;
  std::vector<double> q;

  std::vector<int> string(std::uint64_t j) const;
  double total() const;
};

/// q(string) = N (gamma tau)^{#nonzero}, N = (1 + 2 n gamma tau)^{-K}.
BranchWeights idealized_branch_weights(std::size_t n, double gamma_tau, std::size_t steps,
                                       std::uint64_t budget = enumeration_budget_from_env());

/// q(string) = |branch vector|^2 of the network, normalized over all strings.
BranchWeights model_branch_weights(const ReservoirNetwork& rn,
                                   std::uint64_t budget = enumeration_budget_from_env());

/// -sum q ln q
double branch_entropy_bound(const BranchWeights& weights);

struct NormalizationCheck {
  double enumerated = 0.0;   // sum over strings of (gamma tau)^{#nonzero}
  double closed_form = 0.0;  // (1 + 2 n gamma tau)^K
  double relative_error() const;
};

NormalizationCheck normalization_check(std::size_t n, double gamma_tau, std::size_t steps,
                                       std::uint64_t budget = enumeration_budget_from_env());

/// S_alpha = ln tr(rho^alpha) / (1 - alpha); alpha = 1 is von Neumann.
double renyi_entropy(const Matrix& rho, double alpha);

struct RenyiBoundReport {
  double alpha = 1.0;
  double entropy = 0.0;  // S_alpha of sum_j |j><j| after normalization
  double bound = 0.0;    // ln(sum q^alpha)/(1-alpha), or -sum q ln q at alpha = 1
  bool holds(double slack = 1e-9) const { return entropy <= bound + slack; }
};

/// Checks S_alpha(sum_j |j><j|) against the weight bound for an arbitrary
/// (non-orthogonal, unnormalized) set of branch vectors.
RenyiBoundReport renyi_bound_check(std::span<const Vector> branches, double alpha);

}  // namespace rnet
