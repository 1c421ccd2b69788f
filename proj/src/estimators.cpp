#include "rnet/estimators.hpp"

#include <cmath>
#include <string>

#include "rnet/errors.hpp"
#include "rnet/kernels.hpp"

namespace rnet {

namespace {

double log_in(LogBase base, double x) { return base == LogBase::base10 ? std::log10(x) : std::log(x); }

std::uint64_t string_count(int base, std::size_t length, std::uint64_t budget) {
  double count = 1.0;
  for (std::size_t i = 0; i < length; ++i) count *= base;
  if (count > static_cast<double>(budget))
    throw ResourceError("branch enumeration: " + std::to_string(count) +
                        " strings exceed budget " + std::to_string(budget));
  return static_cast<std::uint64_t>(count);
}

void check_gamma_tau(double gamma_tau) {
  if (!(gamma_tau > 0.0) || !std::isfinite(gamma_tau))
    throw ValidationError("gamma*tau must be finite and > 0");
}

}  // namespace

void EstimateInputs::validate() const {
  if (n == 0) throw ValidationError("n: must be a positive integer");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma: must be > 0");
  if (!(memory_time > 0.0) || !std::isfinite(memory_time)) throw ValidationError("T: must be > 0");
  if (!(tau_min > 0.0) || !std::isfinite(tau_min)) throw ValidationError("tau_min: must be > 0");
}

DimensionEstimate dsuff(const EstimateInputs& in) {
  in.validate();
  DimensionEstimate out;
  out.entropy = entropy_estimate(in, false);
  out.d_suff = std::exp(out.entropy);
  return out;
}

double entropy_closed_form(std::size_t n, double gamma_tau, double gamma_T) {
  check_gamma_tau(gamma_tau);
  const double x = 2.0 * static_cast<double>(n) * gamma_tau;
  const double steps = gamma_T / gamma_tau;
  return -(2.0 * static_cast<double>(n) * gamma_T / (1.0 + x)) * std::log(gamma_tau / (1.0 + x)) -
         (steps / (1.0 + x)) * std::log(1.0 / (1.0 + x));
}

double entropy_estimate(const EstimateInputs& in, bool include_full) {
  in.validate();
  const double nn = static_cast<double>(in.n);
  const double gt = in.gamma * in.tau_min;
  const double g_total = in.gamma * in.memory_time;
  if (!include_full) return 2.0 * nn * g_total * (1.0 - log_in(in.log_base, gt));
  const double x = 2.0 * nn * gt;
  const double steps = in.memory_time / in.tau_min;
  return -(2.0 * nn * g_total / (1.0 + x)) * log_in(in.log_base, gt / (1.0 + x)) -
         (steps / (1.0 + x)) * log_in(in.log_base, 1.0 / (1.0 + x));
}

std::vector<int> BranchWeights::string(std::uint64_t j) const {
  std::vector<int> s(length);
  for (std::size_t k = length; k-- > 0;) {
    s[k] = static_cast<int>(j % static_cast<std::uint64_t>(base));
    j /= static_cast<std::uint64_t>(base);
  }
  return s;
}

double BranchWeights::total() const {
  return kernels::omp::sum_indexed(q.size(), [&](std::uint64_t j) { return q[j]; });
}

BranchWeights idealized_branch_weights(std::size_t n, double gamma_tau, std::size_t steps,
                                       std::uint64_t budget) {
  check_gamma_tau(gamma_tau);
  if (n == 0) throw ValidationError("n: must be a positive integer");
  BranchWeights w;
  w.base = static_cast<int>(2 * n + 1);
  w.length = steps;
  const std::uint64_t count = string_count(w.base, steps, budget);
  const double norm = std::pow(1.0 + 2.0 * static_cast<double>(n) * gamma_tau, -static_cast<double>(steps));
  // (gamma tau)^m for m = 0..K
  std::vector<double> powers(steps + 1, 1.0);
  for (std::size_t m = 1; m <= steps; ++m) powers[m] = powers[m - 1] * gamma_tau;
  w.q.resize(count);
  kernels::omp::for_each_index(count, [&](std::uint64_t j) {
    const int m = kernels::count_nonzero_digits(j, w.base, static_cast<int>(steps));
    w.q[j] = norm * powers[static_cast<std::size_t>(m)];
  });
  return w;
}

BranchWeights model_branch_weights(const ReservoirNetwork& rn, std::uint64_t budget) {
  rn.check();
  BranchWeights w;
  w.base = static_cast<int>(rn.phys_dim());
  w.length = rn.sites();
  const std::uint64_t count = string_count(w.base, w.length, budget);
  w.q.resize(count);
  kernels::omp::for_each_index(count, [&](std::uint64_t j) {
    const auto s = w.string(j);
    w.q[j] = rn.branch_vector(s).squaredNorm();
  });
  const double total = w.total();
  if (!(total > 0.0)) throw ValidationError("model branch weights sum to zero");
  for (auto& q : w.q) q /= total;
  return w;
}

double branch_entropy_bound(const BranchWeights& weights) {
  return kernels::omp::sum_indexed(weights.q.size(), [&](std::uint64_t j) {
    const double q = weights.q[j];
    return q > 0.0 ? -q * std::log(q) : 0.0;
  });
}

double NormalizationCheck::relative_error() const {
  return std::abs(enumerated - closed_form) / std::abs(closed_form);
}

NormalizationCheck normalization_check(std::size_t n, double gamma_tau, std::size_t steps,
                                       std::uint64_t budget) {
  check_gamma_tau(gamma_tau);
  if (n == 0) throw ValidationError("n: must be a positive integer");
  const int base = static_cast<int>(2 * n + 1);
  const std::uint64_t count = string_count(base, steps, budget);
  std::vector<double> powers(steps + 1, 1.0);
  for (std::size_t m = 1; m <= steps; ++m) powers[m] = powers[m - 1] * gamma_tau;
  NormalizationCheck out;
  out.enumerated = kernels::omp::sum_indexed(count, [&](std::uint64_t j) {
    return powers[static_cast<std::size_t>(kernels::count_nonzero_digits(j, base, static_cast<int>(steps)))];
  });
  out.closed_form = std::pow(1.0 + 2.0 * static_cast<double>(n) * gamma_tau, static_cast<double>(steps));
  return out;
}

double renyi_entropy(const Matrix& rho, double alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("renyi_entropy: alpha must be >= 1");
  if (alpha == 1.0) return von_neumann_entropy(rho);
  // von_neumann_entropy performs the density-operator validation.
  (void)von_neumann_entropy(rho);
  const RealVector ev = hermitian_eigenvalues(rho);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::pow(std::max(0.0, ev(i)), alpha);
  return std::log(sum) / (1.0 - alpha);
}

RenyiBoundReport renyi_bound_check(std::span<const Vector> branches, double alpha) {
  if (branches.empty()) throw ValidationError("renyi_bound_check: no branches");
  const auto dim = branches.front().size();
  double total = 0.0;
  for (const auto& b : branches) {
    if (b.size() != dim) throw DimensionError("renyi_bound_check: branches differ in dimension");
    total += b.squaredNorm();
  }
  if (!(total > 0.0)) throw ValidationError("renyi_bound_check: branches have zero weight");

  Matrix rho = Matrix::Zero(dim, dim);
  std::vector<double> q;
  q.reserve(branches.size());
  for (const auto& b : branches) {
    rho.noalias() += b * b.adjoint() / total;
    q.push_back(b.squaredNorm() / total);
  }

  RenyiBoundReport report;
  report.alpha = alpha;
  report.entropy = renyi_entropy(rho, alpha);
  if (alpha == 1.0) {
    report.bound = shannon_entropy(q);
  } else {
    double s = 0.0;
    for (double x : q) s += std::pow(x, alpha);
    report.bound = std::log(s) / (1.0 - alpha);
  }
  return report;
}

}  // namespace rnet
