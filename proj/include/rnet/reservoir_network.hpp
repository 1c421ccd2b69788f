#pragma once

// The reservoir network: the Trotterized joint evolution cut between system
// and reservoir, leaving a matrix product state over the interaction index of
// every time step. Site k carries slices W_k[i], i in [0, 2n], with
//   W_k[i] = (Phi0_R * calB_i)^T
// acting on row vectors from the left (older times) to the right. The left
// boundary is the vectorized initial reservoir state and the right boundary is
// the reservoir trace functional.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rnet/liouville.hpp"
#include "rnet/trajectory.hpp"

namespace rnet {

/// One MPS core; slices[i] is left_dim x right_dim.
struct SiteTensor {
  std::vector<Matrix> slices;

  std::size_t phys_dim() const noexcept { return slices.size(); }
  std::size_t left_dim() const { return static_cast<std::size_t>(slices.front().rows()); }
  std::size_t right_dim() const { return static_cast<std::size_t>(slices.front().cols()); }

  /// Extents (left, physical, right).
  Tensor to_tensor() const;
  static SiteTensor from_tensor(const Tensor& t);
};

struct ReservoirNetwork {
  std::vector<SiteTensor> cores;
  Vector left_boundary;
  Vector right_boundary;
  double tau = 0.0;
  double gamma = 0.0;
  std::size_t terms = 0;
  std::size_t d_system = 0;
  std::size_t d_reservoir = 0;
  /// Index of the first site on the original time grid (nonzero after tail_cut).
  std::size_t first_step = 0;

  std::size_t sites() const noexcept { return cores.size(); }
  std::size_t phys_dim() const noexcept { return 2 * terms + 1; }
  /// Bond k sits to the left of site k; bond sites() is the right boundary.
  std::size_t bond_dim(std::size_t bond) const;
  std::size_t max_bond() const;

  /// Throws DimensionError if extents are inconsistent.
  void check() const;

  /// MPS amplitude for one index string.
  Complex amplitude(std::span<const int> string) const;
  /// Left environment row vector after contracting every site with `string`;
  /// for an uncompressed network this is the vectorized reservoir branch.
  Vector branch_vector(std::span<const int> string) const;
};

struct NetworkLimits {
  std::size_t memory_bytes = std::size_t{2} << 30;
  std::uint64_t enumeration_budget = 10'000'000;
  /// Cap on pair-blocks x bond^2 complex entries held while building reduced densities.
  std::uint64_t dense_elements = std::uint64_t{1} << 24;
};

/// Budget from RN_ENUM_BUDGET when set, otherwise 10^7.
std::uint64_t enumeration_budget_from_env();
NetworkLimits default_limits();

ReservoirNetwork build_rn(const ModelSpec& model, const TimeGrid& grid,
                          const NetworkLimits& limits = default_limits());

struct TruncationPolicy {
  double cutoff = 1e-8;
  std::size_t max_bond = kUnboundedRank;
  bool renormalize = false;
};

struct EntropyReport {
  /// Entry k-1 describes bond k, k = 1..sites()-1.
  std::vector<SchmidtSpectrum> spectra;
  std::vector<double> entropies;
  std::size_t max_bond_dim = 1;
  double total_discarded = 0.0;
};

/// Left-to-right orthogonalization, then right-to-left truncation. Boundaries
/// are absorbed into the end cores, so the result has unit boundary vectors.
std::pair<ReservoirNetwork, EntropyReport> compress(const ReservoirNetwork& rn,
                                                     const TruncationPolicy& policy);

/// rho_S(t_k) for k = 0..sites(), contracting the system chain against the network.
Trajectory contract_system(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid);
/// Same, starting the system chain from `rho_start` at time `t_start`.
Trajectory contract_system(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid,
                           const Matrix& rho_start, double t_start);

/// sum over all strings of |amplitude|^2
double norm_squared(const ReservoirNetwork& rn);
/// Rescales the left boundary so that norm_squared == 1.
ReservoirNetwork normalize(const ReservoirNetwork& rn);

struct SiteRange {
  std::size_t first = 0;
  std::size_t count = 1;
  std::size_t end() const noexcept { return first + count; }
};

/// Reduced density operator of the normalized network over the given sites
/// (sorted, distinct). Basis index is the mixed-radix string, first site slowest.
Matrix reduced_density(const ReservoirNetwork& rn, std::span<const std::size_t> sites,
                       const NetworkLimits& limits = default_limits());
Matrix rpdm(const ReservoirNetwork& rn, SiteRange window, const NetworkLimits& limits = default_limits());

double mutual_information(const ReservoirNetwork& rn, SiteRange a, SiteRange b,
                          const NetworkLimits& limits = default_limits());

/// Keeps the last `keep_last` sites; the older part is closed by the left
/// environment along the all-zero branch, scaled to unit overlap with the
/// right environment of the cut bond.
ReservoirNetwork tail_cut(const ReservoirNetwork& rn, std::size_t keep_last);

/// rho_S(T) after replacing the state on the cut bond by its factorized
/// closure: exact up to the cut, then the tail network from rho_S(t_cut).
Matrix evolve_with_tail_cut(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid,
                            std::size_t keep_last);

/// Merges groups of `block` sites. The merged zero slice is the product of the
/// zero slices; slice i > 0 is the sum over block positions of the product with
/// i at that position and 0 elsewhere, scaled by 1/sqrt(block) so the merged
/// site carries the sqrt(gamma * block * tau) weight of a step of length block*tau.
ReservoirNetwork coarse_grain(const ReservoirNetwork& rn, std::size_t block);

/// Amplitude with site1/site2 pinned to index1/index2 and 0 elsewhere, over
/// the all-zero amplitude.
Complex two_point_correlation(const ReservoirNetwork& rn, std::size_t site1, int index1,
                              std::size_t site2, int index2);
/// two_point_correlation divided by sqrt(gamma*tau) per nonzero index.
Complex normalized_two_point_correlation(const ReservoirNetwork& rn, std::size_t site1, int index1,
                                         std::size_t site2, int index2);

}  // namespace rnet
