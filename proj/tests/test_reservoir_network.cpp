#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rnet/errors.hpp"
#include "rnet/exact_oracle.hpp"
#include "rnet/kernels.hpp"
#include "rnet/models.hpp"
#include "rnet/reservoir_network.hpp"
#include "test_support.hpp"

namespace rnet {
namespace {

using namespace rnet::testing;

ModelSpec desk() { return models::preset("desk"); }

// Brute-force reduced density over `sites` from explicit amplitudes.
Matrix enumerated_reduced_density(const ReservoirNetwork& rn, const std::vector<std::size_t>& sites) {
  const int base = static_cast<int>(rn.phys_dim());
  const std::size_t k = rn.sites();
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < k; ++i) count *= static_cast<std::uint64_t>(base);
  std::uint64_t dim = 1;
  for (std::size_t i = 0; i < sites.size(); ++i) dim *= static_cast<std::uint64_t>(base);
  std::vector<Complex> amps(count);
  std::vector<int> s(k);
  double norm = 0.0;
  for (std::uint64_t j = 0; j < count; ++j) {
    std::uint64_t r = j;
    for (std::size_t p = k; p-- > 0;) {
      s[p] = static_cast<int>(r % static_cast<std::uint64_t>(base));
      r /= static_cast<std::uint64_t>(base);
    }
    amps[j] = rn.amplitude(s);
    norm += std::norm(amps[j]);
  }
  // Group strings by the rest (all sites not in `sites`) and accumulate.
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto digits = [&](std::uint64_t j) {
    std::vector<int> d(k);
    for (std::size_t p = k; p-- > 0;) {
      d[p] = static_cast<int>(j % static_cast<std::uint64_t>(base));
      j /= static_cast<std::uint64_t>(base);
    }
    return d;
  };
  auto inside = [&](const std::vector<int>& d) {
    std::uint64_t idx = 0;
    for (std::size_t site : sites) idx = idx * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d[site]);
    return idx;
  };
  auto outside_equal = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t p = 0; p < k; ++p) {
      bool kept = false;
      for (std::size_t site : sites) kept = kept || site == p;
      if (!kept && a[p] != b[p]) return false;
    }
    return true;
  };
  for (std::uint64_t a = 0; a < count; ++a) {
    const auto da = digits(a);
    for (std::uint64_t b = 0; b < count; ++b) {
      const auto db = digits(b);
      if (!outside_equal(da, db)) continue;
      rho(static_cast<Eigen::Index>(inside(da)), static_cast<Eigen::Index>(inside(db))) +=
          amps[a] * std::conj(amps[b]);
    }
  }
  return rho / norm;
}

TEST(BuildRn, SiteCountAndShape) {
  ModelSpec m = desk();
  ReservoirNetwork rn = build_rn(m, TimeGrid(0.1, 5));
  EXPECT_EQ(rn.sites(), 5u);
  EXPECT_EQ(rn.phys_dim(), 3u);
  EXPECT_EQ(rn.bond_dim(0), 16u);
  EXPECT_EQ(rn.left_boundary.size(), 16);
  EXPECT_NO_THROW(rn.check());
}

TEST(BuildRn, DecoupledHasOnlyZeroSlice) {
  ReservoirNetwork rn = build_rn(models::preset("free"), TimeGrid(0.1, 4));
  for (const auto& core : rn.cores) {
    EXPECT_GT(core.slices[0].norm(), 0.0);
    for (std::size_t i = 1; i < core.phys_dim(); ++i) EXPECT_EQ(core.slices[i].norm(), 0.0);
  }
}

TEST(BuildRn, MemoryBudget) {
  NetworkLimits tiny;
  tiny.memory_bytes = 1024;
  EXPECT_THROW(build_rn(desk(), TimeGrid(0.1, 10), tiny), ResourceError);
}

TEST(BuildRn, SliceIsFreeStepAfterInteractionFactor) {
  ModelSpec m = desk();
  const double tau = 0.1;
  ReservoirNetwork rn = build_rn(m, TimeGrid(tau, 1));
  auto f = interaction_factorize(m, tau);
  auto p = free_propagator(m, tau);
  for (std::size_t i = 0; i < f.size(); ++i) {
    Matrix expected = (p.reservoir.matrix * f.pairs[i].reservoir).transpose();
    EXPECT_LE((rn.cores[0].slices[i] - expected).norm(), 1e-14);
  }
}

TEST(SiteTensor, RoundTrip) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 2));
  Tensor t = rn.cores[1].to_tensor();
  EXPECT_EQ(t.shape(), (Shape{16, 3, 16}));
  SiteTensor back = SiteTensor::from_tensor(t);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(back.slices[i] == rn.cores[1].slices[i]);
}

TEST(ContractSystem, MatchesDenseFactorizedOracle) {
  ModelSpec m = desk();
  TimeGrid grid(0.05, 20);
  auto rn = contract_system(build_rn(m, grid), m, grid);
  auto dense = evolve_trotter_dense(m, grid, InteractionMode::factorized).trajectory;
  ASSERT_EQ(rn.size(), dense.size());
  EXPECT_LE(max_trace_distance(rn, dense), 1e-10);
}

TEST(ContractSystem, OracleEquivalenceOnRandomModels) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t ds = 1 + static_cast<std::size_t>(trial % 2);
    const std::size_t dr = 8 / (2 * ds) + static_cast<std::size_t>(trial % 3 == 0);
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
    ModelSpec m = models::random_model(400 + static_cast<std::uint64_t>(trial), ds, std::min<std::size_t>(dr, 8 / ds), n, 0.8);
    TimeGrid grid(0.07, 16 + 8 * static_cast<std::size_t>(trial));
    auto a = contract_system(build_rn(m, grid), m, grid);
    auto b = evolve_trotter_dense(m, grid, InteractionMode::factorized).trajectory;
    EXPECT_LE(max_trace_distance(a, b), 1e-10) << "trial " << trial;
  }
}

TEST(ContractSystem, DecoupledIsFreeEvolution) {
  ModelSpec m = models::preset("free");
  TimeGrid grid(0.1, 10);
  auto traj = contract_system(build_rn(m, grid), m, grid);
  for (std::size_t k = 0; k <= grid.steps(); ++k) {
    Matrix u = unitary_from_eigen(m.h_system, grid.time(k));
    EXPECT_LE((traj.states[k] - u * m.rho_system * u.adjoint()).norm(), 1e-10);
  }
}

TEST(ContractSystem, DephasingKeepsPopulations) {
  ModelSpec m = models::preset("dephasing");
  TimeGrid grid(0.1, 15);
  auto traj = contract_system(build_rn(m, grid), m, grid);
  for (const auto& rho : traj.states) {
    EXPECT_NEAR(rho(0, 0).real(), m.rho_system(0, 0).real(), 1e-10);
    EXPECT_NEAR(rho(1, 1).real(), m.rho_system(1, 1).real(), 1e-10);
  }
}

TEST(ContractSystem, HermitianWithBoundedTraceDefect) {
  ModelSpec m = models::random_model(41, 2, 3, 2, 1.5);
  TimeGrid grid(0.05, 30);
  auto traj = contract_system(build_rn(m, grid), m, grid);
  const double bound = 5.0 * grid.steps() * std::pow(m.gamma * grid.tau(), 2);
  for (const auto& rho : traj.states) {
    EXPECT_LE((rho - rho.adjoint()).norm(), 1e-10);
    EXPECT_LE(std::abs(rho.trace() - 1.0), bound);
  }
}

TEST(ContractSystem, MetadataMismatchIsUsageError) {
  ModelSpec m = desk();
  ReservoirNetwork rn = build_rn(m, TimeGrid(0.1, 5));
  EXPECT_THROW(contract_system(rn, m, TimeGrid(0.1, 6)), UsageError);
  EXPECT_THROW(contract_system(rn, m, TimeGrid(0.05, 5)), UsageError);
  EXPECT_THROW(contract_system(rn, models::random_model(1, 3, 4, 1), TimeGrid(0.1, 5)), UsageError);
}

TEST(ContractSystem, FirstOrderInTau) {
  ModelSpec m = desk();
  auto err = [&](double tau) {
    TimeGrid grid = TimeGrid::from_total(1.0, tau);
    return max_trace_distance(contract_system(build_rn(m, grid), m, grid), evolve_exact(m, grid).trajectory);
  };
  const double ratio = err(0.05) / err(0.025);
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
}

TEST(Compress, LosslessAtZeroCutoff) {
  ModelSpec m = desk();
  TimeGrid grid(0.05, 20);
  ReservoirNetwork rn = build_rn(m, grid);
  auto [c, report] = compress(rn, {0.0, kUnboundedRank, false});
  EXPECT_LE(max_trace_distance(contract_system(c, m, grid), contract_system(rn, m, grid)), 1e-12);
  EXPECT_EQ(report.spectra.size(), grid.steps() - 1);
}

TEST(Compress, DecoupledCompressesToProduct) {
  ModelSpec m = models::preset("free");
  TimeGrid grid(0.1, 8);
  auto [c, report] = compress(build_rn(m, grid), {});
  EXPECT_EQ(c.max_bond(), 1u);
  for (double s : report.entropies) EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_LE(max_trace_distance(contract_system(c, m, grid), contract_system(build_rn(m, grid), m, grid)), 1e-12);
}

TEST(Compress, DeskCutoffSelfConsistency) {
  ModelSpec m = desk();
  TimeGrid grid(0.02, 50);
  ReservoirNetwork rn = build_rn(m, grid);
  auto [c, report] = compress(rn, {1e-8, kUnboundedRank, false});
  const double err = trace_distance(contract_system(c, m, grid).final_state(),
                                    contract_system(rn, m, grid).final_state());
  EXPECT_LE(err, 1e-6);
}

TEST(Compress, ReportInvariants) {
  ModelSpec m = models::preset("fast_bath");
  TimeGrid grid(0.1, 12);
  ReservoirNetwork rn = build_rn(m, grid);
  TruncationPolicy policy{1e-3, 6, false};
  auto [c, report] = compress(rn, policy);
  EXPECT_LE(c.max_bond(), 6u);
  EXPECT_EQ(report.max_bond_dim, c.max_bond());
  for (std::size_t b = 0; b < report.spectra.size(); ++b) {
    const auto& s = report.spectra[b];
    EXPECT_EQ(s.rank(), c.bond_dim(b + 1));
    EXPECT_LE(report.entropies[b], std::log(static_cast<double>(s.rank())) + 1e-12);
    for (std::size_t i = 1; i < s.rank(); ++i) EXPECT_GE(s.values[i - 1], s.values[i]);
  }
  const double err = max_trace_distance(contract_system(c, m, grid), contract_system(rn, m, grid));
  EXPECT_LE(err, 10.0 * std::sqrt(report.total_discarded));
}

TEST(Compress, PerBondCutoffHonored) {
  ModelSpec m = models::preset("fast_bath");
  auto [c, report] = compress(build_rn(m, TimeGrid(0.1, 10)), {1e-4, kUnboundedRank, false});
  for (const auto& s : report.spectra)
    EXPECT_LE(s.discarded_weight / (s.retained_weight() + s.discarded_weight), 1e-8 * (1 + 1e-9));
}

TEST(Compress, RenormalizePreservesNorm) {
  ModelSpec m = models::preset("fast_bath");
  ReservoirNetwork rn = build_rn(m, TimeGrid(0.1, 6));
  const double before = norm_squared(rn);
  auto [c, report] = compress(rn, {1e-2, 3, true});
  EXPECT_NEAR(norm_squared(c) / before, 1.0, 1e-10);
}

TEST(Normalize, UnitNorm) {
  ReservoirNetwork rn = normalize(build_rn(desk(), TimeGrid(0.1, 5)));
  EXPECT_NEAR(norm_squared(rn), 1.0, 1e-12);
}

TEST(Amplitude, BranchVectorClosesToAmplitude) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 3));
  std::vector<int> s{0, 2, 1};
  EXPECT_NEAR(std::abs(rn.branch_vector(s).cwiseProduct(rn.right_boundary).sum() - rn.amplitude(s)), 0.0, 1e-14);
  std::vector<int> bad{0, 3, 1};
  EXPECT_THROW(rn.amplitude(bad), UsageError);
}

TEST(Rpdm, DecoupledIsPureZeroString) {
  ReservoirNetwork rn = build_rn(models::preset("free"), TimeGrid(0.1, 4));
  Matrix rho = rpdm(rn, {1, 2});
  ASSERT_EQ(rho.rows(), 9);
  EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(rho.norm(), 1.0, 1e-12);
}

TEST(Rpdm, MatchesBruteForceEnumeration) {
  ReservoirNetwork rn = build_rn(models::preset("fast_bath"), TimeGrid(0.2, 4));
  for (const auto& sites : {std::vector<std::size_t>{0, 1, 2, 3}, std::vector<std::size_t>{1, 2},
                            std::vector<std::size_t>{0, 3}, std::vector<std::size_t>{2}}) {
    Matrix fast = reduced_density(rn, sites);
    Matrix slow = enumerated_reduced_density(rn, sites);
    EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(von_neumann_entropy(fast), von_neumann_entropy(slow), 1e-8);
  }
}

TEST(Rpdm, SingleSiteIsDensity) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.02, 30));
  for (std::size_t k : {0u, 14u, 29u}) {
    Matrix rho = rpdm(rn, {k, 1});
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-8);
    EXPECT_LE((rho - rho.adjoint()).norm(), 1e-10);
    EXPECT_GE(hermitian_eigenvalues(rho).minCoeff(), -1e-8);
  }
}

TEST(Rpdm, BudgetEnforced) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 12));
  NetworkLimits limits;
  limits.enumeration_budget = 100;
  EXPECT_THROW(rpdm(rn, {0, 5}, limits), ResourceError);
  EXPECT_THROW(rpdm(rn, {10, 3}), UsageError);
}

TEST(MutualInformation, DecoupledIsZero) {
  ReservoirNetwork rn = build_rn(models::preset("free"), TimeGrid(0.1, 8));
  EXPECT_NEAR(mutual_information(rn, {0, 2}, {5, 2}), 0.0, 1e-8);
}

TEST(MutualInformation, SubadditivityAndOverlap) {
  ReservoirNetwork rn = build_rn(models::preset("fast_bath"), TimeGrid(0.1, 10));
  const double i = mutual_information(rn, {2, 1}, {3, 1});
  EXPECT_GE(i, -1e-8);
  const double sa = von_neumann_entropy(rpdm(rn, {2, 1}));
  const double sb = von_neumann_entropy(rpdm(rn, {3, 1}));
  EXPECT_LE(i, sa + sb + 1e-10);
  EXPECT_THROW(mutual_information(rn, {2, 2}, {3, 1}), UsageError);
}

TEST(TailCut, KeepAllIsIdentity) {
  ModelSpec m = desk();
  TimeGrid grid(0.1, 10);
  ReservoirNetwork rn = build_rn(m, grid);
  ReservoirNetwork same = tail_cut(rn, 10);
  EXPECT_LE(max_trace_distance(contract_system(same, m, grid), contract_system(rn, m, grid)), 1e-12);
  EXPECT_LE(trace_distance(evolve_with_tail_cut(rn, m, grid, 10), contract_system(rn, m, grid).final_state()),
            1e-12);
}

TEST(TailCut, DecoupledUnchanged) {
  ModelSpec m = models::preset("free");
  TimeGrid grid(0.1, 10);
  ReservoirNetwork rn = build_rn(m, grid);
  const Matrix full = contract_system(rn, m, grid).final_state();
  for (std::size_t keep = 1; keep <= 10; ++keep)
    EXPECT_LE(trace_distance(evolve_with_tail_cut(rn, m, grid, keep), full), 1e-10);
}

TEST(TailCut, ShapeAndRange) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 10));
  ReservoirNetwork cut = tail_cut(rn, 4);
  EXPECT_EQ(cut.sites(), 4u);
  EXPECT_EQ(cut.first_step, 6u);
  EXPECT_NO_THROW(cut.check());
  EXPECT_THROW(tail_cut(rn, 0), UsageError);
  EXPECT_THROW(tail_cut(rn, 11), UsageError);
}

TEST(CoarseGrain, BlockOneIsIdentity) {
  ModelSpec m = desk();
  TimeGrid grid(0.1, 6);
  ReservoirNetwork rn = build_rn(m, grid);
  ReservoirNetwork same = coarse_grain(rn, 1);
  ASSERT_EQ(same.sites(), rn.sites());
  for (std::size_t k = 0; k < rn.sites(); ++k)
    for (std::size_t i = 0; i < rn.phys_dim(); ++i)
      EXPECT_TRUE(same.cores[k].slices[i] == rn.cores[k].slices[i]);
  EXPECT_THROW(coarse_grain(rn, 4), UsageError);
  EXPECT_THROW(coarse_grain(rn, 0), UsageError);
}

TEST(CoarseGrain, DecoupledUnchanged) {
  ModelSpec m = models::preset("free");
  TimeGrid fine(0.05, 12);
  ReservoirNetwork cg = coarse_grain(build_rn(m, fine), 3);
  EXPECT_EQ(cg.sites(), 4u);
  EXPECT_NEAR(cg.tau, 0.15, 1e-15);
  TimeGrid coarse(0.15, 4);
  EXPECT_LE(trace_distance(contract_system(cg, m, coarse).final_state(),
                           contract_system(build_rn(m, fine), m, fine).final_state()),
            1e-10);
}

TEST(CoarseGrain, ConvergesAcrossGrids) {
  ModelSpec m = desk();
  std::vector<double> taus, diffs;
  for (double tau = 0.1; tau > 0.01; tau /= 2) {
    TimeGrid coarse = TimeGrid::from_total(1.0, tau);
    TimeGrid fine = TimeGrid::from_total(1.0, tau / 2);
    ReservoirNetwork cg = coarse_grain(build_rn(m, fine), 2);
    const double d = trace_distance(contract_system(cg, m, coarse).final_state(),
                                    contract_system(build_rn(m, fine), m, fine).final_state());
    taus.push_back(tau);
    diffs.push_back(d);
    EXPECT_LE(d, 0.05 * tau);
  }
  EXPECT_GE(fitted_slope(taus, diffs), 0.8);
}

TEST(TwoPoint, ZeroIndicesGiveOne) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 6));
  EXPECT_NEAR(std::abs(two_point_correlation(rn, 1, 0, 4, 0) - 1.0), 0.0, 1e-12);
}

TEST(TwoPoint, DecoupledGivesZero) {
  ReservoirNetwork rn = build_rn(models::preset("free"), TimeGrid(0.1, 6));
  EXPECT_EQ(two_point_correlation(rn, 1, 1, 4, 2), Complex(0.0));
  EXPECT_EQ(two_point_correlation(rn, 1, 0, 4, 1), Complex(0.0));
}

TEST(TwoPoint, RangeChecks) {
  ReservoirNetwork rn = build_rn(desk(), TimeGrid(0.1, 6));
  EXPECT_THROW(two_point_correlation(rn, 3, 1, 3, 1), UsageError);
  EXPECT_THROW(two_point_correlation(rn, 1, 3, 4, 1), UsageError);
  EXPECT_THROW(two_point_correlation(rn, 1, 1, 6, 1), UsageError);
}

TEST(TwoPoint, StableUnderRefinement) {
  ModelSpec m = desk();
  // Site k on grid tau produces the state at (k+1) tau; on grid tau/2 that is site 2k+1.
  std::vector<double> taus, diffs;
  for (double tau = 0.1; tau > 0.01; tau /= 2) {
    ReservoirNetwork c = build_rn(m, TimeGrid::from_total(1.0, tau));
    ReservoirNetwork f = build_rn(m, TimeGrid::from_total(1.0, tau / 2));
    const auto k1 = static_cast<std::size_t>(std::lround(0.2 / tau)) - 1;
    const auto k2 = static_cast<std::size_t>(std::lround(0.6 / tau)) - 1;
    const Complex gc = normalized_two_point_correlation(c, k1, 1, k2, 1);
    const Complex gf = normalized_two_point_correlation(f, 2 * k1 + 1, 1, 2 * k2 + 1, 1);
    taus.push_back(tau);
    diffs.push_back(std::abs(gc - gf));
    EXPECT_TRUE(std::isfinite(std::abs(gc)));
  }
  EXPECT_GE(fitted_slope(taus, diffs), 0.8);
}

}  // namespace
}  // namespace rnet
