#include "rnet/reservoir_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "rnet/errors.hpp"
#include "rnet/kernels.hpp"

namespace rnet {

namespace {

Vector row_times(const Vector& row, const Matrix& m) { return (row.transpose() * m).transpose(); }

void check_metadata(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid) {
  if (rn.sites() != grid.steps())
    throw UsageError("contract_system: network has " + std::to_string(rn.sites()) +
                     " sites but grid has " + std::to_string(grid.steps()) + " steps");
  if (std::abs(rn.tau - grid.tau()) > 1e-12 * std::max(1.0, grid.tau()))
    throw UsageError("contract_system: network tau does not match grid tau");
  if (rn.terms != model.terms() || rn.d_reservoir != model.d_reservoir() ||
      rn.d_system != model.d_system() || std::abs(rn.gamma - model.gamma) > 1e-12)
    throw UsageError("contract_system: network was built for a different model");
}

// Right environments along the all-zero branch: env[k] is the vector on bond k.
std::vector<Vector> zero_branch_right_envs(const ReservoirNetwork& rn) {
  std::vector<Vector> env(rn.sites() + 1);
  env[rn.sites()] = rn.right_boundary;
  for (std::size_t k = rn.sites(); k-- > 0;) env[k] = rn.cores[k].slices[0] * env[k + 1];
  return env;
}

// Transfer of a Gram environment through one summed site:
// L' = sum_i W_i^T L conj(W_i)
Matrix left_transfer(const SiteTensor& core, const Matrix& env) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(core.right_dim()),
                            static_cast<Eigen::Index>(core.right_dim()));
  for (const auto& w : core.slices) out.noalias() += w.transpose() * env * w.conjugate();
  return out;
}

// R = sum_i W_i R' W_i^dagger
Matrix right_transfer(const SiteTensor& core, const Matrix& env) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(core.left_dim()),
                            static_cast<Eigen::Index>(core.left_dim()));
  for (const auto& w : core.slices) out.noalias() += w * env * w.adjoint();
  return out;
}

void check_string(const ReservoirNetwork& rn, std::span<const int> string) {
  if (string.size() != rn.sites()) throw UsageError("index string length must equal site count");
  for (int i : string)
    if (i < 0 || static_cast<std::size_t>(i) >= rn.phys_dim())
      throw UsageError("index string entry out of range");
}

}  // namespace

Tensor SiteTensor::to_tensor() const {
  const std::size_t l = left_dim(), p = phys_dim(), r = right_dim();
  Tensor t({l, p, r});
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t b = 0; b < r; ++b)
        t[(a * p + i) * r + b] = slices[i](Eigen::Index(a), Eigen::Index(b));
  return t;
}

SiteTensor SiteTensor::from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw DimensionError("site tensor must have rank 3");
  const std::size_t l = t.extent(0), p = t.extent(1), r = t.extent(2);
  SiteTensor core;
  core.slices.assign(p, Matrix(Eigen::Index(l), Eigen::Index(r)));
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t b = 0; b < r; ++b)
        core.slices[i](Eigen::Index(a), Eigen::Index(b)) = t[(a * p + i) * r + b];
  return core;
}

std::size_t ReservoirNetwork::bond_dim(std::size_t bond) const {
  if (bond > sites()) throw UsageError("bond index out of range");
  if (bond == sites()) return static_cast<std::size_t>(right_boundary.size());
  return cores[bond].left_dim();
}

std::size_t ReservoirNetwork::max_bond() const {
  std::size_t m = 0;
  for (std::size_t b = 0; b <= sites(); ++b) m = std::max(m, bond_dim(b));
  return m;
}

void ReservoirNetwork::check() const {
  if (cores.empty()) throw DimensionError("reservoir network has no sites");
  for (std::size_t k = 0; k < cores.size(); ++k) {
    const auto& c = cores[k];
    if (c.phys_dim() != phys_dim())
      throw DimensionError("site " + std::to_string(k) + ": physical extent must be 2n+1");
    for (const auto& s : c.slices)
      if (s.rows() != c.slices.front().rows() || s.cols() != c.slices.front().cols())
        throw DimensionError("site " + std::to_string(k) + ": slices differ in shape");
    if (k + 1 < cores.size() && c.right_dim() != cores[k + 1].left_dim())
      throw DimensionError("bond " + std::to_string(k + 1) + ": adjacent extents differ");
  }
  if (static_cast<std::size_t>(left_boundary.size()) != cores.front().left_dim())
    throw DimensionError("left boundary does not match the first site");
  if (static_cast<std::size_t>(right_boundary.size()) != cores.back().right_dim())
    throw DimensionError("right boundary does not match the last site");
}

Vector ReservoirNetwork::branch_vector(std::span<const int> string) const {
  check_string(*this, string);
  Vector row = left_boundary;
  for (std::size_t k = 0; k < sites(); ++k)
    row = row_times(row, cores[k].slices[static_cast<std::size_t>(string[k])]);
  return row;
}

Complex ReservoirNetwork::amplitude(std::span<const int> string) const {
  return branch_vector(string).transpose() * right_boundary;
}

std::uint64_t enumeration_budget_from_env() {
  if (const char* env = std::getenv("RN_ENUM_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
      throw UsageError(std::string("RN_ENUM_BUDGET: not a positive integer: ") + env);
    return v;
  }
  return 10'000'000;
}

NetworkLimits default_limits() {
  NetworkLimits limits;
  limits.enumeration_budget = enumeration_budget_from_env();
  return limits;
}

ReservoirNetwork build_rn(const ModelSpec& model, const TimeGrid& grid, const NetworkLimits& limits) {
  model.validate();
  const std::size_t dr2 = model.d_reservoir() * model.d_reservoir();
  const std::size_t p = 2 * model.terms() + 1;
  const double bytes = static_cast<double>(grid.steps()) * static_cast<double>(p) *
                       static_cast<double>(dr2) * static_cast<double>(dr2) * sizeof(Complex);
  if (bytes > static_cast<double>(limits.memory_bytes))
    throw ResourceError("build_rn: network needs " + std::to_string(bytes) +
                        " bytes, budget is " + std::to_string(limits.memory_bytes));

  const auto factors = interaction_factorize(model, grid.tau());
  const auto free = free_propagator(model, grid.tau());

  SiteTensor core;
  core.slices.reserve(p);
  for (const auto& pair : factors.pairs)
    core.slices.push_back((free.reservoir.matrix * pair.reservoir).transpose());

  ReservoirNetwork rn;
  rn.cores.assign(grid.steps(), core);
  rn.left_boundary = vectorize(model.rho_reservoir);
  rn.right_boundary = trace_functional(model.d_reservoir());
  rn.tau = grid.tau();
  rn.gamma = model.gamma;
  rn.terms = model.terms();
  rn.d_system = model.d_system();
  rn.d_reservoir = model.d_reservoir();
  return rn;
}

std::pair<ReservoirNetwork, EntropyReport> compress(const ReservoirNetwork& input,
                                                     const TruncationPolicy& policy) {
  if (!(policy.cutoff >= 0.0)) throw ValidationError("truncation cutoff must be >= 0");
  input.check();
  ReservoirNetwork rn = input;
  const std::size_t k_sites = rn.sites();
  const std::size_t p = rn.phys_dim();

  for (auto& w : rn.cores.front().slices) w = rn.left_boundary.transpose() * w;
  for (auto& w : rn.cores.back().slices) w = w * rn.right_boundary;
  rn.left_boundary = Vector::Ones(1);
  rn.right_boundary = Vector::Ones(1);

  for (std::size_t k = 0; k + 1 < k_sites; ++k) {
    auto& core = rn.cores[k];
    const auto dl = static_cast<Eigen::Index>(core.left_dim());
    const auto dr = static_cast<Eigen::Index>(core.right_dim());
    Matrix stacked(dl * Eigen::Index(p), dr);
    for (std::size_t i = 0; i < p; ++i) stacked.middleRows(Eigen::Index(i) * dl, dl) = core.slices[i];
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const Eigen::Index r = std::min(stacked.rows(), dr);
    const Matrix q = qr.householderQ() * Matrix::Identity(stacked.rows(), r);
    const Matrix rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (std::size_t i = 0; i < p; ++i) core.slices[i] = q.middleRows(Eigen::Index(i) * dl, dl);
    for (auto& w : rn.cores[k + 1].slices) w = rmat * w;
  }

  EntropyReport report;
  report.spectra.resize(k_sites > 0 ? k_sites - 1 : 0);
  report.entropies.resize(report.spectra.size());
  for (std::size_t k = k_sites; k-- > 1;) {
    auto& core = rn.cores[k];
    const auto dl = static_cast<Eigen::Index>(core.left_dim());
    const auto dr = static_cast<Eigen::Index>(core.right_dim());
    Matrix wide(dl, dr * Eigen::Index(p));
    for (std::size_t i = 0; i < p; ++i) wide.middleCols(Eigen::Index(i) * dr, dr) = core.slices[i];
    auto svd = svd_truncate(wide, policy.cutoff, policy.max_bond);
    std::vector<double> kept = svd.s.values;
    if (policy.renormalize) {
      const double retained = svd.s.retained_weight();
      if (retained > 0.0) {
        const double scale = std::sqrt((retained + svd.s.discarded_weight) / retained);
        for (auto& v : kept) v *= scale;
      }
    }
    const auto r = static_cast<Eigen::Index>(kept.size());
    for (std::size_t i = 0; i < p; ++i) core.slices[i] = svd.v.middleCols(Eigen::Index(i) * dr, dr);
    RealVector sv(r);
    for (Eigen::Index j = 0; j < r; ++j) sv(j) = kept[static_cast<std::size_t>(j)];
    const Matrix us = svd.u * sv.cast<Complex>().asDiagonal();
    for (auto& w : rn.cores[k - 1].slices) w = w * us;

    report.total_discarded += svd.s.discarded_weight;
    report.entropies[k - 1] = von_neumann_entropy(svd.s);
    report.spectra[k - 1] = std::move(svd.s);
  }
  report.max_bond_dim = rn.max_bond();
  return {std::move(rn), std::move(report)};
}

Trajectory contract_system(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid) {
  return contract_system(rn, model, grid, model.rho_system, 0.0);
}

Trajectory contract_system(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid,
                           const Matrix& rho_start, double t_start) {
  rn.check();
  check_metadata(rn, model, grid);
  if (static_cast<std::size_t>(rho_start.rows()) != model.d_system() || rho_start.cols() != rho_start.rows())
    throw DimensionError("contract_system: starting state has wrong dimension");

  const auto factors = interaction_factorize(model, grid.tau());
  const auto free = free_propagator(model, grid.tau());
  std::vector<Matrix> system_steps;
  system_steps.reserve(factors.size());
  for (const auto& pair : factors.pairs) system_steps.push_back(free.system.matrix * pair.system);

  const auto env = zero_branch_right_envs(rn);

  Trajectory out;
  Matrix x = vectorize(rho_start) * rn.left_boundary.transpose();  // d_S^2 x D_k
  out.times.push_back(t_start);
  out.states.push_back(devectorize(Vector(x * env[0])));
  for (std::size_t k = 0; k < rn.sites(); ++k) {
    const auto& core = rn.cores[k];
    Matrix next = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(core.right_dim()));
    for (std::size_t i = 0; i < core.phys_dim(); ++i)
      next.noalias() += system_steps[i] * x * core.slices[i];
    x = std::move(next);
    out.times.push_back(t_start + grid.time(k + 1));
    out.states.push_back(devectorize(Vector(x * env[k + 1])));
  }
  return out;
}

double norm_squared(const ReservoirNetwork& rn) {
  rn.check();
  Matrix env = rn.left_boundary * rn.left_boundary.adjoint();
  for (const auto& core : rn.cores) env = left_transfer(core, env);
  const Complex v = rn.right_boundary.transpose() * env * rn.right_boundary.conjugate();
  return v.real();
}

ReservoirNetwork normalize(const ReservoirNetwork& rn) {
  const double n2 = norm_squared(rn);
  if (!(n2 > 0.0)) throw ValidationError("normalize: network has zero norm");
  ReservoirNetwork out = rn;
  out.left_boundary /= std::sqrt(n2);
  return out;
}

Matrix reduced_density(const ReservoirNetwork& input, std::span<const std::size_t> sites,
                       const NetworkLimits& limits) {
  input.check();
  if (sites.empty()) throw UsageError("reduced_density: no sites selected");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] >= input.sites()) throw UsageError("reduced_density: site out of range");
    if (i > 0 && sites[i] <= sites[i - 1])
      throw UsageError("reduced_density: sites must be sorted and distinct");
  }
  const std::size_t p = input.phys_dim();
  double strings = 1.0;
  for (std::size_t i = 0; i < sites.size(); ++i) strings *= static_cast<double>(p);
  if (strings > static_cast<double>(limits.enumeration_budget))
    throw ResourceError("reduced_density: " + std::to_string(strings) +
                        " index strings exceed enumeration budget " +
                        std::to_string(limits.enumeration_budget));
  const double bond = static_cast<double>(input.max_bond());
  if (strings * strings * bond * bond > static_cast<double>(limits.dense_elements))
    throw ResourceError("reduced_density: window too large for dense environment blocks");

  const ReservoirNetwork rn = normalize(input);
  const std::size_t last = sites.back();

  Matrix right = rn.right_boundary * rn.right_boundary.adjoint();
  for (std::size_t k = rn.sites(); k-- > last + 1;) right = right_transfer(rn.cores[k], right);

  // env[s * n + t] = sum over traced strings of l_s l_t^dagger on the current bond
  std::size_t n = 1;
  std::vector<Matrix> env{rn.left_boundary * rn.left_boundary.adjoint()};
  std::size_t next_kept = 0;
  for (std::size_t k = 0; k <= last; ++k) {
    const auto& core = rn.cores[k];
    if (k == sites[next_kept]) {
      const std::size_t m = n * p;
      std::vector<Matrix> grown(m * m);
      kernels::omp::for_each_index(m * m, [&](std::uint64_t idx) {
        const std::size_t row = idx / m, col = idx % m;
        const std::size_t s = row / p, i = row % p, t = col / p, j = col % p;
        grown[idx] = core.slices[i].transpose() * env[s * n + t] * core.slices[j].conjugate();
      });
      env = std::move(grown);
      n = m;
      ++next_kept;
    } else {
      kernels::omp::for_each_index(env.size(), [&](std::uint64_t idx) {
        env[idx] = left_transfer(core, env[idx]);
      });
    }
  }

  Matrix rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t)
      rho(Eigen::Index(s), Eigen::Index(t)) = env[s * n + t].cwiseProduct(right).sum();
  return 0.5 * (rho + rho.adjoint());
}

Matrix rpdm(const ReservoirNetwork& rn, SiteRange window, const NetworkLimits& limits) {
  if (window.count == 0 || window.end() > rn.sites()) throw UsageError("rpdm: window out of range");
  std::vector<std::size_t> sites(window.count);
  for (std::size_t i = 0; i < window.count; ++i) sites[i] = window.first + i;
  return reduced_density(rn, sites, limits);
}

double mutual_information(const ReservoirNetwork& rn, SiteRange a, SiteRange b,
                          const NetworkLimits& limits) {
  if (a.count == 0 || b.count == 0) throw UsageError("mutual_information: empty window");
  if (a.first < b.end() && b.first < a.end())
    throw UsageError("mutual_information: windows overlap");
  if (b.first < a.first) std::swap(a, b);
  std::vector<std::size_t> both;
  for (std::size_t i = a.first; i < a.end(); ++i) both.push_back(i);
  for (std::size_t i = b.first; i < b.end(); ++i) both.push_back(i);
  const double sa = von_neumann_entropy(rpdm(rn, a, limits));
  const double sb = von_neumann_entropy(rpdm(rn, b, limits));
  const double sab = von_neumann_entropy(reduced_density(rn, both, limits));
  return sa + sb - sab;
}

ReservoirNetwork tail_cut(const ReservoirNetwork& rn, std::size_t keep_last) {
  rn.check();
  if (keep_last == 0 || keep_last > rn.sites())
    throw UsageError("tail_cut: keep_last must be in [1, " + std::to_string(rn.sites()) + "]");
  if (keep_last == rn.sites()) return rn;
  const std::size_t cut = rn.sites() - keep_last;

  Vector closure = rn.left_boundary;
  for (std::size_t k = 0; k < cut; ++k) closure = row_times(closure, rn.cores[k].slices[0]);
  const auto env = zero_branch_right_envs(rn);
  const Complex overlap = closure.transpose() * env[cut];
  if (std::abs(overlap) == 0.0) throw ValidationError("tail_cut: closure has zero overlap");

  ReservoirNetwork out = rn;
  out.cores.assign(rn.cores.begin() + static_cast<std::ptrdiff_t>(cut), rn.cores.end());
  out.left_boundary = closure / overlap;
  out.first_step = rn.first_step + cut;
  return out;
}

Matrix evolve_with_tail_cut(const ReservoirNetwork& rn, const ModelSpec& model, const TimeGrid& grid,
                            std::size_t keep_last) {
  const Trajectory full = contract_system(rn, model, grid);
  if (keep_last == rn.sites()) return full.final_state();
  const ReservoirNetwork tail = tail_cut(rn, keep_last);
  const std::size_t cut = rn.sites() - keep_last;
  const Trajectory rest = contract_system(tail, model, TimeGrid(grid.tau(), keep_last),
                                          full.states[cut], full.times[cut]);
  return rest.final_state();
}

ReservoirNetwork coarse_grain(const ReservoirNetwork& rn, std::size_t block) {
  rn.check();
  if (block == 0 || rn.sites() % block != 0)
    throw UsageError("coarse_grain: block must be a positive divisor of " + std::to_string(rn.sites()));
  if (block == 1) return rn;

  const std::size_t p = rn.phys_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(block));
  ReservoirNetwork out = rn;
  out.cores.clear();
  for (std::size_t g = 0; g < rn.sites() / block; ++g) {
    const std::size_t base = g * block;
    SiteTensor merged;
    merged.slices.resize(p);
    Matrix zero = rn.cores[base].slices[0];
    for (std::size_t j = 1; j < block; ++j) zero = zero * rn.cores[base + j].slices[0];
    merged.slices[0] = zero;
    for (std::size_t i = 1; i < p; ++i) {
      Matrix sum = Matrix::Zero(zero.rows(), zero.cols());
      for (std::size_t pos = 0; pos < block; ++pos) {
        Matrix prod = rn.cores[base].slices[pos == 0 ? i : 0];
        for (std::size_t j = 1; j < block; ++j) prod = prod * rn.cores[base + j].slices[pos == j ? i : 0];
        sum += prod;
      }
      merged.slices[i] = scale * sum;
    }
    out.cores.push_back(std::move(merged));
  }
  out.tau = rn.tau * static_cast<double>(block);
  out.first_step = rn.first_step / block;
  return out;
}

Complex two_point_correlation(const ReservoirNetwork& rn, std::size_t site1, int index1,
                              std::size_t site2, int index2) {
  rn.check();
  if (site1 >= site2 || site2 >= rn.sites())
    throw UsageError("two_point_correlation: need site1 < site2 < sites()");
  const int p = static_cast<int>(rn.phys_dim());
  if (index1 < 0 || index1 >= p || index2 < 0 || index2 >= p)
    throw UsageError("two_point_correlation: index out of range [0, 2n]");
  std::vector<int> zeros(rn.sites(), 0);
  std::vector<int> pinned = zeros;
  pinned[site1] = index1;
  pinned[site2] = index2;
  const Complex denom = rn.amplitude(zeros);
  if (std::abs(denom) == 0.0) throw ValidationError("two_point_correlation: zero reference amplitude");
  return rn.amplitude(pinned) / denom;
}

Complex normalized_two_point_correlation(const ReservoirNetwork& rn, std::size_t site1, int index1,
                                         std::size_t site2, int index2) {
  const Complex raw = two_point_correlation(rn, site1, index1, site2, index2);
  const double w = std::sqrt(rn.gamma * rn.tau);
  const int nonzero = (index1 != 0) + (index2 != 0);
  const double weight = std::pow(w, nonzero);
  if (weight == 0.0) return {0.0, 0.0};
  return raw / weight;
}

}  // namespace rnet
