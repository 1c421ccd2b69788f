#include "rnet/liouville.hpp"

#include <cmath>
#include <string>

#include "rnet/errors.hpp"

namespace rnet {

namespace {

const Complex kI{0.0, 1.0};

void require_square(const Matrix& m, const std::string& field) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw ValidationError(field + ": must be a non-empty square matrix");
}

void require_hermitian(const Matrix& m, const std::string& field) {
  require_square(m, field);
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (defect > kModelTolerance)
    throw ValidationError(field + ": not Hermitian (max |M - M^dagger| = " +
                          std::to_string(defect) + ")");
}

void require_density(const Matrix& m, const std::string& field) {
  require_hermitian(m, field);
  const Complex tr = m.trace();
  if (std::abs(tr - Complex{1.0, 0.0}) > kModelTolerance)
    throw ValidationError(field + ": trace must be 1 (got " + std::to_string(tr.real()) + ")");
  const RealVector ev = hermitian_eigenvalues(m);
  if (ev.minCoeff() < -kModelTolerance)
    throw ValidationError(field + ": negative eigenvalue " + std::to_string(ev.minCoeff()));
}

void require_dim(const Matrix& m, std::size_t d, const std::string& field) {
  if (static_cast<std::size_t>(m.rows()) != d || static_cast<std::size_t>(m.cols()) != d)
    throw ValidationError(field + ": expected " + std::to_string(d) + "x" + std::to_string(d));
}

Matrix identity(std::size_t d) {
  return Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

}  // namespace

void ModelSpec::validate() const {
  require_hermitian(h_system, "H_S");
  require_hermitian(h_reservoir, "H_R");
  const std::size_t ds = d_system(), dr = d_reservoir();
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    const std::string idx = "couplings[" + std::to_string(i) + "]";
    require_dim(couplings[i].system, ds, idx + ".A");
    require_hermitian(couplings[i].system, idx + ".A");
    require_dim(couplings[i].reservoir, dr, idx + ".B");
    require_hermitian(couplings[i].reservoir, idx + ".B");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ValidationError("gamma: must be finite and >= 0");
  require_dim(rho_system, ds, "rho_S0");
  require_density(rho_system, "rho_S0");
  require_dim(rho_reservoir, dr, "rho_R0");
  require_density(rho_reservoir, "rho_R0");
}

Matrix ModelSpec::interaction_hamiltonian() const {
  const auto d = static_cast<Eigen::Index>(d_system() * d_reservoir());
  Matrix h = Matrix::Zero(d, d);
  for (const auto& c : couplings) h += gamma * kron(c.system, c.reservoir);
  return h;
}

Matrix ModelSpec::free_hamiltonian() const {
  return kron(h_system, identity(d_reservoir())) + kron(identity(d_system()), h_reservoir);
}

Matrix ModelSpec::total_hamiltonian() const {
  return free_hamiltonian() + interaction_hamiltonian();
}

Matrix ModelSpec::initial_joint_state() const { return kron(rho_system, rho_reservoir); }

TimeGrid::TimeGrid(double tau, std::size_t steps) : tau_(tau), steps_(steps) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau: must be > 0");
  if (steps == 0) throw ValidationError("steps: must be positive");
}

TimeGrid TimeGrid::from_total(double total, double tau) {
  if (!(tau > 0.0)) throw ValidationError("tau: must be > 0");
  if (!(total > 0.0)) throw ValidationError("T: must be > 0");
  const double ratio = total / tau;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
    throw ValidationError("T/tau must be a positive integer");
  return TimeGrid(tau, static_cast<std::size_t>(steps));
}

double SuperOperator::trace_defect() const {
  Vector tr = trace_functional(dim);
  if (split_system != 0) {
    const Vector ts = trace_functional(split_system), tr_r = trace_functional(dim / split_system);
    tr = kron(ts, tr_r);
  }
  const Vector row = matrix.transpose() * tr;  // <tr| M as a column
  return (row - tr).cwiseAbs().maxCoeff();
}

Vector vectorize(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw DimensionError("vectorize: matrix must be square");
  const auto d = rho.rows();
  Vector v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
  return v;
}

Matrix devectorize(const Vector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size() || d == 0)
    throw DimensionError("devectorize: length " + std::to_string(v.size()) +
                         " is not a perfect square");
  Matrix rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rho(i, j) = v(i * d + j);
  return rho;
}

Vector trace_functional(std::size_t dim) { return vectorize(identity(dim)); }

Matrix sandwich(const Matrix& left, const Matrix& right) {
  return kron(left, right.transpose());
}

SuperOperator conjugation(const Matrix& unitary) {
  return {static_cast<std::size_t>(unitary.rows()), kron(unitary, unitary.conjugate())};
}

FreePropagators free_propagator(const ModelSpec& model, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("tau: must be >= 0");
  const Matrix us = matrix_exponential(Matrix(-kI * tau * model.h_system));
  const Matrix ur = matrix_exponential(Matrix(-kI * tau * model.h_reservoir));
  return {conjugation(us), conjugation(ur)};
}

SuperOperator interaction_exact(const ModelSpec& model, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("tau: must be >= 0");
  const Matrix u = matrix_exponential(Matrix(-kI * tau * model.interaction_hamiltonian()));
  const SuperOperator natural = conjugation(u);
  return {natural.dim, natural_to_split(natural.matrix, model.d_system(), model.d_reservoir()), model.d_system()};
}

Matrix InteractionFactorization::sum() const {
  Matrix total = kron(pairs.front().system, pairs.front().reservoir);
  for (std::size_t i = 1; i < pairs.size(); ++i)
    total += kron(pairs[i].system, pairs[i].reservoir);
  return total;
}

Matrix InteractionFactorization::apply(const Matrix& joint) const {
  Matrix out = Matrix::Zero(joint.rows(), joint.cols());
  for (const auto& p : pairs) out.noalias() += p.system * joint * p.reservoir.transpose();
  return out;
}

InteractionFactorization interaction_factorize(const ModelSpec& model, double tau) {
  if (!(tau > 0.0)) throw ValidationError("tau: must be > 0");
  const std::size_t ds = model.d_system(), dr = model.d_reservoir();
  const Matrix is = identity(ds), ir = identity(dr);
  const double w = std::sqrt(model.gamma * tau);

  InteractionFactorization f;
  f.tau = tau;
  f.gamma = model.gamma;
  f.pairs.reserve(2 * model.terms() + 1);
  f.pairs.push_back({identity(ds * ds), identity(dr * dr)});
  // Left action (H rho): A (x) I on the system, -i B (x) I on the reservoir.
  for (const auto& c : model.couplings)
    f.pairs.push_back({w * kron(c.system, is), (-kI * w) * kron(c.reservoir, ir)});
  // Right action (rho H): I (x) A* and +i I (x) B*.
  for (const auto& c : model.couplings)
    f.pairs.push_back({w * kron(is, c.system.conjugate()),
                       (kI * w) * kron(ir, c.reservoir.conjugate())});
  return f;
}

Matrix natural_to_split(const Matrix& superop, std::size_t ds, std::size_t dr) {
  const std::size_t d = ds * dr;
  if (static_cast<std::size_t>(superop.rows()) != d * d ||
      static_cast<std::size_t>(superop.cols()) != d * d)
    throw DimensionError("natural_to_split: superoperator has wrong size");
  // natural index ((s r),(s' r')) -> split index ((s s'),(r r'))
  std::vector<Eigen::Index> perm(d * d);
  for (std::size_t s = 0; s < ds; ++s)
    for (std::size_t r = 0; r < dr; ++r)
      for (std::size_t sp = 0; sp < ds; ++sp)
        for (std::size_t rp = 0; rp < dr; ++rp) {
          const std::size_t natural = (s * dr + r) * d + (sp * dr + rp);
          const std::size_t split = (s * ds + sp) * dr * dr + (r * dr + rp);
          perm[natural] = static_cast<Eigen::Index>(split);
        }
  const auto n = static_cast<Eigen::Index>(d * d);
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(perm[i], perm[j]) = superop(i, j);
  return out;
}

Matrix split_state(const Matrix& rho, std::size_t ds, std::size_t dr) {
  const auto d = static_cast<Eigen::Index>(ds * dr);
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("split_state: wrong joint size");
  const auto es = static_cast<Eigen::Index>(ds), er = static_cast<Eigen::Index>(dr);
  Matrix m(es * es, er * er);
  for (Eigen::Index s = 0; s < es; ++s)
    for (Eigen::Index sp = 0; sp < es; ++sp)
      for (Eigen::Index r = 0; r < er; ++r)
        for (Eigen::Index rp = 0; rp < er; ++rp)
          m(s * es + sp, r * er + rp) = rho(s * er + r, sp * er + rp);
  return m;
}

Matrix join_state(const Matrix& m, std::size_t ds, std::size_t dr) {
  const auto es = static_cast<Eigen::Index>(ds), er = static_cast<Eigen::Index>(dr);
  if (m.rows() != es * es || m.cols() != er * er)
    throw DimensionError("join_state: wrong split size");
  Matrix rho(es * er, es * er);
  for (Eigen::Index s = 0; s < es; ++s)
    for (Eigen::Index sp = 0; sp < es; ++sp)
      for (Eigen::Index r = 0; r < er; ++r)
        for (Eigen::Index rp = 0; rp < er; ++rp)
          rho(s * er + r, sp * er + rp) = m(s * es + sp, r * er + rp);
  return rho;
}

Matrix reduce_to_system(const Matrix& m, std::size_t ds, std::size_t dr) {
  if (static_cast<std::size_t>(m.rows()) != ds * ds || static_cast<std::size_t>(m.cols()) != dr * dr)
    throw DimensionError("reduce_to_system: wrong split size");
  return devectorize(Vector(m * trace_functional(dr)));
}

}  // namespace rnet
