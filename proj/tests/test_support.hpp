#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rnet/liouville.hpp"
#include "rnet/tensor.hpp"

namespace rnet::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex{g(rng), g(rng)};
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
  Matrix g = random_matrix(rng, d, d);
  return 0.5 * (g + g.adjoint());
}

inline Matrix random_density(std::mt19937_64& rng, Eigen::Index d) {
  Matrix g = random_matrix(rng, d, d);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_unitary(std::mt19937_64& rng, Eigen::Index d) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d, d));
  return qr.householderQ() * Matrix::Identity(d, d);
}

// Row-major flattening of a split-order joint state and its inverse.
inline Vector to_split_vector(const Matrix& split) { return split.transpose().reshaped(split.size(), 1); }
inline Matrix from_split_vector(const Vector& v, std::size_t ds, std::size_t dr) {
  const auto rows = static_cast<Eigen::Index>(ds * ds), cols = static_cast<Eigen::Index>(dr * dr);
  return v.reshaped(cols, rows).transpose();
}

inline Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// exp(-i t H) for Hermitian H through its eigenbasis, independent of
// matrix_exponential.
inline Matrix unitary_from_eigen(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases = (Complex{0.0, -t} * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Builds the first-order interaction step directly on the joint Liouville
// space in natural order: I - i tau H (x) I + i tau I (x) H^T, with
// H = gamma sum A_i (x) B_i. Returned in split order.
inline Matrix first_order_interaction(const ModelSpec& m, double tau) {
  const auto ds = static_cast<Eigen::Index>(m.d_system());
  const auto dr = static_cast<Eigen::Index>(m.d_reservoir());
  const Eigen::Index d = ds * dr;
  Matrix h = Matrix::Zero(d, d);
  for (const auto& c : m.couplings) h += m.gamma * kron(c.system, c.reservoir);
  const Matrix id = Matrix::Identity(d, d);
  Matrix natural = Matrix::Identity(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index e = 0; e < d; ++e)
          natural(a * d + b, c * d + e) +=
              Complex{0.0, -tau} * h(a, c) * id(b, e) + Complex{0.0, tau} * id(a, c) * h(e, b);
  // Index map (s,r,s',r') -> (s,s',r,r') done by hand, independent of natural_to_split.
  Matrix split(d * d, d * d);
  auto pos = [&](Eigen::Index a, Eigen::Index b) {
    const Eigen::Index s = a / dr, r = a % dr, sp = b / dr, rp = b % dr;
    return (s * ds + sp) * dr * dr + r * dr + rp;
  };
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index e = 0; e < d; ++e) split(pos(a, b), pos(c, e)) = natural(a * d + b, c * d + e);
  return split;
}

// log-log least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rnet::testing
