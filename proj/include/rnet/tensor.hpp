#pragma once

// Dense complex multiway arrays and the handful of linear-algebra primitives
// the rest of the library is built on.

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rnet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

using Shape = std::vector<std::size_t>;

/// Row-major dense complex tensor. Extents are positive; a rank-0 tensor holds
/// one scalar. Entries are finite.
class Tensor {
 public:
  Tensor() : data_(1, Complex{0.0, 0.0}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Complex> entries);

  static Tensor from_matrix(const Matrix& m);
  static Tensor from_vector(const Vector& v);
  static Tensor scalar(Complex value);

  std::size_t rank() const noexcept { return shape_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  Complex& at(std::span<const std::size_t> index);
  const Complex& at(std::span<const std::size_t> index) const;
  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }

  Tensor reshape(Shape shape) const;
  Tensor permute(std::span<const std::size_t> axes) const;

  /// Rank-2 tensors only.
  Matrix to_matrix() const;
  /// Rank-1 tensors only.
  Vector to_vector() const;

  double frobenius_norm() const;

 private:
  std::size_t flat_index(std::span<const std::size_t> index) const;

  Shape shape_;
  std::vector<Complex> data_;
};

struct AxisPair {
  std::size_t a_axis;
  std::size_t b_axis;
};

/// Sum over the paired axes. Result axes are the unpaired axes of `a` followed
/// by the unpaired axes of `b`, each in original order.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs);

/// Same contraction computed with nested loops over every index; kept as the
/// oracle for `contract`.
Tensor contract_reference(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs);

/// Singular values retained by a truncation, largest first.
struct SchmidtSpectrum {
  std::vector<double> values;
  /// Sum of squares of the discarded singular values.
  double discarded_weight = 0.0;

  std::size_t rank() const noexcept { return values.size(); }
  double retained_weight() const;
  /// Squared values scaled to sum to one.
  std::vector<double> probabilities() const;
};

inline constexpr std::size_t kUnboundedRank = std::numeric_limits<std::size_t>::max();

struct SvdResult {
  Matrix u;  // m x r, orthonormal columns
  SchmidtSpectrum s;
  Matrix v;  // r x n, orthonormal rows
};

/// Keeps the smallest rank r with discarded/total squared weight <= cutoff^2,
/// then caps it at max_rank. At least one value is always kept.
SvdResult svd_truncate(const Matrix& m, double cutoff, std::size_t max_rank = kUnboundedRank);
SvdResult svd_truncate(const Tensor& m, double cutoff, std::size_t max_rank = kUnboundedRank);

Matrix matrix_exponential(const Matrix& m);
Tensor matrix_exponential(const Tensor& m);

inline constexpr double kEigenClip = 1e-10;
inline constexpr double kTraceTolerance = 1e-8;

/// -sum p ln p over the eigenvalues of a density operator. Eigenvalues in
/// [-1e-10, 0) are clipped; anything more negative is rejected.
double von_neumann_entropy(const Matrix& rho);
double von_neumann_entropy(const Tensor& rho);
/// Entropy of the normalized squared spectrum.
double von_neumann_entropy(const SchmidtSpectrum& spectrum);
/// Entropy of a probability vector (zeros skipped).
double shannon_entropy(std::span<const double> p);

/// Eigenvalues of a Hermitian matrix, ascending.
RealVector hermitian_eigenvalues(const Matrix& m);

/// Half the trace norm of a - b (Hermitian inputs).
double trace_distance(const Matrix& a, const Matrix& b);

/// Kronecker product with `a` indexing the slow factor.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace rnet
