#include "rnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "rnet/errors.hpp"
#include "rnet/kernels.hpp"

namespace rnet {

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

void check_extents(const Shape& shape) {
  for (auto e : shape)
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape));
}

// Row-major strides.
std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

// Advances a row-major multi-index; returns false after the last element.
bool advance(std::vector<std::size_t>& index, const Shape& shape) {
  for (std::size_t axis = index.size(); axis-- > 0;) {
    if (++index[axis] < shape[axis]) return true;
    index[axis] = 0;
  }
  return false;
}

struct ContractionPlan {
  std::vector<std::size_t> free_a, free_b, paired_a, paired_b;
  Shape result_shape;
};

ContractionPlan plan_contraction(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs) {
  ContractionPlan plan;
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (const auto& p : pairs) {
    if (p.a_axis >= a.rank() || p.b_axis >= b.rank())
      throw DimensionError("contract: axis pair out of range");
    if (used_a[p.a_axis] || used_b[p.b_axis])
      throw DimensionError("contract: axis paired more than once");
    if (a.extent(p.a_axis) != b.extent(p.b_axis)) {
      std::ostringstream os;
      os << "contract: extent mismatch on axes (" << p.a_axis << ',' << p.b_axis << "): "
         << a.extent(p.a_axis) << " vs " << b.extent(p.b_axis);
      throw DimensionError(os.str());
    }
    used_a[p.a_axis] = used_b[p.b_axis] = true;
    plan.paired_a.push_back(p.a_axis);
    plan.paired_b.push_back(p.b_axis);
  }
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      plan.free_a.push_back(i);
      plan.result_shape.push_back(a.extent(i));
    }
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      plan.free_b.push_back(i);
      plan.result_shape.push_back(b.extent(i));
    }
  return plan;
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(product(shape_), Complex{0.0, 0.0});
}

Tensor::Tensor(Shape shape, std::vector<Complex> entries)
    : shape_(std::move(shape)), data_(std::move(entries)) {
  check_extents(shape_);
  if (data_.size() != product(shape_))
    throw DimensionError("tensor of shape " + shape_string(shape_) + " needs " +
                         std::to_string(product(shape_)) + " entries, got " +
                         std::to_string(data_.size()));
  for (const auto& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ValidationError("tensor entries must be finite");
}

Tensor Tensor::from_matrix(const Matrix& m) {
  std::vector<Complex> entries(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      entries[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                std::move(entries));
}

Tensor Tensor::from_vector(const Vector& v) {
  return Tensor({static_cast<std::size_t>(v.size())}, std::vector<Complex>(v.begin(), v.end()));
}

Tensor Tensor::scalar(Complex value) { return Tensor({}, {value}); }

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != rank()) throw DimensionError("tensor index has wrong rank");
  std::size_t flat = 0;
  for (std::size_t axis = 0; axis < rank(); ++axis) {
    if (index[axis] >= shape_[axis]) throw DimensionError("tensor index out of range");
    flat = flat * shape_[axis] + index[axis];
  }
  return flat;
}

Complex& Tensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
const Complex& Tensor::at(std::span<const std::size_t> index) const {
  return data_[flat_index(index)];
}

Tensor Tensor::reshape(Shape shape) const {
  check_extents(shape);
  if (product(shape) != size())
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

Tensor Tensor::permute(std::span<const std::size_t> axes) const {
  if (axes.size() != rank()) throw DimensionError("permute: wrong number of axes");
  std::vector<bool> seen(rank(), false);
  for (auto ax : axes) {
    if (ax >= rank() || seen[ax]) throw DimensionError("permute: axes are not a permutation");
    seen[ax] = true;
  }
  Shape new_shape(rank());
  for (std::size_t i = 0; i < rank(); ++i) new_shape[i] = shape_[axes[i]];
  const auto old_strides = strides_of(shape_);
  std::vector<std::size_t> src_strides(rank());
  for (std::size_t i = 0; i < rank(); ++i) src_strides[i] = old_strides[axes[i]];

  Tensor out(new_shape);
  std::vector<std::size_t> index(rank(), 0);
  std::size_t dst = 0;
  do {
    std::size_t src = 0;
    for (std::size_t i = 0; i < rank(); ++i) src += index[i] * src_strides[i];
    out.data_[dst++] = data_[src];
  } while (advance(index, new_shape));
  return out;
}

Matrix Tensor::to_matrix() const {
  if (rank() != 2) throw DimensionError("to_matrix needs a rank-2 tensor");
  Matrix m(static_cast<Eigen::Index>(shape_[0]), static_cast<Eigen::Index>(shape_[1]));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = data_[static_cast<std::size_t>(i * m.cols() + j)];
  return m;
}

Vector Tensor::to_vector() const {
  if (rank() != 1) throw DimensionError("to_vector needs a rank-1 tensor");
  Vector v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v(static_cast<Eigen::Index>(i)) = data_[i];
  return v;
}

double Tensor::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs) {
  const auto plan = plan_contraction(a, b, pairs);

  std::vector<std::size_t> order_a = plan.free_a;
  order_a.insert(order_a.end(), plan.paired_a.begin(), plan.paired_a.end());
  std::vector<std::size_t> order_b = plan.paired_b;
  order_b.insert(order_b.end(), plan.free_b.begin(), plan.free_b.end());
  const Tensor pa = a.permute(order_a);
  const Tensor pb = b.permute(order_b);

  std::size_t m = 1, k = 1, n = 1;
  for (auto ax : plan.free_a) m *= a.extent(ax);
  for (auto ax : plan.paired_a) k *= a.extent(ax);
  for (auto ax : plan.free_b) n *= b.extent(ax);

  Tensor out(plan.result_shape);
  kernels::omp::gemm(pa.entries(), pb.entries(), out.entries(), m, k, n);
  return out;
}

Tensor contract_reference(const Tensor& a, const Tensor& b, std::span<const AxisPair> pairs) {
  const auto plan = plan_contraction(a, b, pairs);
  Shape paired_shape;
  for (auto ax : plan.paired_a) paired_shape.push_back(a.extent(ax));

  Tensor out(plan.result_shape);
  std::vector<std::size_t> ri(plan.result_shape.size(), 0);
  std::vector<std::size_t> ia(a.rank()), ib(b.rank());
  std::size_t flat = 0;
  do {
    for (std::size_t i = 0; i < plan.free_a.size(); ++i) ia[plan.free_a[i]] = ri[i];
    for (std::size_t i = 0; i < plan.free_b.size(); ++i)
      ib[plan.free_b[i]] = ri[plan.free_a.size() + i];
    Complex acc{0.0, 0.0};
    std::vector<std::size_t> pi(paired_shape.size(), 0);
    do {
      for (std::size_t i = 0; i < pi.size(); ++i) {
        ia[plan.paired_a[i]] = pi[i];
        ib[plan.paired_b[i]] = pi[i];
      }
      acc += a.at(ia) * b.at(ib);
    } while (advance(pi, paired_shape));
    out[flat++] = acc;
  } while (advance(ri, plan.result_shape));
  return out;
}

double SchmidtSpectrum::retained_weight() const {
  double w = 0.0;
  for (double v : values) w += v * v;
  return w;
}

std::vector<double> SchmidtSpectrum::probabilities() const {
  const double total = retained_weight();
  std::vector<double> p(values.size(), 0.0);
  if (total <= 0.0) return p;
  for (std::size_t i = 0; i < values.size(); ++i) p[i] = values[i] * values[i] / total;
  return p;
}

SvdResult svd_truncate(const Matrix& m, double cutoff, std::size_t max_rank) {
  if (m.size() == 0) throw DimensionError("svd_truncate: empty matrix");
  if (!(cutoff >= 0.0)) throw ValidationError("svd_truncate: cutoff must be >= 0");
  if (max_rank == 0) throw ValidationError("svd_truncate: max_rank must be positive");

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const auto full = static_cast<std::size_t>(sv.size());

  // tail[r] = sum of squares of values r..full-1
  std::vector<double> tail(full + 1, 0.0);
  for (std::size_t i = full; i-- > 0;) tail[i] = tail[i + 1] + sv(Eigen::Index(i)) * sv(Eigen::Index(i));
  const double total = tail[0];

  std::size_t rank = full;
  if (total > 0.0) {
    const double allowed = cutoff * cutoff * total;
    for (std::size_t r = 1; r <= full; ++r) {
      if (tail[r] <= allowed) {
        rank = r;
        break;
      }
    }
  } else {
    rank = 1;
  }
  rank = std::max<std::size_t>(1, std::min(rank, max_rank));

  SvdResult out;
  const auto r = static_cast<Eigen::Index>(rank);
  out.u = svd.matrixU().leftCols(r);
  out.v = svd.matrixV().leftCols(r).adjoint();
  out.s.values.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) out.s.values[i] = sv(Eigen::Index(i));
  out.s.discarded_weight = tail[rank];
  return out;
}

SvdResult svd_truncate(const Tensor& m, double cutoff, std::size_t max_rank) {
  return svd_truncate(m.to_matrix(), cutoff, max_rank);
}

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exponential: matrix must be square");
  if (m.size() == 0) throw DimensionError("matrix_exponential: empty matrix");
  return m.exp();
}

Tensor matrix_exponential(const Tensor& m) {
  return Tensor::from_matrix(matrix_exponential(m.to_matrix()));
}

RealVector hermitian_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eigenvalues: matrix must be square");
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double shannon_entropy(std::span<const double> p) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * std::log(x);
  return s;
}

double von_neumann_entropy(const Matrix& rho) {
  if (rho.rows() != rho.cols() || rho.size() == 0)
    throw DimensionError("von_neumann_entropy: density operator must be square");
  const double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > 1e-8 * scale)
    throw ValidationError("von_neumann_entropy: operator is not Hermitian");
  const Complex tr = rho.trace();
  if (std::abs(tr - Complex{1.0, 0.0}) > kTraceTolerance)
    throw ValidationError("von_neumann_entropy: trace deviates from 1");
  const RealVector ev = hermitian_eigenvalues(rho);
  std::vector<double> p(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kEigenClip)
      throw ValidationError("von_neumann_entropy: negative eigenvalue " + std::to_string(ev(i)));
    p[static_cast<std::size_t>(i)] = std::max(0.0, ev(i));
  }
  return shannon_entropy(p);
}

double von_neumann_entropy(const Tensor& rho) { return von_neumann_entropy(rho.to_matrix()); }

double von_neumann_entropy(const SchmidtSpectrum& spectrum) {
  const auto p = spectrum.probabilities();
  return shannon_entropy(p);
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace_distance: shape mismatch");
  const RealVector ev = hermitian_eigenvalues(a - b);
  return 0.5 * ev.cwiseAbs().sum();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace rnet
