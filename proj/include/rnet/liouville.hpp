#pragma once

// Liouville-space machinery: vectorized density matrices, superoperators for
// free and interaction dynamics, and the split of the interaction step into a
// sum of system-factor (x) reservoir-factor products.
//
// Conventions
//   vectorize: |rho>[i*d + j] = rho(i, j), so A rho B <-> (A kron B^T)|rho>.
//   Joint states are kept in "split" order (s, s', r, r'): system ket/bra first,
//   reservoir ket/bra second. A joint vectorized state in split order is a
//   d_S^2 x d_R^2 matrix M with M[(s,s'),(r,r')] = rho[(s,r),(s',r')].

#include <cstddef>
#include <vector>

#include "rnet/tensor.hpp"

namespace rnet {

struct CouplingTerm {
  Matrix system;     // A_i, d_S x d_S Hermitian
  Matrix reservoir;  // B_i, d_R x d_R Hermitian
};

/// H = H_S (x) I + I (x) H_R + gamma * sum_i A_i (x) B_i, rho(0) = rho_S (x) rho_R.
struct ModelSpec {
  Matrix h_system;
  Matrix h_reservoir;
  std::vector<CouplingTerm> couplings;
  double gamma = 0.0;
  Matrix rho_system;
  Matrix rho_reservoir;

  std::size_t d_system() const { return static_cast<std::size_t>(h_system.rows()); }
  std::size_t d_reservoir() const { return static_cast<std::size_t>(h_reservoir.rows()); }
  std::size_t terms() const { return couplings.size(); }

  /// Throws ValidationError naming the offending field.
  void validate() const;

  Matrix interaction_hamiltonian() const;
  Matrix free_hamiltonian() const;
  Matrix total_hamiltonian() const;
  Matrix initial_joint_state() const;
};

inline constexpr double kModelTolerance = 1e-10;

class TimeGrid {
 public:
  TimeGrid(double tau, std::size_t steps);
  /// Requires total/tau to be an integer up to rounding noise.
  static TimeGrid from_total(double total, double tau);

  double tau() const noexcept { return tau_; }
  std::size_t steps() const noexcept { return steps_; }
  double total() const noexcept { return tau_ * static_cast<double>(steps_); }
  double time(std::size_t step) const noexcept { return tau_ * static_cast<double>(step); }

 private:
  double tau_;
  std::size_t steps_;
};

struct SuperOperator {
  std::size_t dim = 0;  // underlying Hilbert dimension
  Matrix matrix;        // dim^2 x dim^2
  /// Nonzero for joint operators stored in split order; holds d_S.
  std::size_t split_system = 0;

  Vector apply(const Vector& v) const { return matrix * v; }
  /// max |<tr| M - <tr|| over components.
  double trace_defect() const;
};

Vector vectorize(const Matrix& rho);
Matrix devectorize(const Vector& v);
/// Vectorized identity: <tr|v> = trace of the devectorized v.
Vector trace_functional(std::size_t dim);

/// A rho B as a superoperator: A kron B^T.
Matrix sandwich(const Matrix& left, const Matrix& right);
/// U rho U^dagger as a superoperator: U kron conj(U).
SuperOperator conjugation(const Matrix& unitary);

struct FreePropagators {
  SuperOperator system;
  SuperOperator reservoir;
};

/// exp[-i tau H] (x) exp[i tau H*] for H_S and H_R separately.
FreePropagators free_propagator(const ModelSpec& model, double tau);

/// Exact interaction step exp[-i tau H_int] (x) exp[i tau H_int*] in split order.
SuperOperator interaction_exact(const ModelSpec& model, double tau);

struct FactorPair {
  Matrix system;     // calA_i, d_S^2 x d_S^2
  Matrix reservoir;  // calB_i, d_R^2 x d_R^2
};

/// 2n+1 pairs whose Kronecker sum is the first-order interaction step.
///   pair 0:        (I, I)
///   pair i<=n:     ( sqrt(g t) A_i (x) I,  -i sqrt(g t) B_i (x) I )
///   pair n+i:      ( sqrt(g t) I (x) A_i*, +i sqrt(g t) I (x) B_i* )
struct InteractionFactorization {
  std::vector<FactorPair> pairs;
  double tau = 0.0;
  double gamma = 0.0;

  std::size_t size() const noexcept { return pairs.size(); }
  /// sum_i calA_i (x) calB_i, split order.
  Matrix sum() const;
  /// M -> sum_i calA_i M calB_i^T on a split-order joint state.
  Matrix apply(const Matrix& joint) const;
};

InteractionFactorization interaction_factorize(const ModelSpec& model, double tau);

/// Permutes a superoperator on the joint space from natural (s,r,s',r') to split order.
Matrix natural_to_split(const Matrix& superop, std::size_t d_system, std::size_t d_reservoir);

/// Joint density matrix -> split-order d_S^2 x d_R^2 matrix, and back.
Matrix split_state(const Matrix& rho_joint, std::size_t d_system, std::size_t d_reservoir);
Matrix join_state(const Matrix& split, std::size_t d_system, std::size_t d_reservoir);
/// Partial trace over the reservoir of a split-order joint state.
Matrix reduce_to_system(const Matrix& split, std::size_t d_system, std::size_t d_reservoir);

}  // namespace rnet
