#include "rnet/exact_oracle.hpp"

#include <algorithm>
#include <string>

#include "rnet/errors.hpp"

namespace rnet {

namespace {

const Complex kI{0.0, 1.0};

void check_cap(const ModelSpec& model, const OracleLimits& limits) {
  const std::size_t d = model.d_system() * model.d_reservoir();
  if (d > limits.max_joint_dim)
    throw ResourceError("dense oracle: joint dimension " + std::to_string(d) + " exceeds cap " +
                        std::to_string(limits.max_joint_dim));
}

}  // namespace

std::vector<double> trace_distances(const Trajectory& a, const Trajectory& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = trace_distance(a.states[k], b.states[k]);
  return out;
}

double max_trace_distance(const Trajectory& a, const Trajectory& b) {
  const auto d = trace_distances(a, b);
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

Matrix partial_trace_reservoir(const Matrix& joint, std::size_t ds, std::size_t dr) {
  const auto es = static_cast<Eigen::Index>(ds), er = static_cast<Eigen::Index>(dr);
  if (joint.rows() != es * er || joint.cols() != es * er)
    throw DimensionError("partial_trace_reservoir: wrong joint size");
  Matrix out = Matrix::Zero(es, es);
  for (Eigen::Index s = 0; s < es; ++s)
    for (Eigen::Index sp = 0; sp < es; ++sp)
      for (Eigen::Index r = 0; r < er; ++r) out(s, sp) += joint(s * er + r, sp * er + r);
  return out;
}

OracleResult evolve_exact(const ModelSpec& model, const TimeGrid& grid, const OracleLimits& limits) {
  model.validate();
  check_cap(model, limits);
  const std::size_t ds = model.d_system(), dr = model.d_reservoir();
  const Matrix u = matrix_exponential(Matrix(-kI * grid.tau() * model.total_hamiltonian()));
  const Matrix ud = u.adjoint();

  OracleResult out;
  Matrix rho = model.initial_joint_state();
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(model.rho_system);
  for (std::size_t k = 1; k <= grid.steps(); ++k) {
    rho = u * rho * ud;
    out.trajectory.times.push_back(grid.time(k));
    out.trajectory.states.push_back(partial_trace_reservoir(rho, ds, dr));
  }
  out.final_joint = rho;
  return out;
}

OracleResult evolve_trotter_dense(const ModelSpec& model, const TimeGrid& grid, InteractionMode mode,
                                  const OracleLimits& limits) {
  model.validate();
  check_cap(model, limits);
  const std::size_t ds = model.d_system(), dr = model.d_reservoir();

  OracleResult out;
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(model.rho_system);

  if (mode == InteractionMode::exact) {
    const Matrix u_int = matrix_exponential(Matrix(-kI * grid.tau() * model.interaction_hamiltonian()));
    const Matrix u_s = matrix_exponential(Matrix(-kI * grid.tau() * model.h_system));
    const Matrix u_r = matrix_exponential(Matrix(-kI * grid.tau() * model.h_reservoir));
    const Matrix u0 = kron(u_s, u_r);
    const Matrix step = u0 * u_int;
    const Matrix step_d = step.adjoint();
    Matrix rho = model.initial_joint_state();
    for (std::size_t k = 1; k <= grid.steps(); ++k) {
      rho = step * rho * step_d;
      out.trajectory.times.push_back(grid.time(k));
      out.trajectory.states.push_back(partial_trace_reservoir(rho, ds, dr));
    }
    out.final_joint = rho;
    return out;
  }

  const auto factors = interaction_factorize(model, grid.tau());
  const auto free = free_propagator(model, grid.tau());
  const Matrix free_r_t = free.reservoir.matrix.transpose();
  Matrix joint = split_state(model.initial_joint_state(), ds, dr);
  for (std::size_t k = 1; k <= grid.steps(); ++k) {
    joint = free.system.matrix * factors.apply(joint) * free_r_t;
    out.trajectory.times.push_back(grid.time(k));
    out.trajectory.states.push_back(reduce_to_system(joint, ds, dr));
  }
  out.final_joint = join_state(joint, ds, dr);
  return out;
}

}  // namespace rnet
