#pragma once

#include <vector>

#include "rnet/tensor.hpp"

namespace rnet {

/// System density matrices rho_S(t_k), one per recorded time.
struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;

  std::size_t size() const noexcept { return states.size(); }
  const Matrix& final_state() const { return states.back(); }
};

/// Trace distance at every common time.
std::vector<double> trace_distances(const Trajectory& a, const Trajectory& b);
double max_trace_distance(const Trajectory& a, const Trajectory& b);

}  // namespace rnet
