#pragma once

// Dense reference evolutions of the joint system (x) reservoir state, used to
// validate every reservoir-network result at small dimensions.

#include <cstddef>
#include <optional>

#include "rnet/liouville.hpp"
#include "rnet/trajectory.hpp"

namespace rnet {

struct OracleResult {
  Trajectory trajectory;
  std::optional<Matrix> final_joint;
};

enum class InteractionMode { exact, factorized };

struct OracleLimits {
  std::size_t max_joint_dim = 64;
};

/// rho(t_k) = e^{-iHt_k} rho(0) e^{iHt_k}, one propagator for the step size.
OracleResult evolve_exact(const ModelSpec& model, const TimeGrid& grid, const OracleLimits& limits = {});

/// Per step: the interaction map, then free evolution. Factorized mode uses the
/// first-order sum of factor pairs; exact mode conjugates by exp(-i tau H_int).
OracleResult evolve_trotter_dense(const ModelSpec& model, const TimeGrid& grid, InteractionMode mode,
                                  const OracleLimits& limits = {});

Matrix partial_trace_reservoir(const Matrix& joint, std::size_t d_system, std::size_t d_reservoir);

}  // namespace rnet
