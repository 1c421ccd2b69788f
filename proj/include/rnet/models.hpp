#pragma once

// Model zoo and model-file ingestion.
//
// Model file (JSON):
//   { "schema_version": "1",
//     "d_S": 2, "d_R": 4,
//     "H_S": [[[re, im], ...], ...], "H_R": ...,
//     "couplings": [ { "A": matrix, "B": matrix }, ... ],
//     "gamma": 1.0,
//     "rho_S0": matrix, "rho_R0": matrix }
// or a preset reference:
//   { "schema_version": "1", "preset": { "name": "desk", "params": { "seed": 7 } } }
// Matrices are row-major nested arrays of [re, im] pairs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rnet/liouville.hpp"

namespace rnet::models {

inline constexpr const char* kSchemaVersion = "1";

struct SpinStarParams {
  std::size_t bath_spins = 2;
  /// One interaction term per letter from "xyz": sigma_a (x) mean_k sigma_a^(k).
  std::string coupling = "x";
  double gamma = 1.0;
  double system_field = 1.0;       // (w/2) sigma_z on the system
  double system_tunneling = 0.0;   // (d/2) sigma_x on the system
  double bath_field = 1.0;         // (w_k/2) sigma_z^(k), w_k = bath_field (1 + k spread)
  double bath_spread = 0.0;
  double bath_exchange = 0.0;      // J sum_k sigma_x^(k) sigma_x^(k+1)
};

/// Qubit coupled to a star of bath spins. The system starts in |+>, the bath in
/// the maximally mixed state.
ModelSpec spin_star(const SpinStarParams& params);

/// GUE-style Hermitian operators scaled to unit operator norm, a random pure
/// system state and a random mixed reservoir state. Deterministic in `seed`.
ModelSpec random_model(std::uint64_t seed, std::size_t d_system, std::size_t d_reservoir,
                       std::size_t terms, double gamma = 1.0);

using PresetParams = std::map<std::string, double>;

/// Named presets:
///   desk       random_model(seed=7, d_S=2, d_R=4, n=1, gamma=1)
///   fast_bath  desk-sized random model whose H_R is scaled by omega_r (default 4), seed 11
///   spin_star  spin_star() with every SpinStarParams field overridable
///   dephasing  spin_star with zz coupling and no transverse terms
///   free       desk with gamma = 0
ModelSpec preset(const std::string& name, const PresetParams& params = {});
std::vector<std::string> preset_names();

double operator_norm(const Matrix& hermitian);

ModelSpec parse_model_text(const std::string& text, const std::string& source = "<string>");
ModelSpec parse_model(const std::filesystem::path& path);
std::string model_to_text(const ModelSpec& spec);
void write_model(const ModelSpec& spec, const std::filesystem::path& path);

}  // namespace rnet::models
