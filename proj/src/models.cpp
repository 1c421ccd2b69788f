#include "rnet/models.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rnet/errors.hpp"

namespace rnet::models {

namespace {

using nlohmann::json;

const Complex kI{0.0, 1.0};

Matrix pauli(char axis) {
  Matrix m = Matrix::Zero(2, 2);
  switch (axis) {
    case 'x': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = -kI; m(1, 0) = kI; break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw UsageError(std::string("unknown Pauli axis '") + axis + "'");
  }
  return m;
}

Matrix identity(std::size_t d) { return Matrix::Identity(Eigen::Index(d), Eigen::Index(d)); }

// op acting on spin `site` of `count` spins
Matrix embed(const Matrix& op, std::size_t site, std::size_t count) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < count; ++k) out = kron(out, k == site ? op : identity(2));
  return out;
}

Matrix gue(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g{static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = Complex{normal(rng), normal(rng)};
  Matrix h = 0.5 * (g + g.adjoint());
  const double norm = operator_norm(h);
  return norm > 0.0 ? Matrix(h / norm) : h;
}

Matrix random_pure_state(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector psi{static_cast<Eigen::Index>(d)};
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = Complex{normal(rng), normal(rng)};
  psi.normalize();
  return psi * psi.adjoint();
}

Matrix random_mixed_state(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w{static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = Complex{normal(rng), normal(rng)};
  Matrix rho = w * w.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

double param(const PresetParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::size_t count_param(const PresetParams& params, const std::string& key, double fallback) {
  const double v = param(params, key, fallback);
  if (v < 0.0 || v != std::floor(v))
    throw ValidationError("preset parameter '" + key + "' must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

void check_known(const PresetParams& params, std::initializer_list<const char*> known,
                 const std::string& name) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw UsageError("preset '" + name + "': unknown parameter '" + key + "'");
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field + ": not finite");
  return x;
}

Matrix matrix_from_json(const json& v, std::size_t d, const std::string& field) {
  if (!v.is_array() || v.size() != d)
    throw ValidationError(field + ": expected " + std::to_string(d) + " rows");
  Matrix m{static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
  for (std::size_t i = 0; i < d; ++i) {
    const auto& row = v[i];
    if (!row.is_array() || row.size() != d)
      throw ValidationError(field + "[" + std::to_string(i) + "]: expected " + std::to_string(d) +
                            " entries");
    for (std::size_t j = 0; j < d; ++j) {
      const std::string where = field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      const auto& z = row[j];
      if (!z.is_array() || z.size() != 2) throw ValidationError(where + ": expected [re, im]");
      m(Eigen::Index(i), Eigen::Index(j)) = Complex{number(z[0], where), number(z[1], where)};
    }
  }
  return m;
}

const json& required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string(key) + ": missing field");
  return doc.at(key);
}

std::size_t dimension(const json& doc, const char* key) {
  const auto& v = required(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ValidationError(std::string(key) + ": expected a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

double operator_norm(const Matrix& hermitian) {
  const RealVector ev = hermitian_eigenvalues(hermitian);
  return ev.cwiseAbs().maxCoeff();
}

ModelSpec spin_star(const SpinStarParams& p) {
  if (p.bath_spins < 1) throw ValidationError("spin_star: need at least one bath spin");
  if (p.bath_spins > 10) throw ResourceError("spin_star: more than 10 bath spins");
  const std::size_t nb = p.bath_spins;
  const std::size_t dr = std::size_t{1} << nb;

  ModelSpec m;
  m.h_system = 0.5 * p.system_field * pauli('z') + 0.5 * p.system_tunneling * pauli('x');
  m.h_reservoir = Matrix::Zero(Eigen::Index(dr), Eigen::Index(dr));
  for (std::size_t k = 0; k < nb; ++k) {
    const double w = p.bath_field * (1.0 + static_cast<double>(k) * p.bath_spread);
    m.h_reservoir += 0.5 * w * embed(pauli('z'), k, nb);
    if (k + 1 < nb)
      m.h_reservoir += p.bath_exchange * embed(pauli('x'), k, nb) * embed(pauli('x'), k + 1, nb);
  }
  for (char axis : p.coupling) {
    Matrix b = Matrix::Zero(Eigen::Index(dr), Eigen::Index(dr));
    for (std::size_t k = 0; k < nb; ++k) b += embed(pauli(axis), k, nb);
    m.couplings.push_back({pauli(axis), b / static_cast<double>(nb)});
  }
  m.gamma = p.gamma;
  m.rho_system = Matrix::Constant(2, 2, Complex{0.5, 0.0});
  m.rho_reservoir = identity(dr) / static_cast<double>(dr);
  m.validate();
  return m;
}

ModelSpec random_model(std::uint64_t seed, std::size_t ds, std::size_t dr, std::size_t terms,
                       double gamma) {
  if (ds < 1 || dr < 1) throw ValidationError("random_model: dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  ModelSpec m;
  m.h_system = gue(rng, ds);
  m.h_reservoir = gue(rng, dr);
  for (std::size_t i = 0; i < terms; ++i) {
    Matrix a = gue(rng, ds);
    Matrix b = gue(rng, dr);
    m.couplings.push_back({std::move(a), std::move(b)});
  }
  m.gamma = gamma;
  m.rho_system = random_pure_state(rng, ds);
  m.rho_reservoir = random_mixed_state(rng, dr);
  m.validate();
  return m;
}

std::vector<std::string> preset_names() { return {"desk", "fast_bath", "spin_star", "dephasing", "free"}; }

ModelSpec preset(const std::string& name, const PresetParams& params) {
  if (name == "desk" || name == "free") {
    check_known(params, {"seed", "d_S", "d_R", "n", "gamma"}, name);
    return random_model(static_cast<std::uint64_t>(count_param(params, "seed", 7)),
                        count_param(params, "d_S", 2), count_param(params, "d_R", 4),
                        count_param(params, "n", 1),
                        name == "free" ? 0.0 : param(params, "gamma", 1.0));
  }
  if (name == "fast_bath") {
    check_known(params, {"seed", "d_S", "d_R", "n", "gamma", "omega_r"}, name);
    ModelSpec m = random_model(static_cast<std::uint64_t>(count_param(params, "seed", 11)),
                               count_param(params, "d_S", 2), count_param(params, "d_R", 4),
                               count_param(params, "n", 1), param(params, "gamma", 1.0));
    m.h_reservoir *= param(params, "omega_r", 4.0);
    m.validate();
    return m;
  }
  if (name == "spin_star" || name == "dephasing") {
    check_known(params,
                {"bath_spins", "gamma", "system_field", "system_tunneling", "bath_field",
                 "bath_spread", "bath_exchange", "coupling_x", "coupling_y", "coupling_z"},
                name);
    SpinStarParams p;
    if (name == "dephasing") p.coupling = "z";
    p.bath_spins = count_param(params, "bath_spins", 2);
    p.gamma = param(params, "gamma", p.gamma);
    p.system_field = param(params, "system_field", p.system_field);
    p.system_tunneling = param(params, "system_tunneling", p.system_tunneling);
    p.bath_field = param(params, "bath_field", p.bath_field);
    p.bath_spread = param(params, "bath_spread", p.bath_spread);
    p.bath_exchange = param(params, "bath_exchange", p.bath_exchange);
    if (params.count("coupling_x") || params.count("coupling_y") || params.count("coupling_z")) {
      p.coupling.clear();
      if (param(params, "coupling_x", 0.0) != 0.0) p.coupling += 'x';
      if (param(params, "coupling_y", 0.0) != 0.0) p.coupling += 'y';
      if (param(params, "coupling_z", 0.0) != 0.0) p.coupling += 'z';
    }
    if (name == "dephasing" && (p.system_tunneling != 0.0 || p.bath_exchange != 0.0 || p.coupling != "z"))
      throw ValidationError("dephasing preset: coupling must be z with no transverse terms");
    return spin_star(p);
  }
  throw UsageError("unknown preset '" + name + "'");
}

ModelSpec parse_model_text(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
  try {
    if (!doc.is_object()) throw ValidationError("document: expected an object");
    const auto& version = required(doc, "schema_version");
    if (!version.is_string() || version.get<std::string>() != kSchemaVersion)
      throw ValidationError(std::string("schema_version: expected \"") + kSchemaVersion + "\"");

    if (doc.contains("preset")) {
      const auto& ref = doc.at("preset");
      if (!ref.is_object() || !ref.contains("name") || !ref.at("name").is_string())
        throw ValidationError("preset.name: expected a string");
      PresetParams params;
      if (ref.contains("params")) {
        if (!ref.at("params").is_object()) throw ValidationError("preset.params: expected an object");
        for (const auto& [key, value] : ref.at("params").items())
          params[key] = number(value, "preset.params." + key);
      }
      return preset(ref.at("name").get<std::string>(), params);
    }

    const std::size_t ds = dimension(doc, "d_S");
    const std::size_t dr = dimension(doc, "d_R");
    ModelSpec m;
    m.h_system = matrix_from_json(required(doc, "H_S"), ds, "H_S");
    m.h_reservoir = matrix_from_json(required(doc, "H_R"), dr, "H_R");
    const auto& couplings = required(doc, "couplings");
    if (!couplings.is_array()) throw ValidationError("couplings: expected an array");
    for (std::size_t i = 0; i < couplings.size(); ++i) {
      const std::string f = "couplings[" + std::to_string(i) + "]";
      const auto& c = couplings[i];
      if (!c.is_object() || !c.contains("A") || !c.contains("B"))
        throw ValidationError(f + ": expected {\"A\": ..., \"B\": ...}");
      m.couplings.push_back({matrix_from_json(c.at("A"), ds, f + ".A"),
                             matrix_from_json(c.at("B"), dr, f + ".B")});
    }
    m.gamma = number(required(doc, "gamma"), "gamma");
    m.rho_system = matrix_from_json(required(doc, "rho_S0"), ds, "rho_S0");
    m.rho_reservoir = matrix_from_json(required(doc, "rho_R0"), dr, "rho_R0");
    m.validate();
    return m;
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

ModelSpec parse_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str(), path.string());
}

std::string model_to_text(const ModelSpec& spec) {
  spec.validate();
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["d_S"] = spec.d_system();
  doc["d_R"] = spec.d_reservoir();
  doc["H_S"] = matrix_to_json(spec.h_system);
  doc["H_R"] = matrix_to_json(spec.h_reservoir);
  doc["couplings"] = json::array();
  for (const auto& c : spec.couplings)
    doc["couplings"].push_back({{"A", matrix_to_json(c.system)}, {"B", matrix_to_json(c.reservoir)}});
  doc["gamma"] = spec.gamma;
  doc["rho_S0"] = matrix_to_json(spec.rho_system);
  doc["rho_R0"] = matrix_to_json(spec.rho_reservoir);
  return doc.dump(1) + "\n";
}

void write_model(const ModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write model file " + path.string());
  out << model_to_text(spec);
}

}  // namespace rnet::models
