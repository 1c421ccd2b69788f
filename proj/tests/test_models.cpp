#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "rnet/errors.hpp"
#include "rnet/models.hpp"

namespace rnet {
namespace {

using models::preset;

void expect_identical(const ModelSpec& a, const ModelSpec& b) {
  EXPECT_TRUE(a.h_system == b.h_system);
  EXPECT_TRUE(a.h_reservoir == b.h_reservoir);
  ASSERT_EQ(a.couplings.size(), b.couplings.size());
  for (std::size_t i = 0; i < a.couplings.size(); ++i) {
    EXPECT_TRUE(a.couplings[i].system == b.couplings[i].system);
    EXPECT_TRUE(a.couplings[i].reservoir == b.couplings[i].reservoir);
  }
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_TRUE(a.rho_system == b.rho_system);
  EXPECT_TRUE(a.rho_reservoir == b.rho_reservoir);
}

std::string error_text(const std::string& text) {
  try {
    models::parse_model_text(text, "model.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

TEST(SpinStar, Construction) {
  ModelSpec m = models::spin_star({});
  EXPECT_EQ(m.d_system(), 2u);
  EXPECT_EQ(m.d_reservoir(), 4u);
  EXPECT_EQ(m.terms(), 1u);
  EXPECT_NO_THROW(m.validate());
  models::SpinStarParams p;
  p.bath_spins = 3;
  p.coupling = "xyz";
  ModelSpec big = models::spin_star(p);
  EXPECT_EQ(big.d_reservoir(), 8u);
  EXPECT_EQ(big.terms(), 3u);
  p.bath_spins = 0;
  EXPECT_THROW(models::spin_star(p), ValidationError);
}

TEST(SpinStar, NoCouplingsIsGammaIndependent) {
  models::SpinStarParams p;
  p.coupling = "";
  p.gamma = 0.3;
  ModelSpec a = models::spin_star(p);
  p.gamma = 5.0;
  ModelSpec b = models::spin_star(p);
  EXPECT_TRUE(a.total_hamiltonian() == b.total_hamiltonian());
}

TEST(RandomModel, DeterministicAndNormalized) {
  ModelSpec a = models::random_model(3, 2, 4, 2);
  ModelSpec b = models::random_model(3, 2, 4, 2);
  expect_identical(a, b);
  for (const auto& c : a.couplings) {
    EXPECT_NEAR(models::operator_norm(c.system), 1.0, 1e-10);
    EXPECT_NEAR(models::operator_norm(c.reservoir), 1.0, 1e-10);
  }
  EXPECT_NEAR(models::operator_norm(a.h_system), 1.0, 1e-10);
}

TEST(RandomModel, SeedsDiffer) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    ModelSpec a = models::random_model(s, 2, 3, 1);
    ModelSpec b = models::random_model(s + 1, 2, 3, 1);
    EXPECT_FALSE(a.h_system == b.h_system && a.h_reservoir == b.h_reservoir);
  }
}

TEST(Presets, AllValidate) {
  for (const auto& name : models::preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_THROW(preset("nope"), UsageError);
  EXPECT_THROW(preset("desk", {{"colour", 1.0}}), UsageError);
  EXPECT_EQ(preset("free").gamma, 0.0);
  expect_identical(preset("desk"), models::random_model(7, 2, 4, 1, 1.0));
}

TEST(ModelFile, RoundTripIsExact) {
  for (const auto& name : models::preset_names()) {
    ModelSpec m = preset(name);
    expect_identical(models::parse_model_text(models::model_to_text(m)), m);
  }
}

TEST(ModelFile, WriteThenParse) {
  const auto path = std::filesystem::temp_directory_path() / "rnet_model_roundtrip.json";
  ModelSpec m = preset("fast_bath", {{"seed", 99}});
  models::write_model(m, path);
  expect_identical(models::parse_model(path), m);
  std::filesystem::remove(path);
  EXPECT_THROW(models::parse_model(path), UsageError);
}

TEST(ModelFile, PresetReferenceExpands) {
  ModelSpec m = models::parse_model_text(
      R"({"schema_version": "1", "preset": {"name": "spin_star", "params": {"bath_spins": 3, "gamma": 0.5}}})");
  models::SpinStarParams p;
  p.bath_spins = 3;
  p.gamma = 0.5;
  expect_identical(m, models::spin_star(p));
}

TEST(ModelFile, NonHermitianNamesField) {
  const std::string text = R"({"schema_version": "1", "d_S": 2, "d_R": 1,
    "H_S": [[[0,0],[1,0]], [[0,0],[0,0]]],
    "H_R": [[[0,0]]],
    "couplings": [],
    "gamma": 1.0,
    "rho_S0": [[[1,0],[0,0]], [[0,0],[0,0]]],
    "rho_R0": [[[1,0]]]})";
  const std::string err = error_text(text);
  EXPECT_NE(err.find("H_S"), std::string::npos) << err;
  EXPECT_NE(err.find("model.json"), std::string::npos) << err;
}

TEST(ModelFile, OtherErrorsNameFields) {
  const std::string base = R"({"schema_version": "1", "d_S": 1, "d_R": 1,
    "H_S": [[[0,0]]], "H_R": [[[0,0]]], "couplings": [{"A": [[[1,0]]], "B": [[[1,0]]]}],
    "gamma": GAMMA, "rho_S0": [[[RHO,0]]], "rho_R0": [[[1,0]]]})";
  auto with = [&](const std::string& gamma, const std::string& rho) {
    std::string t = base;
    t.replace(t.find("GAMMA"), 5, gamma);
    t.replace(t.find("RHO"), 3, rho);
    return t;
  };
  EXPECT_NO_THROW(models::parse_model_text(with("1.0", "1")));
  EXPECT_NE(error_text(with("\"x\"", "1")).find("gamma"), std::string::npos);
  EXPECT_NE(error_text(with("1.0", "0.5")).find("rho_S0"), std::string::npos);
  EXPECT_NE(error_text(with("1.0", "1e")).find("model.json"), std::string::npos);
  EXPECT_NE(error_text(R"({"schema_version": "2"})").find("schema_version"), std::string::npos);
  EXPECT_NE(error_text(R"({"schema_version": "1", "d_S": 2})").find("d_R"), std::string::npos);
}

}  // namespace
}  // namespace rnet
