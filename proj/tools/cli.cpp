#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "output.hpp"
#include "rnet/errors.hpp"
#include "rnet/estimators.hpp"
#include "rnet/exact_oracle.hpp"
#include "rnet/models.hpp"
#include "rnet/reservoir_network.hpp"

namespace rnet::cli {

namespace {

namespace fs = std::filesystem;

// Value printed next to the base-10 estimate for the n=2, gT=1, g tau_min=0.2 example.
constexpr double kQuotedWorkedExample = 1000.0;

struct ModelOptions {
  std::string model_path;
  std::string preset;
  std::vector<std::string> params;
  std::optional<std::uint64_t> seed;
};

struct GridOptions {
  double tau = 0.02;
  std::optional<std::size_t> steps;
  std::optional<double> total;
};

struct PolicyOptions {
  std::optional<double> cutoff;
  std::optional<std::size_t> max_bond;
};

struct Common {
  ModelOptions model;
  GridOptions grid;
  PolicyOptions policy;
  std::string out = ".";
  std::string log_base = "e";
  bool oracle = false;
};

struct Resolved {
  ModelSpec model;
  json model_config;
};

Resolved resolve_model(const ModelOptions& o) {
  if (o.model_path.empty() == o.preset.empty())
    throw UsageError("exactly one of --model or --preset is required");
  Resolved r;
  if (!o.model_path.empty()) {
    if (o.seed) throw UsageError("--seed applies to presets, not model files");
    if (!o.params.empty()) throw UsageError("--param applies to presets, not model files");
    r.model = models::parse_model(o.model_path);
    r.model_config["model"] = o.model_path;
  } else {
    models::PresetParams params;
    for (const auto& kv : o.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      try {
        std::size_t used = 0;
        params[key] = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      } catch (const std::logic_error&) {
        throw UsageError("--param " + key + ": not a number");
      }
    }
    if (o.seed) params["seed"] = static_cast<double>(*o.seed);
    r.model = models::preset(o.preset, params);
    r.model_config["preset"] = o.preset;
    r.model_config["params"] = params;
  }
  r.model_config["model_hash"] = hex64(fnv1a(models::model_to_text(r.model)));
  return r;
}

TimeGrid resolve_grid(const GridOptions& o) {
  if (o.steps && o.total) throw UsageError("give --steps or --T, not both");
  if (o.total) return TimeGrid::from_total(*o.total, o.tau);
  return TimeGrid(o.tau, o.steps.value_or(50));
}

TruncationPolicy resolve_policy(const PolicyOptions& o, double default_cutoff) {
  TruncationPolicy p;
  p.cutoff = o.cutoff.value_or(default_cutoff);
  if (!(p.cutoff >= 0.0)) throw UsageError("--cutoff must be >= 0");
  if (o.max_bond) {
    if (*o.max_bond == 0) throw UsageError("--max-bond must be positive");
    p.max_bond = *o.max_bond;
  }
  return p;
}

LogBase resolve_log_base(const std::string& s) {
  if (s == "e") return LogBase::natural;
  if (s == "10") return LogBase::base10;
  throw UsageError("--log-base must be 'e' or '10'");
}

json grid_config(const TimeGrid& g) { return {{"tau", g.tau()}, {"steps", g.steps()}, {"T", g.total()}}; }

json policy_config(const TruncationPolicy& p) {
  json j{{"cutoff", p.cutoff}};
  j["max_bond"] = p.max_bond == kUnboundedRank ? json(nullptr) : json(p.max_bond);
  return j;
}

json dsuff_json(const DimensionEstimate& d) { return {{"entropy", d.entropy}, {"d_suff", d.d_suff}}; }

// d_suff predictions for a model run: n terms, coupling gamma, memory T,
// minimal time scale tau. Null when the inputs leave the formula's domain.
json formula_predictions(std::size_t n, double gamma, double memory_time, double tau_min) {
  if (n == 0 || !(gamma > 0.0)) return nullptr;
  EstimateInputs in{n, gamma, memory_time, tau_min, LogBase::natural};
  json j;
  j["inputs"] = {{"n", n}, {"gamma", gamma}, {"T", memory_time}, {"tau_min", tau_min}};
  j["natural"] = dsuff_json(dsuff(in));
  in.log_base = LogBase::base10;
  j["base10"] = dsuff_json(dsuff(in));
  j["entropy_full"] = entropy_estimate(in, true);
  j["small_coupling"] = in.small_coupling();
  return j;
}

void add_state_columns(std::vector<std::string>& cols, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::string base = "rho_" + std::to_string(i) + "_" + std::to_string(j);
      cols.push_back(base + "_re");
      cols.push_back(base + "_im");
    }
}

void append_state(std::vector<double>& row, const Matrix& rho) {
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      row.push_back(rho(i, j).real());
      row.push_back(rho(i, j).imag());
    }
}

class Emitter {
 public:
  Emitter(std::string command, json config, const std::string& out_dir)
      : header_{std::move(command), std::move(config)}, dir_(out_dir) {}

  void csv(const std::string& stem, const Table& table) {
    write_csv(dir_ / (stem + ".csv"), header_, table);
    files_.push_back(stem + ".csv");
  }
  void summary(const std::string& stem, json body) {
    body["files"] = files_;
    write_summary(dir_ / (stem + ".json"), header_, body);
  }
  const RunHeader& header() const { return header_; }

 private:
  RunHeader header_;
  fs::path dir_;
  std::vector<std::string> files_;
};

void add_model_options(CLI::App* app, Common& c) {
  app->add_option("--model", c.model.model_path, "Model file (JSON)");
  app->add_option("--preset", c.model.preset, "Named preset")
      ->check(CLI::IsMember(models::preset_names()));
  app->add_option("--param", c.model.params, "Preset parameter key=value (repeatable)");
  app->add_option("--seed", c.model.seed, "Seed for presets built from random models");
}

void add_grid_options(CLI::App* app, Common& c) {
  app->add_option("--tau", c.grid.tau, "Trotter step")->capture_default_str();
  app->add_option("--steps", c.grid.steps, "Number of steps (default 50)");
  app->add_option("--T", c.grid.total, "Total time; steps = T/tau");
}

void add_policy_options(CLI::App* app, Common& c) {
  app->add_option("--cutoff", c.policy.cutoff, "Relative discarded-weight cutoff");
  app->add_option("--max-bond", c.policy.max_bond, "Bond dimension cap");
}

void add_out_option(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Common& c, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid grid = resolve_grid(c.grid);
  // Lossless unless a cutoff is requested.
  std::optional<TruncationPolicy> policy;
  if (c.policy.cutoff || c.policy.max_bond) policy = resolve_policy(c.policy, 1e-8);

  json cfg{{"model", model_cfg}, {"grid", grid_config(grid)}, {"oracle", c.oracle}};
  cfg["truncation"] = policy ? policy_config(*policy) : json(nullptr);
  Emitter emit("simulate", cfg, c.out);

  ReservoirNetwork rn = build_rn(model, grid);
  std::size_t max_bond = rn.max_bond();
  if (policy) {
    auto compressed = compress(rn, *policy);
    rn = std::move(compressed.first);
    max_bond = compressed.second.max_bond_dim;
  }
  const Trajectory traj = contract_system(rn, model, grid);
  std::optional<Trajectory> dense;
  if (c.oracle) dense = evolve_trotter_dense(model, grid, InteractionMode::factorized).trajectory;

  std::vector<std::string> cols{"time"};
  add_state_columns(cols, model.d_system());
  if (dense) cols.push_back("trace_distance_vs_dense");
  Table table(cols);
  double max_dist = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    append_state(row, traj.states[k]);
    if (dense) {
      const double d = trace_distance(traj.states[k], dense->states[k]);
      max_dist = std::max(max_dist, d);
      row.push_back(d);
    }
    table.add_row(row);
  }
  emit.csv("trajectory", table);

  json measured{{"max_bond", max_bond},
                {"final_trace", traj.final_state().trace().real()},
                {"final_purity", (traj.final_state() * traj.final_state()).trace().real()}};
  if (dense) measured["max_trace_distance_vs_dense"] = max_dist;
  emit.summary("simulate", {{"measured", measured}});
  out << "simulate: " << traj.size() << " states written";
  if (dense) out << ", max trace distance vs dense " << format_number(max_dist);
  out << "\n";
  return 0;
}

int cmd_compare(const Common& c, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid grid = resolve_grid(c.grid);
  Emitter emit("compare", {{"model", model_cfg}, {"grid", grid_config(grid)}}, c.out);

  const Trajectory expm = evolve_exact(model, grid).trajectory;
  const Trajectory exact = evolve_trotter_dense(model, grid, InteractionMode::exact).trajectory;
  const Trajectory fact = evolve_trotter_dense(model, grid, InteractionMode::factorized).trajectory;
  const Trajectory rn = contract_system(build_rn(model, grid), model, grid);

  Table table({"time", "rn_vs_dense_factorized", "dense_factorized_vs_dense_exact", "dense_exact_vs_expm"});
  std::vector<double> worst(3, 0.0);
  std::vector<double> last(3, 0.0);
  for (std::size_t k = 0; k < rn.size(); ++k) {
    last = {trace_distance(rn.states[k], fact.states[k]), trace_distance(fact.states[k], exact.states[k]),
            trace_distance(exact.states[k], expm.states[k])};
    for (std::size_t i = 0; i < 3; ++i) worst[i] = std::max(worst[i], last[i]);
    table.add_row({rn.times[k], last[0], last[1], last[2]});
  }
  emit.csv("compare", table);

  const double gt = model.gamma * grid.tau();
  json checks = json::array();
  checks.push_back({{"check", "rn_vs_dense_factorized"}, {"max", worst[0]}, {"final", last[0]},
                    {"expected_scale", 0.0}});
  checks.push_back({{"check", "dense_factorized_vs_dense_exact"}, {"max", worst[1]}, {"final", last[1]},
                    {"expected_scale", static_cast<double>(grid.steps()) * gt * gt}});
  checks.push_back({{"check", "dense_exact_vs_expm"}, {"max", worst[2]}, {"final", last[2]},
                    {"expected_scale", grid.tau()}});
  emit.summary("compare", {{"checks", checks}});
  out << "compare: final errors " << format_number(last[0]) << ", " << format_number(last[1]) << ", "
      << format_number(last[2]) << "\n";
  return 0;
}

int cmd_entropy_profile(const Common& c, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid grid = resolve_grid(c.grid);
  const TruncationPolicy policy = resolve_policy(c.policy, 1e-8);
  Emitter emit("entropy-profile",
               {{"model", model_cfg}, {"grid", grid_config(grid)}, {"truncation", policy_config(policy)}},
               c.out);

  auto [rn, report] = compress(build_rn(model, grid), policy);
  Table table({"bond", "time", "bond_dim", "entropy", "log_bond_dim", "discarded_weight"});
  double max_entropy = 0.0;
  for (std::size_t b = 0; b < report.spectra.size(); ++b) {
    const auto& s = report.spectra[b];
    max_entropy = std::max(max_entropy, report.entropies[b]);
    table.add_row({static_cast<double>(b + 1), grid.time(b + 1), static_cast<double>(s.rank()),
                   report.entropies[b], std::log(static_cast<double>(s.rank())), s.discarded_weight});
  }
  emit.csv("entropy_profile", table);

  json measured{{"max_entropy", max_entropy},
                {"d_eff", std::exp(max_entropy)},
                {"max_bond_dim", report.max_bond_dim},
                {"total_discarded", report.total_discarded}};
  emit.summary("entropy_profile",
               {{"predictions", formula_predictions(model.terms(), model.gamma, grid.total(), grid.tau())},
                {"measured", measured}});
  out << "entropy-profile: max entropy " << format_number(max_entropy) << ", max bond "
      << report.max_bond_dim << "\n";
  return 0;
}

int cmd_truncate_scan(const Common& c, const std::vector<double>& cutoffs, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid grid = resolve_grid(c.grid);
  if (c.policy.cutoff) throw UsageError("truncate-scan takes --cutoffs, not --cutoff");
  for (double x : cutoffs)
    if (!(x >= 0.0)) throw UsageError("--cutoffs entries must be >= 0");
  TruncationPolicy base = resolve_policy(c.policy, 0.0);
  json cfg{{"model", model_cfg}, {"grid", grid_config(grid)}, {"cutoffs", cutoffs}};
  cfg["max_bond"] = base.max_bond == kUnboundedRank ? json(nullptr) : json(base.max_bond);
  Emitter emit("truncate-scan", cfg, c.out);

  const ReservoirNetwork rn = build_rn(model, grid);
  const Trajectory lossless = contract_system(rn, model, grid);
  Table table({"cutoff", "max_bond", "total_discarded", "max_trace_distance", "final_trace_distance",
               "envelope"});
  json rows = json::array();
  for (double cutoff : cutoffs) {
    TruncationPolicy p = base;
    p.cutoff = cutoff;
    auto [compressed, report] = compress(rn, p);
    const Trajectory t = contract_system(compressed, model, grid);
    const double worst = max_trace_distance(t, lossless);
    const double last = trace_distance(t.final_state(), lossless.final_state());
    const double envelope = 10.0 * std::sqrt(report.total_discarded);
    table.add_row({cutoff, static_cast<double>(report.max_bond_dim), report.total_discarded, worst, last,
                   envelope});
    rows.push_back({{"cutoff", cutoff}, {"max_bond", report.max_bond_dim}, {"max_trace_distance", worst}});
  }
  emit.csv("truncate_scan", table);
  emit.summary("truncate_scan", {{"measured", rows}});
  out << "truncate-scan: " << cutoffs.size() << " cutoffs\n";
  return 0;
}

struct DsuffOptions {
  std::size_t n = 2;
  double gamma = 1.0;
  double memory_time = 1.0;
  double tau_min = 0.2;
};

int cmd_dsuff(const Common& c, const DsuffOptions& o, std::ostream& out) {
  const LogBase base = resolve_log_base(c.log_base);
  EstimateInputs in{o.n, o.gamma, o.memory_time, o.tau_min, base};
  in.validate();
  Emitter emit("dsuff",
               {{"n", o.n}, {"gamma", o.gamma}, {"T", o.memory_time}, {"tau_min", o.tau_min},
                {"log_base", c.log_base}},
               c.out);

  EstimateInputs natural = in, base10 = in;
  natural.log_base = LogBase::natural;
  base10.log_base = LogBase::base10;
  const DimensionEstimate dn = dsuff(natural), d10 = dsuff(base10);
  const DimensionEstimate selected = base == LogBase::natural ? dn : d10;

  Table table({"log_base", "entropy", "d_suff"});
  table.add_row({"e", format_number(dn.entropy), format_number(dn.d_suff)});
  table.add_row({"10", format_number(d10.entropy), format_number(d10.d_suff)});
  emit.csv("dsuff", table);

  json body;
  body["inputs"] = {{"n", o.n},
                    {"gamma_T", o.gamma * o.memory_time},
                    {"gamma_tau_min", o.gamma * o.tau_min},
                    {"small_coupling", in.small_coupling()}};
  body["predictions"] = {{"selected", dsuff_json(selected)},
                         {"natural", dsuff_json(dn)},
                         {"base10", dsuff_json(d10)},
                         {"entropy_full_natural", entropy_estimate(natural, true)}};
  const bool worked_example = o.n == 2 && std::abs(o.gamma * o.memory_time - 1.0) < 1e-12 &&
                              std::abs(o.gamma * o.tau_min - 0.2) < 1e-12;
  body["quoted_d_suff"] = worked_example ? json(kQuotedWorkedExample) : json(nullptr);
  emit.summary("dsuff", body);
  out << "dsuff: S=" << format_number(selected.entropy) << " d_suff=" << format_number(selected.d_suff)
      << " (log base " << c.log_base << "; natural " << format_number(dn.d_suff) << ", base10 "
      << format_number(d10.d_suff) << ")\n";
  return 0;
}

struct BranchOptions {
  std::string mode = "idealized";
  std::size_t n = 1;
  std::optional<double> gamma_tau;
  std::size_t length = 4;
};

int cmd_branch_entropy(const Common& c, const BranchOptions& o, std::ostream& out) {
  if (o.length == 0) throw UsageError("--length must be positive");
  const std::uint64_t budget = enumeration_budget_from_env();
  Table idealized_table({"K", "enumerated_entropy", "closed_form_entropy", "simplified_entropy",
                         "normalization_enumerated", "normalization_closed_form"});
  json rows = json::array();

  if (o.mode == "idealized") {
    if (!o.gamma_tau) throw UsageError("idealized mode needs --gamma-tau");
    const double gt = *o.gamma_tau;
    Emitter emit("branch-entropy", {{"mode", o.mode}, {"n", o.n}, {"gamma_tau", gt}, {"length", o.length}},
                 c.out);
    for (std::size_t k = 1; k <= o.length; ++k) {
      const auto w = idealized_branch_weights(o.n, gt, k, budget);
      const double enumerated = branch_entropy_bound(w);
      const double closed = entropy_closed_form(o.n, gt, gt * static_cast<double>(k));
      const double simple = entropy_estimate({o.n, 1.0, gt * static_cast<double>(k), gt}, false);
      const auto norm = normalization_check(o.n, gt, k, budget);
      idealized_table.add_row({static_cast<double>(k), enumerated, closed, simple, norm.enumerated,
                               norm.closed_form});
      rows.push_back({{"K", k}, {"enumerated", enumerated}, {"closed_form", closed},
                      {"abs_difference", std::abs(enumerated - closed)}});
    }
    emit.csv("branch_entropy", idealized_table);
    emit.summary("branch_entropy", {{"rows", rows}});
    out << "branch-entropy: K=" << o.length << " enumerated " << rows.back()["enumerated"].get<double>()
        << " closed form " << rows.back()["closed_form"].get<double>() << "\n";
    return 0;
  }
  if (o.mode != "model") throw UsageError("--mode must be 'idealized' or 'model'");
  if (o.gamma_tau) throw UsageError("model mode takes gamma and tau from the model and grid");

  auto [model, model_cfg] = resolve_model(c.model);
  const double tau = c.grid.tau;
  Emitter emit("branch-entropy",
               {{"mode", o.mode}, {"model", model_cfg}, {"tau", tau}, {"length", o.length}}, c.out);
  const double gt = model.gamma * tau;
  Table table({"K", "model_entropy", "idealized_entropy", "closed_form_entropy"});
  for (std::size_t k = 1; k <= o.length; ++k) {
    const ReservoirNetwork rn = build_rn(model, TimeGrid(tau, k));
    const double measured = branch_entropy_bound(model_branch_weights(rn, budget));
    const std::size_t n = std::max<std::size_t>(model.terms(), 1);
    const double ideal = gt > 0.0 ? branch_entropy_bound(idealized_branch_weights(n, gt, k, budget)) : 0.0;
    const double closed = gt > 0.0 ? entropy_closed_form(n, gt, gt * static_cast<double>(k)) : 0.0;
    table.add_row({static_cast<double>(k), measured, ideal, closed});
    rows.push_back({{"K", k}, {"model", measured}, {"idealized", ideal}, {"closed_form", closed}});
  }
  emit.csv("branch_entropy", table);
  emit.summary("branch_entropy", {{"rows", rows}});
  out << "branch-entropy: K=" << o.length << " model entropy " << rows.back()["model"].get<double>() << "\n";
  return 0;
}

struct MiOptions {
  std::size_t window = 1;
  std::size_t max_separation = 6;
};

int cmd_mi_decay(const Common& c, const MiOptions& o, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid grid = resolve_grid(c.grid);
  if (o.window == 0 || o.max_separation == 0) throw UsageError("--window and --max-separation must be positive");
  if (2 * o.window + o.max_separation - 1 > grid.steps())
    throw UsageError("grid too short for the requested window and separation");
  Emitter emit("mi-decay",
               {{"model", model_cfg}, {"grid", grid_config(grid)}, {"window", o.window},
                {"max_separation", o.max_separation}},
               c.out);

  const ReservoirNetwork rn = build_rn(model, grid);
  Table mi_table({"separation", "time_separation", "mutual_information"});
  std::vector<double> seps, mis;
  json mi_rows = json::array();
  for (std::size_t s = 1; s <= o.max_separation; ++s) {
    // Window A ends where the separation starts: separation 1 means adjacent windows.
    const SiteRange a{0, o.window};
    const SiteRange b{o.window + s - 1, o.window};
    const double mi = mutual_information(rn, a, b);
    mi_table.add_row({static_cast<double>(s), static_cast<double>(s) * grid.tau(), mi});
    mi_rows.push_back({{"separation", s}, {"mutual_information", mi}});
    if (mi > 0.0) {
      seps.push_back(static_cast<double>(s) * grid.tau());
      mis.push_back(std::log(mi));
    }
  }
  emit.csv("mi_decay", mi_table);

  Table tail_table({"keep_last", "trace_distance"});
  const Matrix full = contract_system(rn, model, grid).final_state();
  for (std::size_t keep = 1; keep <= grid.steps(); ++keep)
    tail_table.add_row({static_cast<double>(keep),
                        trace_distance(evolve_with_tail_cut(rn, model, grid, keep), full)});
  emit.csv("tail_cut", tail_table);

  // Exponential fit ln I = a - t / xi over the positive values.
  json fit = nullptr;
  if (seps.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(seps.size());
    for (std::size_t i = 0; i < seps.size(); ++i) {
      sx += seps[i];
      sy += mis[i];
      sxx += seps[i] * seps[i];
      sxy += seps[i] * mis[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope < 0.0) {
      const double xi = -1.0 / slope;
      fit = {{"decay_time", xi},
             {"predictions", formula_predictions(model.terms(), model.gamma, xi, grid.tau())}};
    }
  }
  emit.summary("mi_decay", {{"mutual_information", mi_rows}, {"exponential_fit", fit}});
  out << "mi-decay: I(1)=" << format_number(mi_rows.front()["mutual_information"].get<double>())
      << " I(" << o.max_separation << ")=" << format_number(mi_rows.back()["mutual_information"].get<double>())
      << "\n";
  return 0;
}

int cmd_coarse_grain(const Common& c, std::size_t block, std::ostream& out) {
  auto [model, model_cfg] = resolve_model(c.model);
  const TimeGrid fine = resolve_grid(c.grid);
  if (block == 0 || fine.steps() % block != 0) throw UsageError("--block must divide the step count");
  const TimeGrid coarse(fine.tau() * static_cast<double>(block), fine.steps() / block);
  Emitter emit("coarse-grain", {{"model", model_cfg}, {"grid", grid_config(fine)}, {"block", block}}, c.out);

  const ReservoirNetwork fine_rn = build_rn(model, fine);
  const ReservoirNetwork merged = coarse_grain(fine_rn, block);
  const Trajectory t_fine = contract_system(fine_rn, model, fine);
  const Trajectory t_merged = contract_system(merged, model, coarse);
  const Trajectory t_direct = contract_system(build_rn(model, coarse), model, coarse);

  Table table({"time", "merged_vs_fine", "direct_vs_fine", "merged_vs_direct"});
  double worst = 0.0;
  for (std::size_t k = 0; k < t_merged.size(); ++k) {
    const Matrix& f = t_fine.states[k * block];
    const double a = trace_distance(t_merged.states[k], f);
    worst = std::max(worst, a);
    table.add_row({t_merged.times[k], a, trace_distance(t_direct.states[k], f),
                   trace_distance(t_merged.states[k], t_direct.states[k])});
  }
  emit.csv("coarse_grain", table);
  emit.summary("coarse_grain",
               {{"measured",
                 {{"max_merged_vs_fine", worst},
                  {"final_merged_vs_fine", trace_distance(t_merged.final_state(), t_fine.final_state())},
                  {"max_bond_fine", fine_rn.max_bond()},
                  {"max_bond_merged", merged.max_bond()}}}});
  out << "coarse-grain: max merged-vs-fine trace distance " << format_number(worst) << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reservoir-network simulator and effective-dimension estimator", "rnet"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Common c;
  std::function<int()> action;

  auto* sim = app.add_subcommand("simulate", "Contract the reservoir network and write rho_S(t)");
  add_model_options(sim, c);
  add_grid_options(sim, c);
  add_policy_options(sim, c);
  add_out_option(sim, c);
  sim->add_flag("--oracle", c.oracle, "Add a trace-distance column against the dense factorized evolution");
  sim->callback([&] { action = [&] { return cmd_simulate(c, out); }; });

  auto* cmp = app.add_subcommand("compare", "Network vs dense evolutions, per step");
  add_model_options(cmp, c);
  add_grid_options(cmp, c);
  add_out_option(cmp, c);
  cmp->callback([&] { action = [&] { return cmd_compare(c, out); }; });

  auto* ent = app.add_subcommand("entropy-profile", "Bond entropies after compression");
  add_model_options(ent, c);
  add_grid_options(ent, c);
  add_policy_options(ent, c);
  add_out_option(ent, c);
  ent->callback([&] { action = [&] { return cmd_entropy_profile(c, out); }; });

  std::vector<double> cutoffs{0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  auto* scan = app.add_subcommand("truncate-scan", "Trajectory error against the lossless run per cutoff");
  add_model_options(scan, c);
  add_grid_options(scan, c);
  add_policy_options(scan, c);
  add_out_option(scan, c);
  scan->add_option("--cutoffs", cutoffs, "Cutoffs to scan")->delimiter(',');
  scan->callback([&] { action = [&] { return cmd_truncate_scan(c, cutoffs, out); }; });

  DsuffOptions dopt;
  auto* ds = app.add_subcommand("dsuff", "Sufficient reservoir dimension estimate");
  ds->add_option("--n", dopt.n, "Interaction terms")->capture_default_str();
  ds->add_option("--gamma", dopt.gamma, "Coupling rate")->capture_default_str();
  ds->add_option("--T", dopt.memory_time, "Memory time")->capture_default_str();
  ds->add_option("--tau-min,--tau", dopt.tau_min, "Minimal reservoir time scale")->capture_default_str();
  ds->add_option("--log-base", c.log_base, "Inner logarithm base: e or 10")
      ->check(CLI::IsMember({"e", "10"}))
      ->capture_default_str();
  add_out_option(ds, c);
  ds->callback([&] { action = [&] { return cmd_dsuff(c, dopt, out); }; });

  BranchOptions bopt;
  auto* br = app.add_subcommand("branch-entropy", "Enumerated branch-weight entropy vs closed form");
  add_model_options(br, c);
  br->add_option("--tau", c.grid.tau, "Trotter step (model mode)")->capture_default_str();
  br->add_option("--mode", bopt.mode, "idealized or model")->capture_default_str();
  br->add_option("--n", bopt.n, "Interaction terms (idealized mode)")->capture_default_str();
  br->add_option("--gamma-tau", bopt.gamma_tau, "gamma*tau (idealized mode)");
  br->add_option("--length,--steps", bopt.length, "Longest string length K")->capture_default_str();
  add_out_option(br, c);
  br->callback([&] { action = [&] { return cmd_branch_entropy(c, bopt, out); }; });

  MiOptions mopt;
  auto* mi = app.add_subcommand("mi-decay", "Mutual information vs window separation, and tail-cut errors");
  add_model_options(mi, c);
  add_grid_options(mi, c);
  add_out_option(mi, c);
  mi->add_option("--window", mopt.window, "Window size in sites")->capture_default_str();
  mi->add_option("--max-separation", mopt.max_separation, "Largest separation")->capture_default_str();
  mi->callback([&] { action = [&] { return cmd_mi_decay(c, mopt, out); }; });

  std::size_t block = 2;
  auto* cg = app.add_subcommand("coarse-grain", "Merged-site network vs the fine network");
  add_model_options(cg, c);
  add_grid_options(cg, c);
  add_out_option(cg, c);
  cg->add_option("--block", block, "Sites per merged site")->capture_default_str();
  cg->callback([&] { action = [&] { return cmd_coarse_grain(c, block, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::usage);
  }

  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rnet::cli
