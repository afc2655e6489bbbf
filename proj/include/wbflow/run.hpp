#pragma once

// JSON-configured pipelines behind the command line tool. A run validates its
// whole configuration first, computes, writes CSV artifacts into the output
// directory and returns a manifest:
//
//   {schema_version, command, config, config_hash, seed, results, checks,
//    passed, outputs, wall_time_seconds}
//
// Every field except wall_time_seconds is reproducible bit for bit.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbflow/acceptance.hpp"
#include "wbflow/diagnostics.hpp"
#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/io.hpp"
#include "wbflow/jko.hpp"
#include "wbflow/pde_reference.hpp"
#include "wbflow/static_transport.hpp"

namespace wbflow {

inline constexpr int kManifestSchemaVersion = 1;

using json = nlohmann::json;

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

// Density specifications:
//   2.5                                           constant
//   {"constant": c}
//   {"cells": [..]}                               explicit per-cell densities
//   {"point_mass": {"cell": i, "mass": m}}
//   {"affine": {"offset": a, "slope": [b..]}}      a + b . x
//   {"sine_bump": {"base": b, "amplitude": A}}    b + A prod_k sin(pi (x_k - lo_k) / L_k)
//   {"collar": {"width": w, "inside": u, "outside": v}}   u where d(x, boundary) < w
//   {"sum": [spec, ..]}
inline std::vector<double> density_values(const GridPtr& g, const json& spec) {
  const std::size_t n = g->size();
  if (spec.is_number()) return std::vector<double>(n, spec.get<double>());
  if (!spec.is_object() || spec.size() != 1) throw invalid_input("density spec must be a number or a one-key object");
  const auto& [key, arg] = *spec.items().begin();
  std::vector<double> rho(n, 0.0);
  if (key == "constant") {
    rho.assign(n, arg.get<double>());
  } else if (key == "cells") {
    rho = arg.get<std::vector<double>>();
    if (rho.size() != n) throw invalid_input("explicit density has the wrong number of cells");
  } else if (key == "point_mass") {
    const auto cell = arg.at("cell").get<std::size_t>();
    if (cell >= n) throw invalid_input("point mass cell out of range");
    rho[cell] = arg.at("mass").get<double>() / g->cell_volume();
  } else if (key == "affine") {
    const double a = arg.at("offset").get<double>();
    std::vector<double> b = arg.value("slope", std::vector<double>{});
    b.resize(static_cast<std::size_t>(g->dimension()), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] = a;
      for (int k = 0; k < g->dimension(); ++k) rho[i] += b[static_cast<std::size_t>(k)] * g->center(i)[k];
    }
  } else if (key == "sine_bump") {
    const double base = arg.value("base", 0.0), amp = arg.at("amplitude").get<double>();
    for (std::size_t i = 0; i < n; ++i) {
      double s = amp;
      for (int k = 0; k < g->dimension(); ++k) {
        const Interval& iv = g->extents()[static_cast<std::size_t>(k)];
        s *= std::sin(std::numbers::pi * (g->center(i)[k] - iv.lo) / iv.length());
      }
      rho[i] = base + s;
    }
  } else if (key == "collar") {
    const double w = arg.at("width").get<double>();
    const double inside = arg.at("inside").get<double>(), outside = arg.at("outside").get<double>();
    for (std::size_t i = 0; i < n; ++i) rho[i] = g->boundary_distance(i) < w ? inside : outside;
  } else if (key == "sum") {
    for (const json& part : arg) {
      const std::vector<double> v = density_values(g, part);
      for (std::size_t i = 0; i < n; ++i) rho[i] += v[i];
    }
  } else {
    throw invalid_input("unknown density primitive '" + key + "'");
  }
  return rho;
}

inline DiscreteMeasure density_from_json(const GridPtr& g, const json& spec, const std::string& field) {
  try {
    return DiscreteMeasure(g, density_values(g, spec));
  } catch (const std::exception& e) {
    throw invalid_input(field + ": " + e.what());
  }
}

struct RunResult {
  json manifest;
  bool passed() const { return manifest.at("passed").get<bool>(); }
};

namespace detail {

inline const json& require(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw invalid_input(std::string("config is missing '") + key + "'");
  return cfg.at(key);
}

inline double positive(const json& cfg, const char* key) {
  const double v = require(cfg, key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw invalid_input(std::string("'") + key + "' must be positive");
  return v;
}

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  template <class Writer, class... Args>
  void write(const std::string& name, Writer&& writer, const Args&... args) {
    io::write_file((dir_ / name).string(), writer, args...);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

inline void write_steps(std::ostream& os, const std::vector<JkoStepDiagnostics>& steps) {
  io::full_precision(os);
  os << "step,time,energy,step_distance,mass,stationarity,iterations,reservoir_balance\n";
  for (const JkoStepDiagnostics& s : steps)
    os << s.step << ',' << s.time << ',' << s.energy << ',' << s.step_distance << ',' << s.mass << ','
       << s.stationarity << ',' << s.iterations << ',' << s.reservoir_balance << '\n';
}

inline void write_slope(std::ostream& os, const std::vector<SlopeRow>& rows) {
  io::full_precision(os);
  os << "epsilon,j1,j2,ratio\n";
  for (const SlopeRow& r : rows) os << r.epsilon << ',' << r.j1 << ',' << r.j2 << ',' << r.ratio << '\n';
}

inline void write_acceptance(std::ostream& os, const std::vector<acceptance::CriterionResult>& rows) {
  os << "criterion,name,passed,seconds,detail\n";
  for (const auto& r : rows)
    os << r.id << ",\"" << r.name << "\"," << (r.passed ? "true" : "false") << ',' << r.seconds << ",\"" << r.detail
       << "\"\n";
}

// Smooth test functions vanishing on boundary-adjacent cells.
inline std::vector<std::vector<double>> interior_test_functions(const Grid& g) {
  std::vector<char> near(g.size(), 0);
  for (const BoundaryEdge& e : g.boundary_edges()) near[e.cell] = 1;
  std::vector<std::vector<double>> out;
  for (int mode = 1; mode <= 3; ++mode) {
    std::vector<double> phi(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (near[i]) continue;
      double v = 1.0;
      for (int k = 0; k < g.dimension(); ++k) {
        const Interval& iv = g.extents()[static_cast<std::size_t>(k)];
        v *= std::sin(mode * std::numbers::pi * (g.center(i)[k] - iv.lo) / iv.length());
      }
      phi[i] = v;
    }
    out.push_back(std::move(phi));
  }
  return out;
}

inline DissipationMode mode_from_json(const json& cfg) {
  const std::string m = cfg.value("mode", "trace");
  if (m == "trace") return DissipationMode::trace;
  if (m == "free") return DissipationMode::free;
  throw invalid_input("mode must be 'free' or 'trace'");
}

inline SpeedEstimator speed_from_json(const json& cfg) {
  const std::string s = cfg.value("speed", "lp");
  if (s == "lp") return SpeedEstimator::lp;
  if (s == "one_step") return SpeedEstimator::one_step;
  throw invalid_input("speed must be 'lp' or 'one_step'");
}

}  // namespace detail

// Executes `config`. `out_dir` and `seed` override the config when given.
inline RunResult run(const json& config, std::optional<std::string> out_dir = std::nullopt,
                     std::optional<std::uint64_t> seed_override = std::nullopt, std::ostream* log = &std::clog) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string command = detail::require(config, "command").get<std::string>();
  const std::uint64_t seed = seed_override ? *seed_override : config.value("seed", acceptance::kDefaultSeed);
  const std::string dir = out_dir ? *out_dir : config.value("output", std::string("wbflow-out"));

  json results = json::object();
  json checks = json::object();
  auto check = [&](const std::string& name, bool ok) { checks[name] = ok; };

  // Validation happens before any output is created.
  GridPtr grid;
  if (command != "acceptance") grid = io::grid_from_json(detail::require(config, "grid"));
  auto energy = [&] { return make_energy(io::energy_params_from_json(detail::require(config, "energy")), log); };

  std::optional<detail::Outputs> out;
  auto outputs = [&]() -> detail::Outputs& {
    if (!out) out.emplace(dir);
    return *out;
  };

  if (command == "distance") {
    const DiscreteMeasure mu = density_from_json(grid, detail::require(config, "mu"), "mu");
    const DiscreteMeasure nu = density_from_json(grid, detail::require(config, "nu"), "nu");
    const double p = config.value("p", 2.0);
    if (!(p >= 1.0)) throw invalid_input("'p' must be at least 1");
    const WbResult wb = wb_distance(mu, nu, p);
    results["wb"] = wb.value;
    results["wb_p"] = wb.cost;
    if (p == 2.0) results["wb2_squared"] = wb.cost;
    results["pivots"] = wb.certificate.pivots;
    results["dual_infeasibility"] = wb.certificate.dual_infeasibility;
    results["slackness_violation"] = wb.certificate.slackness_violation;
    if (mu.mass() > 0.0 && std::abs(mu.mass() - nu.mass()) <= 1e-12 * std::max(1.0, mu.mass()))
      results["w"] = wasserstein_distance(mu, nu, p);
    check("optimality_certificate", wb.certificate.holds(1e-9));
    check("plan_marginals", validate_plan(wb.plan, mu, nu, 1e-9).within_tolerance);
    outputs().write("plan.csv", io::write_plan, wb.plan);
    outputs().write("mu.csv", io::write_measure, mu);
    outputs().write("nu.csv", io::write_measure, nu);
  } else if (command == "dynamic") {
    const DiscreteMeasure mu0 = density_from_json(grid, detail::require(config, "mu0"), "mu0");
    const DiscreteMeasure mu1 = density_from_json(grid, detail::require(config, "mu1"), "mu1");
    const int K = config.value("K", 32);
    DynamicOptions opt;
    opt.tolerance = config.value("tolerance", opt.tolerance);
    opt.max_iterations = config.value("max_iterations", opt.max_iterations);
    const DynamicResult dyn = solve_dynamic(mu0, mu1, 2.0, K, opt);
    double bound_ratio = 0.0;
    for (const ActionBound& b : action_bound(dyn.curve, 2.0))
      if (b.bound > 0.0) bound_ratio = std::max(bound_ratio, b.distance_p / b.bound);
    results["value"] = dyn.value;
    results["action"] = dyn.action;
    results["static_wb2_squared"] = wb_distance(mu0, mu1, 2.0).cost;
    results["kkt_residual"] = dyn.kkt_residual;
    results["iterations"] = dyn.iterations;
    results["continuity_residual"] = continuity_residual(dyn.curve);
    results["max_action_bound_ratio"] = bound_ratio;
    check("kkt_residual", dyn.kkt_residual <= opt.tolerance);
    check("continuity_equation", results["continuity_residual"].get<double>() <= 1e-8);
    outputs().write("curve.csv", io::write_curve, dyn.curve);
    outputs().write("momenta.csv", io::write_momenta, dyn.curve);
    outputs().write("edges.csv", io::write_edges, *grid);
  } else if (command == "jko") {
    const EnergySpec spec = energy();
    const DiscreteMeasure rho0 = density_from_json(grid, detail::require(config, "rho0"), "rho0");
    const double tau = detail::positive(config, "tau"), horizon = detail::positive(config, "T");
    JkoOptions opt;
    opt.stationarity_tol = config.value("stationarity_tolerance", opt.stationarity_tol);
    const JkoRun jr = run_jko(spec, rho0, tau, horizon, opt);
    double worst = -kInfinity, increase = -kInfinity;
    long iterations = 0;
    for (std::size_t n = 1; n < jr.steps.size(); ++n) {
      const auto& s = jr.steps[n];
      worst = std::max(worst, s.energy + s.step_distance * s.step_distance / (2.0 * tau) - jr.steps[n - 1].energy);
      increase = std::max(increase, s.energy - jr.steps[n - 1].energy);
      iterations += s.iterations;
    }
    bool stationary = true;
    for (const auto& d : jr.curve.densities) stationary = stationary && d == jr.curve.densities.front();
    results["steps"] = jr.steps.size() - 1;
    results["initial_energy"] = jr.steps.front().energy;
    results["final_energy"] = jr.steps.back().energy;
    results["final_mass"] = jr.steps.back().mass;
    results["max_step_inequality"] = worst;
    results["total_iterations"] = iterations;
    results["stationary"] = stationary;
    check("step_inequality", worst <= 1e-7);
    check("energy_nonincreasing", increase <= 0.0);
    outputs().write("curve.csv", io::write_curve, jr.curve);
    outputs().write("steps.csv", detail::write_steps, jr.steps);
  } else if (command == "pde") {
    const EnergySpec spec = energy();
    const DiscreteMeasure rho0 = density_from_json(grid, detail::require(config, "rho0"), "rho0");
    const double dt = detail::positive(config, "dt"), horizon = detail::positive(config, "T");
    const Curve c = fd_solve(spec, rho0, dt, horizon);
    double lo = spec.lambda(), hi = spec.lambda(), cmin = kInfinity, cmax = -kInfinity, increase = -kInfinity;
    for (double r : rho0.density()) lo = std::min(lo, r), hi = std::max(hi, r);
    double prev = internal_energy(spec, rho0), outflow = 0.0;
    const std::size_t ni = grid->interior_edges().size();
    for (std::size_t k = 0; k < c.intervals(); ++k) {
      for (double r : c.densities[k + 1]) cmin = std::min(cmin, r), cmax = std::max(cmax, r);
      const double e = internal_energy(spec, c.measure(k + 1));
      increase = std::max(increase, e - prev);
      prev = e;
      for (std::size_t b = ni; b < grid->edge_count(); ++b) outflow += c.dt(k) * (*c.momenta)[k][b];
    }
    const double mass_change = c.measure(c.nodes() - 1).mass() - rho0.mass();
    results["steps"] = c.intervals();
    results["final_energy"] = prev;
    results["mass_change"] = mass_change;
    results["boundary_outflow"] = outflow;
    results["min_density"] = cmin;
    results["max_density"] = cmax;
    results["continuity_residual"] = continuity_residual(c);
    const double slack = 1e-9 * std::max(1.0, hi);
    check("maximum_principle", cmin >= lo - slack && cmax <= hi + slack);
    check("energy_nonincreasing", increase <= 1e-12);
    check("continuity_equation", results["continuity_residual"].get<double>() <= 1e-8);
    check("mass_bookkeeping", std::abs(mass_change + outflow) <= 1e-9 * std::max(1.0, rho0.mass()));
    outputs().write("curve.csv", io::write_curve, c);
    outputs().write("momenta.csv", io::write_momenta, c);
    outputs().write("edges.csv", io::write_edges, *grid);
  } else if (command == "diagnose") {
    const EnergySpec spec = energy();
    const DiscreteMeasure rho0 = density_from_json(grid, detail::require(config, "rho0"), "rho0");
    const double dt = detail::positive(config, "dt"), horizon = detail::positive(config, "T");
    const DissipationMode mode = detail::mode_from_json(config);
    const SpeedEstimator speed = detail::speed_from_json(config);
    std::vector<double> eps;
    if (config.contains("epsilons")) {
      for (const json& e : config.at("epsilons")) {
        // Entries may be plain lengths or {"cells": k} for k times the cell size.
        eps.push_back(e.is_object() ? e.at("cells").get<double>() * grid->cell_size(0) : e.get<double>());
      }
    }
    const Curve c = fd_solve(spec, rho0, dt, horizon);
    const DeGiorgiTerms fwd = de_giorgi_terms(c, spec, mode, speed);
    const double rev = de_giorgi(reversed(c), spec, mode, speed);
    results["de_giorgi"] = fwd.value();
    results["de_giorgi_energy_change"] = fwd.energy_change;
    results["de_giorgi_speed_term"] = fwd.speed_term;
    results["de_giorgi_dissipation_term"] = fwd.dissipation_term;
    results["de_giorgi_reversed"] = rev;
    results["chain_rule_deviation"] = chain_rule_check(c, spec);
    results["weak_residual"] = weak_residual(c, spec, detail::interior_test_functions(*grid));
    results["mode"] = to_string(mode);
    results["speed"] = to_string(speed);
    check("reversal_positive", rev > 0.0);
    outputs().write("curve.csv", io::write_curve, c);
    if (!eps.empty()) {
      const std::vector<SlopeRow> rows = slope_experiment(spec, rho0, eps);
      json ratios = json::array();
      for (const SlopeRow& r : rows) ratios.push_back(r.ratio);
      results["slope_ratios"] = ratios;
      outputs().write("slope.csv", detail::write_slope, rows);
    }
  } else if (command == "acceptance") {
    acceptance::Options opt;
    opt.seed = seed;
    const auto rows = acceptance::run_all(opt, [&](const acceptance::CriterionResult& r) {
      if (log) *log << "[" << (r.passed ? "PASS" : "FAIL") << "] " << r.id << " " << r.name << ": " << r.detail << "\n";
    });
    json table = json::array();
    for (const auto& r : rows) {
      check("criterion_" + std::to_string(r.id), r.passed);
      table.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                       {"notes", r.notes}, {"seconds", r.seconds}});
    }
    results["criteria"] = table;
    outputs().write("acceptance.csv", detail::write_acceptance, rows);
  } else {
    throw invalid_input("unknown command '" + command + "'");
  }

  bool passed = true;
  for (const auto& [name, ok] : checks.items()) passed = passed && ok.get<bool>();
  json manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = hex64(fnv1a(config.dump()));
  manifest["seed"] = seed;
  manifest["results"] = results;
  manifest["checks"] = checks;
  manifest["passed"] = passed;
  manifest["outputs"] = out ? out->names() : std::vector<std::string>{};
  manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    detail::Outputs& o = outputs();
    std::ofstream f(o.dir() / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  return {manifest};
}

}  // namespace wbflow
