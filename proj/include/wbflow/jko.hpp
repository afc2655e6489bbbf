#pragma once

// Minimising-movement (JKO) scheme for the internal energy under Wb_2:
//
//   mu_{n+1} = argmin_nu  F(nu) + Wb_2(nu, mu_n)^2 / (2 tau).
//
// Each step is solved jointly in the transport plan. The rows of the plan are
// pinned to the masses of mu_n (each row is a scaled simplex over interior
// targets plus the boundary), the boundary may additionally inject any
// nonnegative mass into each cell, and nu is whatever the plan delivers. The
// objective
//
//   sum_j vol F(nu_j) + (1 / 2 tau) [ sum c_ij g_ij + sum d_i^2 t_i + sum d_j^2 b_j ]
//
// is convex (F convex, cost linear), so accelerated projected gradient with a
// stationarity certificate reaches the global minimum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/static_transport.hpp"

namespace wbflow {

inline constexpr int kMaxJkoCellsPerAxis = 64;

namespace detail {

// Euclidean projection onto {x >= 0, sum x = total}.
inline void project_simplex(double* x, std::size_t n, double total, std::vector<double>& scratch) {
  if (n == 0) return;
  if (total <= 0.0) {
    std::fill(x, x + n, 0.0);
    return;
  }
  scratch.assign(x, x + n);
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += scratch[k];
    const double candidate = (cumulative - total) / static_cast<double>(k + 1);
    if (k + 1 == n || scratch[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  for (std::size_t k = 0; k < n; ++k) x[k] = std::max(0.0, x[k] - theta);
}

}  // namespace detail

// Per-step objective in the plan variables. Variable layout: for each source
// cell with positive mass, its interior targets followed by one boundary slot;
// then one boundary-inflow variable per cell.
class JkoObjective {
 public:
  JkoObjective(EnergySpec spec, DiscreteMeasure mu, double tau)
      : spec_(std::move(spec)), mu_(std::move(mu)), tau_(tau) {
    if (!(tau_ > 0.0)) throw invalid_input("JKO time step must be positive");
    const Grid& g = *mu_.grid();
    for (int n : g.cells_per_axis())
      if (n > kMaxJkoCellsPerAxis)
        throw invalid_input("JKO is limited to " + std::to_string(kMaxJkoCellsPerAxis) + " cells per axis");
    vol_ = g.cell_volume();
    const std::size_t n = g.size();
    const double scale = 1.0 / (2.0 * tau_);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mu_.density(i) > 0.0)) continue;
      Row row{i, mu_.cell_mass(i), offset, {}, {}};
      const double di2 = g.boundary_distance(i) * g.boundary_distance(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double c = detail::pair_cost(g, i, j, 2.0);
        const double dj2 = g.boundary_distance(j) * g.boundary_distance(j);
        // A detour through the boundary costs d_i^2 + d_j^2 and delivers the same nu,
        // so longer direct routes never improve the objective.
        if (j != i && c >= di2 + dj2) continue;
        row.targets.push_back(j);
        row.cost.push_back(c * scale);
      }
      row.cost.push_back(di2 * scale);
      offset += row.cost.size();
      rows_.push_back(std::move(row));
    }
    inflow_offset_ = offset;
    inflow_cost_.resize(n);
    for (std::size_t j = 0; j < n; ++j) inflow_cost_[j] = g.boundary_distance(j) * g.boundary_distance(j) * scale;
    size_ = offset + n;
  }

  std::size_t size() const { return size_; }
  double tau() const { return tau_; }
  const DiscreteMeasure& source() const { return mu_; }
  const EnergySpec& energy() const { return spec_; }

  // Diagonal plan: nu = mu, no boundary exchange.
  std::vector<double> initial_point() const {
    std::vector<double> x(size_, 0.0);
    for (const Row& r : rows_) {
      const auto it = std::find(r.targets.begin(), r.targets.end(), r.cell);
      x[r.offset + static_cast<std::size_t>(it - r.targets.begin())] = r.mass;
    }
    return x;
  }

  // Feasible point with every variable strictly positive.
  template <class Rng>
  std::vector<double> random_interior_point(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    std::vector<double> x(size_);
    for (const Row& r : rows_) {
      double total = 0.0;
      for (std::size_t k = 0; k < r.cost.size(); ++k) total += (x[r.offset + k] = unit(rng));
      for (std::size_t k = 0; k < r.cost.size(); ++k) x[r.offset + k] *= r.mass / total;
    }
    for (std::size_t j = 0; j < inflow_cost_.size(); ++j) x[inflow_offset_ + j] = unit(rng) * vol_;
    return x;
  }

  std::vector<double> induced_density(const std::vector<double>& x) const {
    std::vector<double> in(x.begin() + static_cast<std::ptrdiff_t>(inflow_offset_), x.end());
    for (const Row& r : rows_)
      for (std::size_t k = 0; k < r.targets.size(); ++k) in[r.targets[k]] += x[r.offset + k];
    for (double& v : in) v = std::max(0.0, v) / vol_;
    return in;
  }

  double transport_term(const std::vector<double>& x) const {
    double s = 0.0;
    for (const Row& r : rows_)
      for (std::size_t k = 0; k < r.cost.size(); ++k) s += r.cost[k] * x[r.offset + k];
    for (std::size_t j = 0; j < inflow_cost_.size(); ++j) s += inflow_cost_[j] * x[inflow_offset_ + j];
    return s;
  }

  double value(const std::vector<double>& x) const {
    double energy = 0.0;
    for (double v : induced_density(x)) energy += spec_.value(v);
    return energy * vol_ + transport_term(x);
  }

  void gradient(const std::vector<double>& x, std::vector<double>& grad) const {
    const std::vector<double> nu = induced_density(x);
    std::vector<double> dF(nu.size());
    for (std::size_t j = 0; j < nu.size(); ++j) dF[j] = spec_.derivative(std::max(nu[j], 1e-300));
    grad.resize(size_);
    for (const Row& r : rows_) {
      for (std::size_t k = 0; k < r.targets.size(); ++k) grad[r.offset + k] = dF[r.targets[k]] + r.cost[k];
      grad[r.offset + r.targets.size()] = r.cost.back();
    }
    for (std::size_t j = 0; j < nu.size(); ++j) grad[inflow_offset_ + j] = dF[j] + inflow_cost_[j];
  }

  void project(std::vector<double>& x) const {
    for (const Row& r : rows_) detail::project_simplex(x.data() + r.offset, r.cost.size(), r.mass, scratch_);
    for (std::size_t j = inflow_offset_; j < size_; ++j) x[j] = std::max(0.0, x[j]);
  }

  TransportPlan plan(const std::vector<double>& x) const {
    const DiscreteMeasure nu(mu_.grid(), induced_density(x));
    TransportPlan p = TransportPlan::empty(mu_, nu);
    for (const Row& r : rows_) {
      for (std::size_t k = 0; k < r.targets.size(); ++k)
        if (x[r.offset + k] > 0.0) p.interior.push_back({r.cell, r.targets[k], x[r.offset + k]});
      p.to_boundary[r.cell] = x[r.offset + r.targets.size()];
    }
    for (std::size_t j = 0; j < inflow_cost_.size(); ++j) p.from_boundary[j] = x[inflow_offset_ + j];
    return p;
  }

  // Infinity norm of x - P(x - grad f(x)), zero exactly at minimisers.
  double stationarity(const std::vector<double>& x) const {
    std::vector<double> g;
    gradient(x, g);
    std::vector<double> y(size_);
    for (std::size_t k = 0; k < size_; ++k) y[k] = x[k] - g[k];
    project(y);
    double r = 0.0;
    for (std::size_t k = 0; k < size_; ++k) r = std::max(r, std::abs(x[k] - y[k]));
    return r;
  }

 private:
  struct Row {
    std::size_t cell;
    double mass;
    std::size_t offset;
    std::vector<std::size_t> targets;
    std::vector<double> cost;  // scaled by 1/(2 tau); last entry is the boundary slot
  };

  EnergySpec spec_;
  DiscreteMeasure mu_;
  double tau_;
  double vol_ = 1.0;
  std::vector<Row> rows_;
  std::size_t inflow_offset_ = 0;
  std::vector<double> inflow_cost_;
  std::size_t size_ = 0;
  mutable std::vector<double> scratch_;
};

struct JkoOptions {
  double stationarity_tol = 1e-7;
  double stall_tol = 1e-10;  // relative objective decrease over `stall_window` iterations
  int stall_window = 50;
  long max_iterations = 100'000;
  int check_every = 10;
};

struct JkoStepResult {
  DiscreteMeasure next;
  TransportPlan plan;
  double objective = 0.0;
  double energy = 0.0;       // F(next)
  double plan_cost = 0.0;    // C(plan) >= Wb_2(next, mu_n)^2
  double stationarity = 0.0;
  long iterations = 0;
};

// Accelerated projected gradient with backtracking and function-value restarts.
inline JkoStepResult jko_step(const EnergySpec& spec, const DiscreteMeasure& mu, double tau,
                              const JkoOptions& options = {}) {
  const JkoObjective obj(spec, mu, tau);
  std::vector<double> x = obj.initial_point();
  std::vector<double> y = x, z(x.size()), g, x_prev;
  double fx = obj.value(x);
  double lipschitz = 1.0;
  double t = 1.0;
  std::vector<double> history{fx};
  double stationarity = obj.stationarity(x);
  long it = 0;
  while (stationarity > options.stationarity_tol && it < options.max_iterations) {
    ++it;
    obj.gradient(y, g);
    const double fy = obj.value(y);
    double fz;
    for (;;) {
      for (std::size_t k = 0; k < z.size(); ++k) z[k] = y[k] - g[k] / lipschitz;
      obj.project(z);
      fz = obj.value(z);
      double lin = 0.0, quad = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = z[k] - y[k];
        lin += g[k] * d;
        quad += d * d;
      }
      if (fz <= fy + lin + 0.5 * lipschitz * quad + 1e-15 * std::abs(fy) || lipschitz > 1e300) break;
      lipschitz *= 2.0;
    }
    if (fz > fx) {
      // A plain projected step from x that fails to descend means x is optimal
      // to rounding; otherwise restart the momentum from x.
      if (y == x) break;
      y = x;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    x_prev.swap(x);
    x = z;
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + beta * (x[k] - x_prev[k]);
    obj.project(y);
    t = t_next;
    fx = fz;
    lipschitz *= 0.9;
    history.push_back(fx);
    if (it % options.check_every == 0) stationarity = obj.stationarity(x);
    const std::size_t w = static_cast<std::size_t>(options.stall_window);
    if (history.size() > w) {
      const double old = history[history.size() - 1 - w];
      if (old - fx <= options.stall_tol * std::max(1.0, std::abs(fx))) {
        stationarity = obj.stationarity(x);
        break;
      }
    }
  }
  stationarity = obj.stationarity(x);
  if (stationarity > options.stationarity_tol && it >= options.max_iterations)
    throw solver_error("JKO step did not reach stationarity", stationarity);

  JkoStepResult result;
  result.plan = obj.plan(x);
  result.next = result.plan.target;
  result.energy = internal_energy(spec, result.next);
  result.plan_cost = obj.transport_term(x) * 2.0 * tau;
  result.objective = result.energy + obj.transport_term(x);
  result.stationarity = stationarity;
  result.iterations = it;
  return result;
}

struct JkoStepDiagnostics {
  std::size_t step = 0;
  double time = 0.0;
  double energy = 0.0;
  double step_distance = 0.0;  // Wb_2(mu_{n+1}, mu_n) from the exact LP
  double mass = 0.0;
  double stationarity = 0.0;
  long iterations = 0;
  double reservoir_balance = 0.0;  // to_boundary - from_boundary of the step plan
};

struct JkoRun {
  Curve curve;
  std::vector<JkoStepDiagnostics> steps;
};

inline JkoRun run_jko(const EnergySpec& spec, const DiscreteMeasure& mu0, double tau, double horizon,
                      const JkoOptions& options = {}) {
  if (!(tau > 0.0)) throw invalid_input("JKO time step must be positive");
  if (!(horizon >= tau)) throw invalid_input("JKO horizon must be at least one time step");
  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / tau - 1e-9));
  JkoRun run;
  run.curve.grid = mu0.grid();
  run.curve.times.push_back(0.0);
  run.curve.densities.push_back(mu0.density());
  run.steps.push_back({0, 0.0, internal_energy(spec, mu0), 0.0, mu0.mass(), 0.0, 0, 0.0});
  DiscreteMeasure current = mu0;
  for (std::size_t n = 0; n < n_steps; ++n) {
    JkoStepResult step;
    try {
      step = jko_step(spec, current, tau, options);
    } catch (const solver_error& e) {
      throw solver_error(std::string(e.what()) + " at step " + std::to_string(n), e.residual(),
                         static_cast<long>(n));
    }
    const double dist = wb_distance(step.next, current, 2.0).value;
    run.curve.times.push_back(static_cast<double>(n + 1) * tau);
    run.curve.densities.push_back(step.next.density());
    run.steps.push_back({n + 1, static_cast<double>(n + 1) * tau, step.energy, dist, step.next.mass(),
                         step.stationarity, step.iterations,
                         step.plan.total_to_boundary() - step.plan.total_from_boundary()});
    current = step.next;
  }
  return run;
}

}  // namespace wbflow
