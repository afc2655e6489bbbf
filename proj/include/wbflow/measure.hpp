#pragma once

// Nonnegative measures given by a density per grid cell, and transport plans
// that may send mass into, or draw mass from, the boundary reservoir.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "wbflow/error.hpp"
#include "wbflow/grid.hpp"

namespace wbflow {

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(GridPtr grid, std::vector<double> density)
      : grid_(std::move(grid)), density_(std::move(density)) {
    if (!grid_) throw invalid_input("measure requires a grid");
    if (density_.size() != grid_->size())
      throw invalid_input("density has " + std::to_string(density_.size()) + " entries, grid has " +
                          std::to_string(grid_->size()) + " cells");
    for (double r : density_)
      if (!(r >= 0.0) || !std::isfinite(r)) throw invalid_input("density must be finite and nonnegative");
  }

  static DiscreteMeasure zero(GridPtr grid) {
    const std::size_t n = grid->size();
    return DiscreteMeasure(std::move(grid), std::vector<double>(n, 0.0));
  }

  static DiscreteMeasure constant(GridPtr grid, double value) {
    const std::size_t n = grid->size();
    return DiscreteMeasure(std::move(grid), std::vector<double>(n, value));
  }

  // Puts `mass` into a single cell.
  static DiscreteMeasure point_mass(GridPtr grid, std::size_t cell, double mass) {
    std::vector<double> rho(grid->size(), 0.0);
    rho.at(cell) = mass / grid->cell_volume();
    return DiscreteMeasure(std::move(grid), std::move(rho));
  }

  // Density f(center) in every cell.
  template <class F>
  static DiscreteMeasure sample(GridPtr grid, F&& f) {
    std::vector<double> rho(grid->size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = f(grid->center(i));
    return DiscreteMeasure(std::move(grid), std::move(rho));
  }

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  double density(std::size_t cell) const { return density_[cell]; }
  std::size_t size() const { return density_.size(); }

  double cell_mass(std::size_t cell) const { return density_[cell] * grid_->cell_volume(); }
  double mass() const {
    return std::accumulate(density_.begin(), density_.end(), 0.0) * grid_->cell_volume();
  }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.grid_ == b.grid_ && a.density_ == b.density_;
  }

 private:
  GridPtr grid_;
  std::vector<double> density_;
};

inline void require_same_grid(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!a.grid() || a.grid() != b.grid()) throw invalid_input("measures must live on the same grid");
}

// Integral of the p-th power of the distance to the boundary.
inline double moment(const DiscreteMeasure& mu, double p) {
  if (!(p >= 1.0)) throw invalid_input("moment order must satisfy p >= 1");
  const Grid& g = *mu.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.density(i) > 0.0) s += std::pow(g.boundary_distance(i), p) * mu.cell_mass(i);
  return s;
}

struct InteriorFlow {
  std::size_t source;
  std::size_t target;
  double mass;
};

// Coupling between `source` and `target` restricted to the interior, split into
// interior-interior flows, flows from a cell to its nearest boundary point, and
// flows from a cell's nearest boundary point into it. Boundary-to-boundary mass
// is never represented.
struct TransportPlan {
  DiscreteMeasure source;
  DiscreteMeasure target;
  std::vector<InteriorFlow> interior;
  std::vector<double> to_boundary;
  std::vector<double> from_boundary;

  static TransportPlan empty(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    require_same_grid(mu, nu);
    return {mu, nu, {}, std::vector<double>(mu.size(), 0.0), std::vector<double>(mu.size(), 0.0)};
  }

  double total_to_boundary() const { return std::accumulate(to_boundary.begin(), to_boundary.end(), 0.0); }
  double total_from_boundary() const {
    return std::accumulate(from_boundary.begin(), from_boundary.end(), 0.0);
  }
};

struct PlanReport {
  double max_source_residual = 0.0;
  double max_target_residual = 0.0;
  double boundary_boundary_mass = 0.0;
  double most_negative_mass = 0.0;
  bool within_tolerance = true;

  double max_residual() const { return std::max(max_source_residual, max_target_residual); }
};

inline PlanReport validate_plan(const TransportPlan& plan, const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double tol = 1e-9) {
  require_same_grid(mu, nu);
  const std::size_t n = mu.size();
  if (plan.to_boundary.size() != n || plan.from_boundary.size() != n)
    throw invalid_input("plan boundary flows do not match the grid");

  std::vector<double> out(plan.to_boundary);
  std::vector<double> in(plan.from_boundary);
  PlanReport report;
  for (double m : plan.to_boundary) report.most_negative_mass = std::min(report.most_negative_mass, m);
  for (double m : plan.from_boundary) report.most_negative_mass = std::min(report.most_negative_mass, m);
  for (const InteriorFlow& f : plan.interior) {
    if (f.source >= n || f.target >= n) throw invalid_input("plan flow references a cell outside the grid");
    out[f.source] += f.mass;
    in[f.target] += f.mass;
    report.most_negative_mass = std::min(report.most_negative_mass, f.mass);
  }
  for (std::size_t i = 0; i < n; ++i) {
    report.max_source_residual = std::max(report.max_source_residual, std::abs(out[i] - mu.cell_mass(i)));
    report.max_target_residual = std::max(report.max_target_residual, std::abs(in[i] - nu.cell_mass(i)));
  }
  // Boundary-to-boundary mass has no representation in TransportPlan.
  report.boundary_boundary_mass = 0.0;
  report.within_tolerance = report.max_residual() <= tol && report.most_negative_mass >= -tol;
  return report;
}

// Transport cost with exponent p; boundary flows pay the distance to the
// nearest boundary point.
inline double plan_cost(const TransportPlan& plan, double p, double tol = 1e-9) {
  if (!(p >= 1.0)) throw invalid_input("cost exponent must satisfy p >= 1");
  const PlanReport report = validate_plan(plan, plan.source, plan.target, tol);
  if (!report.within_tolerance)
    throw invalid_input("plan violates its marginal constraints (residual " +
                        std::to_string(report.max_residual()) + ")");
  const Grid& g = *plan.source.grid();
  double cost = 0.0;
  for (const InteriorFlow& f : plan.interior)
    if (f.mass > 0.0 && f.source != f.target) cost += f.mass * std::pow(g.distance(f.source, f.target), p);
  for (std::size_t i = 0; i < plan.to_boundary.size(); ++i) {
    const double dp = std::pow(g.boundary_distance(i), p);
    cost += (plan.to_boundary[i] + plan.from_boundary[i]) * dp;
  }
  return cost;
}

// Diagonal plan coupling a measure with itself.
inline TransportPlan identity_plan(const DiscreteMeasure& mu) {
  TransportPlan plan = TransportPlan::empty(mu, mu);
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.density(i) > 0.0) plan.interior.push_back({i, i, mu.cell_mass(i)});
  return plan;
}

}  // namespace wbflow
