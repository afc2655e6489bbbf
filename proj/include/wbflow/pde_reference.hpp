#pragma once

// Backward-Euler finite volumes for d_t rho = Lap L(rho) with rho = lambda on
// the boundary. Each cell exchanges A_e (L(rho_a) - L(rho_b)) / l_e with its
// neighbours; boundary faces see the ghost value L(lambda) = 0 at half-cell
// spacing, the same convention as the trace dissipation.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"

namespace wbflow {

struct FdOptions {
  double newton_tolerance = 1e-12;
  int max_newton_iterations = 100;
};

namespace detail {

// Outgoing fluxes of L(rho) per edge, in curve momentum convention.
inline std::vector<double> pressure_fluxes(const Grid& g, const EnergySpec& spec, const std::vector<double>& rho) {
  std::vector<double> flux;
  flux.reserve(g.edge_count());
  for (const InteriorEdge& e : g.interior_edges())
    flux.push_back(g.face_area(e.axis) * (spec.pressure(rho[e.lo]) - spec.pressure(rho[e.hi])) / g.edge_length(e));
  for (const BoundaryEdge& e : g.boundary_edges())
    flux.push_back(g.face_area(e.axis) * spec.pressure(rho[e.cell]) / g.edge_length(e));
  return flux;
}

inline std::size_t step_count(double dt, double horizon) {
  const double r = horizon / dt;
  const double n = std::ceil(r - 1e-9 * std::max(1.0, r));
  return static_cast<std::size_t>(std::max(1.0, n));
}

}  // namespace detail

// Residual of one implicit step, in density units.
inline std::vector<double> implicit_residual(const Grid& g, const EnergySpec& spec, const std::vector<double>& prev,
                                             const std::vector<double>& next, double dt) {
  const std::vector<double> div = detail::divergence(g, detail::pressure_fluxes(g, spec, next));
  std::vector<double> r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = next[i] - prev[i] + dt * div[i] / g.cell_volume();
  return r;
}

inline std::vector<double> implicit_step(const Grid& g, const EnergySpec& spec, const std::vector<double>& prev,
                                         double dt, const FdOptions& options = {}) {
  const std::size_t n = g.size();
  std::vector<double> x = prev;
  auto norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  };
  std::vector<double> r = implicit_residual(g, spec, prev, x, dt);
  double rn = norm(r);
  const double c = dt / g.cell_volume();
  for (int it = 0; it < options.max_newton_iterations && rn > options.newton_tolerance; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(n, 1.0);
    for (const InteriorEdge& e : g.interior_edges()) {
      const double k = c * g.face_area(e.axis) / g.edge_length(e);
      const double dlo = k * spec.pressure_derivative(x[e.lo]);
      const double dhi = k * spec.pressure_derivative(x[e.hi]);
      diag[e.lo] += dlo;
      diag[e.hi] += dhi;
      trip.emplace_back(static_cast<int>(e.lo), static_cast<int>(e.hi), -dhi);
      trip.emplace_back(static_cast<int>(e.hi), static_cast<int>(e.lo), -dlo);
    }
    for (const BoundaryEdge& e : g.boundary_edges())
      diag[e.cell] += c * g.face_area(e.axis) / g.edge_length(e) * spec.pressure_derivative(x[e.cell]);
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
    Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
    if (lu.info() != Eigen::Success) throw solver_error("Newton Jacobian is singular", rn);
    const Eigen::VectorXd delta = lu.solve(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(n)));

    // Damped update: halve while the step leaves the cone or raises the residual.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      std::vector<double> trial(n);
      bool nonneg = true;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = x[i] - t * delta[static_cast<Eigen::Index>(i)];
        if (trial[i] < 0.0) nonneg = false;
      }
      if (!nonneg) continue;
      std::vector<double> tr = implicit_residual(g, spec, prev, trial, dt);
      const double tn = norm(tr);
      if (tn < rn || tn <= options.newton_tolerance) {
        x = std::move(trial);
        r = std::move(tr);
        rn = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(rn <= options.newton_tolerance)) throw solver_error("Newton iteration did not converge", rn);
  return x;
}

// Curve with times {0, dt, ..., N dt}, N = ceil(T / dt). Momenta are the
// implicit fluxes, so the discrete continuity equation holds up to the Newton
// tolerance.
inline Curve fd_solve(const EnergySpec& spec, const DiscreteMeasure& rho0, double dt, double horizon,
                      const FdOptions& options = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid_input("time step must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw invalid_input("horizon must be positive");
  const Grid& g = *rho0.grid();
  const std::size_t steps = detail::step_count(dt, horizon);
  Curve c;
  c.grid = rho0.grid();
  c.times.push_back(0.0);
  c.densities.push_back(rho0.density());
  std::vector<std::vector<double>> momenta;
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> next;
    try {
      next = implicit_step(g, spec, c.densities.back(), dt, options);
    } catch (const solver_error& e) {
      throw solver_error(std::string(e.what()) + " at step " + std::to_string(k), e.residual(), static_cast<long>(k));
    }
    momenta.push_back(detail::pressure_fluxes(g, spec, next));
    c.densities.push_back(std::move(next));
    c.times.push_back(static_cast<double>(k + 1) * dt);
  }
  c.momenta = std::move(momenta);
  return c;
}

// Largest |P(t) - P(s)| over node pairs and test functions, where
//   P(t) = sum_i phi_i (rho_i^t - rho_i^0) vol - sum_{k<t} dt_k sum_i (Lap_h phi)_i L(rho_i^k) vol.
inline double weak_residual(const Curve& curve, const EnergySpec& spec,
                            const std::vector<std::vector<double>>& test_functions) {
  curve.validate();
  const Grid& g = *curve.grid;
  std::vector<char> near_boundary(g.size(), 0);
  for (const BoundaryEdge& e : g.boundary_edges()) near_boundary[e.cell] = 1;
  double worst = 0.0;
  for (const std::vector<double>& phi : test_functions) {
    if (phi.size() != g.size()) throw invalid_input("test function has the wrong size");
    for (std::size_t i = 0; i < g.size(); ++i)
      if (near_boundary[i] && phi[i] != 0.0)
        throw invalid_input("test functions must vanish on boundary-adjacent cells");
    std::vector<double> lap(g.size(), 0.0);
    for (const InteriorEdge& e : g.interior_edges()) {
      const double k = g.face_area(e.axis) / g.edge_length(e) / g.cell_volume();
      lap[e.lo] += k * (phi[e.hi] - phi[e.lo]);
      lap[e.hi] += k * (phi[e.lo] - phi[e.hi]);
    }
    double lo = 0.0, hi = 0.0, integral = 0.0;
    for (std::size_t t = 0; t < curve.nodes(); ++t) {
      if (t > 0) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += lap[i] * spec.pressure(curve.densities[t - 1][i]);
        integral += curve.dt(t - 1) * s * g.cell_volume();
      }
      double change = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) change += phi[i] * (curve.densities[t][i] - curve.densities[0][i]);
      const double p = change * g.cell_volume() - integral;
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

}  // namespace wbflow
