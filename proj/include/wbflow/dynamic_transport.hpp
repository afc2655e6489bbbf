#pragma once

// Staggered discretisation of the continuity equation with a free boundary
// flux, and the Benamou-Brenier action built on it.
//
// Densities live on time nodes t_0 < ... < t_K, momenta on the intervals
// between them. A momentum is one signed mass flux (mass per unit time) per
// edge: interior edges are positive in the axis direction, boundary edges are
// positive for outflow. Per cell and interval
//
//   vol (rho_i^{k+1} - rho_i^k) / dt + sum of outgoing fluxes = 0.
//
// Boundary fluxes are not constrained by anything else; only interior test
// functions enter the equation, so the boundary acts as a reservoir.
//
// The action of interval k is dt * sum_e w_e alpha_p(J_e / A_e, s_e), where
// A_e is the face measure, w_e = A_e * (centre spacing) and s_e averages the
// adjacent cell densities over both ends of the interval (boundary edges use
// the single adjacent cell).

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/static_transport.hpp"

namespace wbflow {

struct Curve {
  GridPtr grid;
  std::vector<double> times;
  std::vector<std::vector<double>> densities;
  // One entry per interval, each with Grid::edge_count() fluxes.
  std::optional<std::vector<std::vector<double>>> momenta;

  std::size_t nodes() const { return times.size(); }
  std::size_t intervals() const { return times.empty() ? 0 : times.size() - 1; }
  double dt(std::size_t k) const { return times[k + 1] - times[k]; }
  DiscreteMeasure measure(std::size_t k) const { return DiscreteMeasure(grid, densities[k]); }

  void validate() const {
    if (!grid) throw invalid_input("curve has no grid");
    if (times.empty() || times.size() != densities.size())
      throw invalid_input("curve needs one density per time node");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
      if (!(times[k + 1] > times[k])) throw invalid_input("curve times must be increasing");
    for (const auto& d : densities)
      if (d.size() != grid->size()) throw invalid_input("curve density has the wrong size");
    if (momenta) {
      if (momenta->size() != intervals()) throw invalid_input("curve needs one momentum per interval");
      for (const auto& m : *momenta)
        if (m.size() != grid->edge_count()) throw invalid_input("curve momentum has the wrong size");
    }
  }
};

inline Curve reversed(const Curve& c) {
  Curve r;
  r.grid = c.grid;
  const double t_end = c.times.back();
  for (std::size_t k = c.times.size(); k-- > 0;) {
    r.times.push_back(t_end - c.times[k]);
    r.densities.push_back(c.densities[k]);
  }
  if (c.momenta) {
    std::vector<std::vector<double>> m(c.momenta->rbegin(), c.momenta->rend());
    for (auto& v : m)
      for (double& f : v) f = -f;
    r.momenta = std::move(m);
  }
  return r;
}

namespace detail {

// Edge densities for an interval between density vectors a and b.
inline std::vector<double> edge_densities(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> s;
  s.reserve(g.edge_count());
  for (const InteriorEdge& e : g.interior_edges()) s.push_back(0.25 * (a[e.lo] + a[e.hi] + b[e.lo] + b[e.hi]));
  for (const BoundaryEdge& e : g.boundary_edges()) s.push_back(0.5 * (a[e.cell] + b[e.cell]));
  return s;
}

// Face measure and weight w_e = A_e * spacing for every edge id.
struct EdgeGeometry {
  std::vector<double> area;
  std::vector<double> weight;
};

inline EdgeGeometry edge_geometry(const Grid& g) {
  EdgeGeometry geo;
  for (const InteriorEdge& e : g.interior_edges()) {
    geo.area.push_back(g.face_area(e.axis));
    geo.weight.push_back(edge_weight(g, e));
  }
  for (const BoundaryEdge& e : g.boundary_edges()) {
    geo.area.push_back(g.face_area(e.axis));
    geo.weight.push_back(edge_weight(g, e));
  }
  return geo;
}

// Net outgoing flux per cell.
inline std::vector<double> divergence(const Grid& g, const std::vector<double>& flux) {
  std::vector<double> div(g.size(), 0.0);
  const std::size_t ni = g.interior_edges().size();
  for (std::size_t k = 0; k < ni; ++k) {
    const InteriorEdge& e = g.interior_edges()[k];
    div[e.lo] += flux[k];
    div[e.hi] -= flux[k];
  }
  for (std::size_t k = 0; k < g.boundary_edges().size(); ++k) div[g.boundary_edges()[k].cell] += flux[ni + k];
  return div;
}

}  // namespace detail

// Largest cell residual of the discrete continuity equation (mass per time).
inline double continuity_residual(const Curve& c) {
  c.validate();
  if (!c.momenta) throw invalid_input("continuity residual needs momenta");
  const Grid& g = *c.grid;
  double r = 0.0;
  for (std::size_t k = 0; k < c.intervals(); ++k) {
    const std::vector<double> div = detail::divergence(g, (*c.momenta)[k]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double rate = g.cell_volume() * (c.densities[k + 1][i] - c.densities[k][i]) / c.dt(k);
      r = std::max(r, std::abs(rate + div[i]));
    }
  }
  return r;
}

inline double interval_action(const Curve& c, std::size_t k, double p) {
  const Grid& g = *c.grid;
  const detail::EdgeGeometry geo = detail::edge_geometry(g);
  const std::vector<double> s = detail::edge_densities(g, c.densities[k], c.densities[k + 1]);
  const std::vector<double>& flux = (*c.momenta)[k];
  double a = 0.0;
  for (std::size_t e = 0; e < s.size(); ++e) a += geo.weight[e] * alpha_p(flux[e] / geo.area[e], s[e], p);
  return c.dt(k) * a;
}

// Total action; +infinity when mass flows through an edge of zero density.
inline double action(const Curve& c, double p) {
  c.validate();
  if (!c.momenta) throw invalid_input("action needs momenta");
  if (!(p >= 1.0)) throw invalid_input("action exponent must satisfy p >= 1");
  double a = 0.0;
  for (std::size_t k = 0; k < c.intervals(); ++k) a += interval_action(c, k, p);
  return a;
}

// Difference-quotient estimate Wb_p(rho^k, rho^{k+1}) / dt of the metric speed.
inline std::vector<double> metric_speed(const Curve& c, double p) {
  c.validate();
  if (c.intervals() < 1) throw invalid_input("metric speed needs at least two time nodes");
  std::vector<double> v;
  for (std::size_t k = 0; k < c.intervals(); ++k)
    v.push_back(wb_distance(c.measure(k), c.measure(k + 1), p).value / c.dt(k));
  return v;
}

// Per interval: Wb_p(rho^k, rho^{k+1})^p and dt^(p-1) times the interval action.
struct ActionBound {
  double distance_p;
  double bound;
};

inline std::vector<ActionBound> action_bound(const Curve& c, double p) {
  c.validate();
  if (!c.momenta) throw invalid_input("action bound needs momenta");
  std::vector<ActionBound> out;
  for (std::size_t k = 0; k < c.intervals(); ++k) {
    const double w = wb_distance(c.measure(k), c.measure(k + 1), p).cost;
    out.push_back({w, std::pow(c.dt(k), p - 1.0) * interval_action(c, k, p)});
  }
  return out;
}

struct MinimalFlux {
  std::vector<double> flux;
  double cost = 0.0;  // sum_e (w_e / A_e^2) J_e^2 / s_e
};

// Cheapest momentum (p = 2) moving rho_a to rho_b in one interval of length dt
// with edge densities s. Cells whose incident edges all carry zero density
// cannot change; if they must, the cost is infinite.
inline MinimalFlux minimal_flux(const Grid& g, const std::vector<double>& rho_a, const std::vector<double>& rho_b,
                                const std::vector<double>& s, double dt) {
  const detail::EdgeGeometry geo = detail::edge_geometry(g);
  const std::size_t n = g.size(), ni = g.interior_edges().size(), ne = g.edge_count();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = -g.cell_volume() * (rho_b[i] - rho_a[i]) / dt;
  // J_e = D_e (B^T phi)_e with D_e = s_e A_e^2 / (2 w_e).
  std::vector<double> d(ne);
  for (std::size_t e = 0; e < ne; ++e) d[e] = s[e] > 0.0 ? s[e] * geo.area[e] * geo.area[e] / (2.0 * geo.weight[e]) : 0.0;

  std::vector<double> diag(n, 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < ni; ++k) {
    const InteriorEdge& e = g.interior_edges()[k];
    if (d[k] == 0.0) continue;
    diag[e.lo] += d[k];
    diag[e.hi] += d[k];
    trip.emplace_back(static_cast<int>(e.lo), static_cast<int>(e.hi), -d[k]);
    trip.emplace_back(static_cast<int>(e.hi), static_cast<int>(e.lo), -d[k]);
  }
  for (std::size_t k = 0; k < g.boundary_edges().size(); ++k) diag[g.boundary_edges()[k].cell] += d[ni + k];

  // Cells with no usable edge are removed; their rate must vanish.
  std::vector<int> index(n, -1);
  int m = 0;
  MinimalFlux out;
  out.flux.assign(ne, 0.0);
  const double scale = std::max(1.0, *std::max_element(diag.begin(), diag.end()));
  for (std::size_t i = 0; i < n; ++i) {
    if (diag[i] > 0.0) {
      index[i] = m++;
    } else if (std::abs(r[i]) > 1e-14 * scale) {
      out.cost = kInfinity;
      return out;
    }
  }
  if (m == 0) return out;
  std::vector<Eigen::Triplet<double>> reduced;
  for (const auto& t : trip)
    if (index[t.row()] >= 0 && index[t.col()] >= 0) reduced.emplace_back(index[t.row()], index[t.col()], t.value());
  Eigen::VectorXd rhs(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] < 0) continue;
    reduced.emplace_back(index[i], index[i], diag[i]);
    rhs[index[i]] = r[i];
  }
  Eigen::SparseMatrix<double> lap(m, m);
  lap.setFromTriplets(reduced.begin(), reduced.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(lap);
  Eigen::VectorXd phi = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !phi.allFinite()) {
    // A connected component without boundary contact conserves mass.
    out.cost = kInfinity;
    return out;
  }
  auto phi_of = [&](std::size_t i) { return index[i] >= 0 ? phi[index[i]] : 0.0; };
  for (std::size_t k = 0; k < ni; ++k) {
    const InteriorEdge& e = g.interior_edges()[k];
    out.flux[k] = d[k] * (phi_of(e.lo) - phi_of(e.hi));
  }
  for (std::size_t k = 0; k < g.boundary_edges().size(); ++k)
    out.flux[ni + k] = d[ni + k] * phi_of(g.boundary_edges()[k].cell);
  for (std::size_t e = 0; e < ne; ++e)
    if (out.flux[e] != 0.0) out.cost += geo.weight[e] * out.flux[e] * out.flux[e] / (geo.area[e] * geo.area[e] * s[e]);
  return out;
}

// Squared one-interval Benamou-Brenier distance between two densities:
// dt * (interval action), which does not depend on dt.
inline double one_step_transport_cost(const Grid& g, const std::vector<double>& rho_a, const std::vector<double>& rho_b) {
  return minimal_flux(g, rho_a, rho_b, detail::edge_densities(g, rho_a, rho_b), 1.0).cost;
}

struct DynamicOptions {
  double tolerance = 1e-6;
  long max_iterations = 2'000'000;
  int check_every = 50;
};

struct DynamicResult {
  double value = 0.0;   // action^(1/2) of the returned curve
  double action = 0.0;
  Curve curve;
  double kkt_residual = 0.0;
  long iterations = 0;
};

namespace detail {

// prox of b * q^2 / s at (s0, q0), b > 0.
inline void prox_alpha2(double& s, double& q, double b) {
  const double s0 = s, q0 = q;
  if (s0 + q0 * q0 / (4.0 * b) <= 0.0) {
    s = 0.0;
    q = 0.0;
    return;
  }
  // h(x) = x - s0 - b q0^2 / (x + 2b)^2 is increasing and concave with h(0) < 0,
  // so Newton from 0 climbs monotonically to the root.
  double x = std::max(0.0, s0);
  if (x > 0.0 && x - s0 - b * q0 * q0 / ((x + 2 * b) * (x + 2 * b)) > 0.0) x = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double den = x + 2.0 * b;
    const double h = x - s0 - b * q0 * q0 / (den * den);
    const double dh = 1.0 + 2.0 * b * q0 * q0 / (den * den * den);
    const double step = h / dh;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, x)) break;
  }
  s = std::max(x, 0.0);
  q = q0 * s / (s + 2.0 * b);
}

}  // namespace detail

// Minimises the discrete action (p = 2) over curves with K intervals joining
// mu0 and mu1 on [0, 1]. Chambolle-Pock iterations alternate the prox of the
// action (per edge, closed form up to a scalar root) with the projection onto
// the continuity equation with pinned endpoints. The final curve is polished:
// densities are clipped to be nonnegative and each interval receives its exact
// cheapest momentum, so the continuity equation holds to solver precision.
inline DynamicResult solve_dynamic(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double p, int K,
                                   const DynamicOptions& options = {}) {
  require_same_grid(mu0, mu1);
  if (p != 2.0) throw invalid_input("dynamic solver supports p = 2 only");
  if (K < 1) throw invalid_input("dynamic solver needs at least one time step");
  const Grid& g = *mu0.grid();
  const std::size_t n = g.size(), ne = g.edge_count(), ni = g.interior_edges().size();
  const auto Ks = static_cast<std::size_t>(K);
  const double dt = 1.0 / K;
  const double vol = g.cell_volume();
  const detail::EdgeGeometry geo = detail::edge_geometry(g);

  DynamicResult result;
  result.curve.grid = mu0.grid();
  for (std::size_t k = 0; k <= Ks; ++k) result.curve.times.push_back(static_cast<double>(k) * dt);

  // Unknowns x = [rho^0 .. rho^K | J^0 .. J^{K-1}].
  const std::size_t nrho = (Ks + 1) * n, nx = nrho + Ks * ne, ny = 2 * Ks * ne;
  auto rho_at = [&](std::size_t k, std::size_t i) { return k * n + i; };
  auto flux_at = [&](std::size_t k, std::size_t e) { return nrho + k * ne + e; };

  // Affine constraints: continuity per (interval, cell) and pinned endpoints.
  std::vector<Eigen::Triplet<double>> at;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(Ks * n + 2 * n));
  int row = 0;
  for (std::size_t k = 0; k < Ks; ++k) {
    for (std::size_t i = 0; i < n; ++i, ++row) {
      at.emplace_back(row, static_cast<int>(rho_at(k + 1, i)), vol / dt);
      at.emplace_back(row, static_cast<int>(rho_at(k, i)), -vol / dt);
    }
    for (std::size_t e = 0; e < ni; ++e) {
      const InteriorEdge& ed = g.interior_edges()[e];
      at.emplace_back(static_cast<int>(k * n + ed.lo), static_cast<int>(flux_at(k, e)), 1.0);
      at.emplace_back(static_cast<int>(k * n + ed.hi), static_cast<int>(flux_at(k, e)), -1.0);
    }
    for (std::size_t e = 0; e < g.boundary_edges().size(); ++e)
      at.emplace_back(static_cast<int>(k * n + g.boundary_edges()[e].cell), static_cast<int>(flux_at(k, ni + e)), 1.0);
  }
  for (std::size_t i = 0; i < n; ++i, ++row) {
    at.emplace_back(row, static_cast<int>(rho_at(0, i)), 1.0);
    b[row] = mu0.density(i);
  }
  for (std::size_t i = 0; i < n; ++i, ++row) {
    at.emplace_back(row, static_cast<int>(rho_at(Ks, i)), 1.0);
    b[row] = mu1.density(i);
  }
  Eigen::SparseMatrix<double> A(row, static_cast<Eigen::Index>(nx));
  A.setFromTriplets(at.begin(), at.end());
  const Eigen::SparseMatrix<double> AAt = A * A.transpose();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> aat(AAt);
  if (aat.info() != Eigen::Success) throw solver_error("continuity projection could not be factorised", 0.0);
  auto project = [&](Eigen::VectorXd& x) {
    const Eigen::VectorXd lambda = aat.solve(A * x - b);
    x -= A.transpose() * lambda;
  };

  // Linear map x -> y = [s (edge densities) | q (fluxes)], one pair per (interval, edge).
  std::vector<Eigen::Triplet<double>> kt;
  for (std::size_t k = 0; k < Ks; ++k) {
    for (std::size_t e = 0; e < ni; ++e) {
      const InteriorEdge& ed = g.interior_edges()[e];
      const int r = static_cast<int>(k * ne + e);
      for (std::size_t kk : {k, k + 1}) {
        kt.emplace_back(r, static_cast<int>(rho_at(kk, ed.lo)), 0.25);
        kt.emplace_back(r, static_cast<int>(rho_at(kk, ed.hi)), 0.25);
      }
    }
    for (std::size_t e = 0; e < g.boundary_edges().size(); ++e) {
      const int r = static_cast<int>(k * ne + ni + e);
      for (std::size_t kk : {k, k + 1}) kt.emplace_back(r, static_cast<int>(rho_at(kk, g.boundary_edges()[e].cell)), 0.5);
    }
    for (std::size_t e = 0; e < ne; ++e)
      kt.emplace_back(static_cast<int>(Ks * ne + k * ne + e), static_cast<int>(flux_at(k, e)), 1.0);
  }
  Eigen::SparseMatrix<double> Kop(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  Kop.setFromTriplets(kt.begin(), kt.end());
  const Eigen::SparseMatrix<double> Kt = Kop.transpose();

  // Operator norm by power iteration.
  double knorm = 1.0;
  {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(nx));
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd w = Kt * (Kop * v);
      const double nrm = w.norm();
      if (nrm == 0.0) break;
      knorm = std::sqrt(nrm / v.norm());
      v = w / nrm;
    }
  }
  // Per-entry weights of the action: dt * w_e / A_e^2 times q^2 / s.
  std::vector<double> weight(Ks * ne);
  for (std::size_t k = 0; k < Ks; ++k)
    for (std::size_t e = 0; e < ne; ++e) weight[k * ne + e] = dt * geo.weight[e] / (geo.area[e] * geo.area[e]);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx));
  for (std::size_t k = 0; k <= Ks; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(k) * dt;
      x[static_cast<Eigen::Index>(rho_at(k, i))] = (1.0 - t) * mu0.density(i) + t * mu1.density(i);
    }
  project(x);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ny));
  Eigen::VectorXd x_bar = x, x_old, y_old;
  const double tau = 0.99 / knorm, sigma = 0.99 / knorm;

  auto polish = [&](const Eigen::VectorXd& xs) {
    Curve c;
    c.grid = mu0.grid();
    c.times = result.curve.times;
    c.densities.assign(Ks + 1, std::vector<double>(n));
    for (std::size_t k = 0; k <= Ks; ++k)
      for (std::size_t i = 0; i < n; ++i)
        c.densities[k][i] = k == 0 ? mu0.density(i)
                            : k == Ks ? mu1.density(i)
                                      : std::max(0.0, xs[static_cast<Eigen::Index>(rho_at(k, i))]);
    std::vector<std::vector<double>> mom(Ks);
    double total = 0.0;
    for (std::size_t k = 0; k < Ks; ++k) {
      const MinimalFlux mf = minimal_flux(g, c.densities[k], c.densities[k + 1],
                                          detail::edge_densities(g, c.densities[k], c.densities[k + 1]), dt);
      mom[k] = mf.flux;
      total += dt * mf.cost;
    }
    c.momenta = std::move(mom);
    return std::pair<Curve, double>(std::move(c), total);
  };

  double best_action = kInfinity;
  double residual = kInfinity;
  long it = 0;
  for (; it < options.max_iterations; ++it) {
    y_old = y;
    x_old = x;
    // Dual step: prox of sigma F* by Moreau's identity.
    Eigen::VectorXd v = y + sigma * (Kop * x_bar);
    for (std::size_t m = 0; m < Ks * ne; ++m) {
      double s = v[static_cast<Eigen::Index>(m)] / sigma;
      double q = v[static_cast<Eigen::Index>(Ks * ne + m)] / sigma;
      detail::prox_alpha2(s, q, weight[m] / sigma);
      v[static_cast<Eigen::Index>(m)] -= sigma * s;
      v[static_cast<Eigen::Index>(Ks * ne + m)] -= sigma * q;
    }
    y = v;
    x = x_old - tau * (Kt * y);
    project(x);
    x_bar = 2.0 * x - x_old;

    if ((it + 1) % options.check_every == 0) {
      const Eigen::VectorXd dx = x_old - x, dy = y_old - y;
      const double primal = (dx / tau - Kt * dy).lpNorm<Eigen::Infinity>();
      const double dual = (dy / sigma - Kop * dx).lpNorm<Eigen::Infinity>();
      auto [curve, total] = polish(x);
      residual = std::max(primal, dual) / (1.0 + (std::isfinite(total) ? total : 0.0));
      if (std::isfinite(total) && total <= best_action) best_action = total;
      if (residual <= options.tolerance && std::isfinite(total)) {
        result.curve = std::move(curve);
        result.action = total;
        break;
      }
    }
  }
  if (it >= options.max_iterations)
    throw solver_error("dynamic transport solver did not converge", residual);
  result.value = std::sqrt(result.action);
  result.kkt_residual = residual;
  result.iterations = it + 1;
  return result;
}

}  // namespace wbflow
