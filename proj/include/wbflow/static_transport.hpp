#pragma once

// Exact boundary-reservoir transport distance Wb_p between grid measures, and
// the classical balanced W_p used as a comparison.
//
// Wb_p is solved as a balanced transportation problem with one extra row and
// one extra column standing for the boundary:
//
//            cells of nu (b_j)      reservoir (sum a)
//   a_i      |x_i - x_j|^p          d(x_i)^p
//   res.     d(x_j)^p               0          <- boundary-to-boundary, dropped
//   (sum b)
//
// The reservoir row supplies sum(b) and the reservoir column absorbs sum(a), so
// every instance is feasible. Sending mass to or from the boundary is always
// routed through the nearest boundary point, which minimises its cost.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/transportation_simplex.hpp"

namespace wbflow {

inline constexpr std::size_t kMaxTransportCells = 4096;

struct OptimalityCertificate {
  double dual_infeasibility = 0.0;
  double slackness_violation = 0.0;
  double primal_residual = 0.0;
  long pivots = 0;

  bool holds(double tol = 1e-9) const {
    return dual_infeasibility <= tol && slackness_violation <= tol && primal_residual <= tol;
  }
};

struct WbResult {
  double value = 0.0;  // Wb_p
  double cost = 0.0;   // Wb_p^p, the optimal plan cost
  TransportPlan plan;
  OptimalityCertificate certificate;
};

namespace detail {

inline void check_transport_inputs(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  require_same_grid(mu, nu);
  if (!(p >= 1.0)) throw invalid_input("transport exponent must satisfy p >= 1");
  if (mu.size() > kMaxTransportCells)
    throw invalid_input("static transport is limited to " + std::to_string(kMaxTransportCells) +
                        " cells, grid has " + std::to_string(mu.size()));
}

inline std::vector<std::size_t> support(const DiscreteMeasure& m) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.density(i) > 0.0) s.push_back(i);
  return s;
}

inline double power(double x, double p) { return p == 2.0 ? x * x : p == 1.0 ? x : std::pow(x, p); }

// |x_a - x_b|^p, using the squared distance directly when p = 2.
inline double pair_cost(const Grid& g, std::size_t a, std::size_t b, double p) {
  if (p != 2.0) return power(g.distance(a, b), p);
  double s = 0.0;
  for (int k = 0; k < g.dimension(); ++k) {
    const double d = g.center(a)[k] - g.center(b)[k];
    s += d * d;
  }
  return s;
}

inline OptimalityCertificate certificate_of(const lp::TransportationSolution& s) {
  return {s.dual_infeasibility, s.slackness_violation, s.primal_residual, s.pivots};
}

}  // namespace detail

inline WbResult wb_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  detail::check_transport_inputs(mu, nu, p);
  WbResult result;
  result.plan = TransportPlan::empty(mu, nu);
  const Grid& g = *mu.grid();
  const std::vector<std::size_t> src = detail::support(mu);
  const std::vector<std::size_t> dst = detail::support(nu);
  if (src.empty() && dst.empty()) return result;

  lp::TransportationProblem pb;
  const std::size_t m = src.size() + 1, n = dst.size() + 1;
  pb.supply.resize(m);
  pb.demand.resize(n);
  pb.cost.assign(m * n, 0.0);
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t r = 0; r < src.size(); ++r) total_a += (pb.supply[r] = mu.cell_mass(src[r]));
  for (std::size_t c = 0; c < dst.size(); ++c) total_b += (pb.demand[c] = nu.cell_mass(dst[c]));
  pb.supply[m - 1] = total_b;
  pb.demand[n - 1] = total_a;
  for (std::size_t r = 0; r < src.size(); ++r) {
    for (std::size_t c = 0; c < dst.size(); ++c)
      pb.cost[r * n + c] = detail::pair_cost(g, src[r], dst[c], p);
    pb.cost[r * n + n - 1] = detail::power(g.boundary_distance(src[r]), p);
  }
  for (std::size_t c = 0; c < dst.size(); ++c)
    pb.cost[(m - 1) * n + c] = detail::power(g.boundary_distance(dst[c]), p);

  const lp::TransportationSolution sol = lp::solve_transportation(pb);
  for (const lp::BasicCell& b : sol.basis) {
    if (b.flow <= 0.0) continue;
    const bool row_res = b.row == m - 1, col_res = b.col == n - 1;
    if (row_res && col_res) continue;
    if (col_res) result.plan.to_boundary[src[b.row]] += b.flow;
    else if (row_res) result.plan.from_boundary[dst[b.col]] += b.flow;
    else result.plan.interior.push_back({src[b.row], dst[b.col], b.flow});
  }
  result.cost = std::max(0.0, sol.objective);
  result.value = std::pow(result.cost, 1.0 / p);
  result.certificate = detail::certificate_of(sol);
  return result;
}

struct WResult {
  double value = 0.0;
  double cost = 0.0;
  std::vector<InteriorFlow> plan;
  OptimalityCertificate certificate;
};

// Balanced Wasserstein distance; both measures must carry the same positive mass.
inline WResult wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  detail::check_transport_inputs(mu, nu, p);
  const double ma = mu.mass(), mb = nu.mass();
  if (!(ma > 0.0) || std::abs(ma - mb) > 1e-12 * std::max(1.0, ma))
    throw invalid_input("balanced transport needs equal positive masses (" + std::to_string(ma) + " vs " +
                        std::to_string(mb) + ")");
  const Grid& g = *mu.grid();
  const std::vector<std::size_t> src = detail::support(mu);
  const std::vector<std::size_t> dst = detail::support(nu);
  lp::TransportationProblem pb;
  pb.supply.resize(src.size());
  pb.demand.resize(dst.size());
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t r = 0; r < src.size(); ++r) total_a += (pb.supply[r] = mu.cell_mass(src[r]));
  for (std::size_t c = 0; c < dst.size(); ++c) total_b += (pb.demand[c] = nu.cell_mass(dst[c]));
  // Absorb rounding so the transportation problem is exactly balanced.
  pb.demand.back() += total_a - total_b;
  pb.cost.resize(src.size() * dst.size());
  for (std::size_t r = 0; r < src.size(); ++r)
    for (std::size_t c = 0; c < dst.size(); ++c)
      pb.cost[r * dst.size() + c] = detail::pair_cost(g, src[r], dst[c], p);

  const lp::TransportationSolution sol = lp::solve_transportation(pb);
  WResult result;
  for (const lp::BasicCell& b : sol.basis)
    if (b.flow > 0.0) result.plan.push_back({src[b.row], dst[b.col], b.flow});
  result.cost = std::max(0.0, sol.objective);
  result.value = std::pow(result.cost, 1.0 / p);
  result.certificate = detail::certificate_of(sol);
  return result;
}

inline double wasserstein_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  return wasserstein(mu, nu, p).value;
}

}  // namespace wbflow
