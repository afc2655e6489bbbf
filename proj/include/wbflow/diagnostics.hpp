#pragma once

// Instruments for the variational characterisation of the diffusion: the De
// Giorgi functional, the chain rule along curves with momenta, and the slope
// blow-up experiment near the boundary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/static_transport.hpp"

namespace wbflow {

// How the metric speed of consecutive nodes is estimated.
enum class SpeedEstimator {
  lp,        // exact Wb_2 of consecutive nodes divided by dt
  one_step,  // one-interval Benamou-Brenier cost on the grid
};

inline std::string to_string(SpeedEstimator s) { return s == SpeedEstimator::lp ? "lp" : "one_step"; }

struct DeGiorgiTerms {
  double energy_change = 0.0;  // F(rho^K) - F(rho^0)
  double speed_term = 0.0;     // 1/2 sum dt speed^2
  double dissipation_term = 0.0;
  double value() const { return energy_change + speed_term + dissipation_term; }
};

inline DeGiorgiTerms de_giorgi_terms(const Curve& curve, const EnergySpec& spec, DissipationMode mode,
                                     SpeedEstimator speed = SpeedEstimator::lp) {
  curve.validate();
  if (curve.nodes() < 2) throw invalid_input("De Giorgi functional needs at least two time nodes");
  const Grid& g = *curve.grid;
  DeGiorgiTerms t;
  t.energy_change = internal_energy(spec, curve.measure(curve.nodes() - 1)) - internal_energy(spec, curve.measure(0));
  for (std::size_t k = 0; k < curve.intervals(); ++k) {
    const double dt = curve.dt(k);
    const double d2 = speed == SpeedEstimator::lp
                          ? wb_distance(curve.measure(k), curve.measure(k + 1), 2.0).cost
                          : one_step_transport_cost(g, curve.densities[k], curve.densities[k + 1]);
    t.speed_term += 0.5 * d2 / dt;
    t.dissipation_term += 0.5 * dt * dissipation(spec, curve.measure(k), mode);
  }
  return t;
}

inline double de_giorgi(const Curve& curve, const EnergySpec& spec, DissipationMode mode,
                        SpeedEstimator speed = SpeedEstimator::lp) {
  return de_giorgi_terms(curve, spec, mode, speed).value();
}

// Largest deviation at interior nodes between the central difference of F and
// the pairing sum_e w_e grad_e L(rho) j_e / s_e, where j is the flux density
// averaged over the two adjacent intervals and s_e the edge density at the node.
inline double chain_rule_check(const Curve& curve, const EnergySpec& spec) {
  curve.validate();
  if (!curve.momenta) throw invalid_input("chain rule check needs momenta");
  const Grid& g = *curve.grid;
  const detail::EdgeGeometry geo = detail::edge_geometry(g);
  const std::size_t ni = g.interior_edges().size();
  std::vector<double> energy(curve.nodes());
  for (std::size_t k = 0; k < curve.nodes(); ++k) energy[k] = internal_energy(spec, curve.measure(k));
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < curve.nodes(); ++k) {
    const std::vector<double>& rho = curve.densities[k];
    const double dF = (energy[k + 1] - energy[k - 1]) / (curve.times[k + 1] - curve.times[k - 1]);
    const double wa = curve.dt(k) / (curve.dt(k - 1) + curve.dt(k));
    double pairing = 0.0;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const double flux = wa * (*curve.momenta)[k - 1][e] + (1.0 - wa) * (*curve.momenta)[k][e];
      double s, grad;
      if (e < ni) {
        const InteriorEdge& ed = g.interior_edges()[e];
        s = 0.5 * (rho[ed.lo] + rho[ed.hi]);
        grad = (spec.pressure(rho[ed.hi]) - spec.pressure(rho[ed.lo])) / g.edge_length(ed);
      } else {
        const BoundaryEdge& ed = g.boundary_edges()[e - ni];
        s = rho[ed.cell];
        grad = -spec.pressure(rho[ed.cell]) / g.edge_length(ed);
      }
      if (flux == 0.0) continue;
      if (!(s > 0.0))
        throw invalid_input("chain rule check: flux through an edge of zero density at node " + std::to_string(k));
      pairing += geo.weight[e] * grad * (flux / geo.area[e]) / s;
    }
    worst = std::max(worst, std::abs(dF - pairing));
  }
  return worst;
}

struct SlopeRow {
  double epsilon = 0.0;
  double j1 = 0.0;  // energy removed from the collar {d < epsilon}
  double j2 = 0.0;  // Wb_2(mu, mu_epsilon)
  double ratio = 0.0;
};

// Replaces the density by lambda on the collar A_eps = {d(x, boundary) < eps}
// and compares the energy released there with the transport cost of doing so.
inline std::vector<SlopeRow> slope_experiment(const EnergySpec& spec, const DiscreteMeasure& mu,
                                              const std::vector<double>& epsilons) {
  const Grid& g = *mu.grid();
  std::vector<SlopeRow> rows;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw invalid_input("slope experiment needs positive epsilon");
    if (eps > g.inradius()) throw invalid_input("epsilon exceeds the inradius of the domain");
    for (int a = 0; a < g.dimension(); ++a) {
      const double m = eps / g.cell_size(a);
      if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m))
        throw invalid_input("epsilon must be a multiple of the cell size");
    }
    std::vector<double> rho = mu.density();
    SlopeRow row;
    row.epsilon = eps;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.boundary_distance(i) >= eps) continue;
      row.j1 += spec.value(rho[i]) * g.cell_volume();
      rho[i] = spec.lambda();
    }
    row.j2 = wb_distance(mu, DiscreteMeasure(mu.grid(), rho), 2.0).value;
    row.ratio = row.j2 > 0.0 ? row.j1 / row.j2 : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wbflow
