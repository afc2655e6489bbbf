#pragma once

// Internal energies F_lambda(rho) with a unique zero at the boundary value
// lambda, together with the derived functions used by the diffusion
//
//   pressure      L(r) = r F'(r) - F(r), tilted so that L(lambda) = 0
//   G(r)          = int_0^r sqrt(s) F''(s) ds
//   h(r)          = (sqrt(r) F''(r))^-2
//
// Two closed-form families are provided: the entropy r log r (linear
// diffusion) and the power law r^alpha / (alpha - 1) (porous medium).

#include <cmath>
#include <cstddef>
#include <iostream>
#include <string>

#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"

namespace wbflow {

enum class EnergyKind { entropy, power };

struct EnergyParams {
  EnergyKind kind = EnergyKind::entropy;
  double lambda = 1.0;
  double alpha = 2.0;  // power law only
};

class EnergySpec {
 public:
  static EnergySpec entropy(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw invalid_input("entropy energy requires a boundary value lambda > 0");
    return EnergySpec(EnergyKind::entropy, 1.0, lambda);
  }

  static EnergySpec power(double alpha, double lambda) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw invalid_input("power energy requires alpha > 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw invalid_input("power energy requires a boundary value lambda >= 0");
    return EnergySpec(EnergyKind::power, alpha, lambda);
  }

  EnergyKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  EnergyParams params() const { return {kind_, lambda_, alpha_}; }

  // h is concave for the entropy and for power laws with alpha <= 3/2; the
  // convexity of the dissipation rests on this.
  bool h_is_concave() const { return kind_ == EnergyKind::entropy || alpha_ <= 1.5; }

  double value(double r) const {
    if (kind_ == EnergyKind::entropy) return r > 0.0 ? r * std::log(r / lambda_) - r + lambda_ : lambda_;
    return (std::pow(r, alpha_) - alpha_ * lambda_pow_am1_ * r) / (alpha_ - 1.0) + lambda_pow_a_;
  }

  double derivative(double r) const {
    if (kind_ == EnergyKind::entropy) return r > 0.0 ? std::log(r / lambda_) : -kInfinity;
    return alpha_ * (std::pow(r, alpha_ - 1.0) - lambda_pow_am1_) / (alpha_ - 1.0);
  }

  double second_derivative(double r) const {
    if (kind_ == EnergyKind::entropy) return r > 0.0 ? 1.0 / r : kInfinity;
    return alpha_ * std::pow(r, alpha_ - 2.0);
  }

  double pressure(double r) const {
    if (kind_ == EnergyKind::entropy) return r - lambda_;
    return std::pow(r, alpha_) - lambda_pow_a_;
  }

  // L'(r) = r F''(r)
  double pressure_derivative(double r) const {
    if (kind_ == EnergyKind::entropy) return 1.0;
    return alpha_ * std::pow(r, alpha_ - 1.0);
  }

  double dissipation_potential(double r) const {
    if (kind_ == EnergyKind::entropy) return 2.0 * std::sqrt(r);
    return alpha_ * std::pow(r, alpha_ - 0.5) / (alpha_ - 0.5);
  }

  double h(double r) const {
    if (kind_ == EnergyKind::entropy) return r;
    return std::pow(r, 3.0 - 2.0 * alpha_) / (alpha_ * alpha_);
  }

  // Untilted density F and pressure L_F of the family.
  double base_value(double r) const {
    if (kind_ == EnergyKind::entropy) return r > 0.0 ? r * std::log(r) : 0.0;
    return std::pow(r, alpha_) / (alpha_ - 1.0);
  }
  double base_pressure(double r) const {
    if (kind_ == EnergyKind::entropy) return r;
    return std::pow(r, alpha_);
  }

  friend bool operator==(const EnergySpec& a, const EnergySpec& b) {
    return a.kind_ == b.kind_ && a.alpha_ == b.alpha_ && a.lambda_ == b.lambda_;
  }

 private:
  EnergySpec(EnergyKind kind, double alpha, double lambda)
      : kind_(kind),
        alpha_(alpha),
        lambda_(lambda),
        lambda_pow_a_(kind == EnergyKind::power ? std::pow(lambda, alpha) : 0.0),
        lambda_pow_am1_(kind == EnergyKind::power ? std::pow(lambda, alpha - 1.0) : 0.0) {}

  EnergyKind kind_;
  double alpha_;
  double lambda_;
  double lambda_pow_a_;
  double lambda_pow_am1_;
};

inline EnergySpec make_energy(const EnergyParams& p, std::ostream* log = &std::clog) {
  if (p.kind == EnergyKind::entropy) return EnergySpec::entropy(p.lambda);
  EnergySpec spec = EnergySpec::power(p.alpha, p.lambda);
  if (!spec.h_is_concave() && log)
    *log << "warning: power energy with alpha = " << p.alpha
         << " > 3/2 has non-concave h; dissipation convexity checks do not apply\n";
  return spec;
}

inline double internal_energy(const EnergySpec& spec, const DiscreteMeasure& mu) {
  double s = 0.0;
  for (double r : mu.density()) s += spec.value(r);
  return s * mu.grid()->cell_volume();
}

enum class DissipationMode { free, trace };

// alpha_p(v, s) = |v|^p / s^(p-1), jointly convex and 1-homogeneous.
inline double alpha_p(double v, double s, double p) {
  if (s > 0.0) {
    if (p == 2.0) return v * v / s;
    return std::pow(std::abs(v), p) / std::pow(s, p - 1.0);
  }
  return v == 0.0 ? 0.0 : kInfinity;
}

// Quadrature weight of an edge: face measure times centre-to-centre spacing.
// Boundary edges span the half cell between the centre and the face.
inline double edge_weight(const Grid& g, const InteriorEdge& e) { return g.face_area(e.axis) * g.edge_length(e); }
inline double edge_weight(const Grid& g, const BoundaryEdge& e) { return g.face_area(e.axis) * g.edge_length(e); }

// Discrete Dirichlet energy of G(rho). In trace mode the boundary faces carry
// the ghost value G(lambda), which encodes the boundary condition rho = lambda.
inline double dissipation(const EnergySpec& spec, const DiscreteMeasure& mu, DissipationMode mode) {
  const Grid& g = *mu.grid();
  const std::vector<double>& rho = mu.density();
  double s = 0.0;
  for (const InteriorEdge& e : g.interior_edges()) {
    const double d = (spec.dissipation_potential(rho[e.hi]) - spec.dissipation_potential(rho[e.lo])) / g.edge_length(e);
    s += edge_weight(g, e) * d * d;
  }
  if (mode == DissipationMode::trace) {
    const double g_lambda = spec.dissipation_potential(spec.lambda());
    for (const BoundaryEdge& e : g.boundary_edges()) {
      const double d = (g_lambda - spec.dissipation_potential(rho[e.cell])) / g.edge_length(e);
      s += edge_weight(g, e) * d * d;
    }
  }
  return s;
}

// Edge-averaged form sum w_e alpha_2(grad rho, h(mean rho)); jointly convex in
// rho whenever h is concave.
inline double dissipation_alpha_form(const EnergySpec& spec, const DiscreteMeasure& mu, DissipationMode mode) {
  const Grid& g = *mu.grid();
  const std::vector<double>& rho = mu.density();
  double s = 0.0;
  for (const InteriorEdge& e : g.interior_edges()) {
    const double v = (rho[e.hi] - rho[e.lo]) / g.edge_length(e);
    s += edge_weight(g, e) * alpha_p(v, spec.h(0.5 * (rho[e.lo] + rho[e.hi])), 2.0);
  }
  if (mode == DissipationMode::trace) {
    for (const BoundaryEdge& e : g.boundary_edges()) {
      const double v = (spec.lambda() - rho[e.cell]) / g.edge_length(e);
      s += edge_weight(g, e) * alpha_p(v, spec.h(0.5 * (rho[e.cell] + spec.lambda())), 2.0);
    }
  }
  return s;
}

inline std::string to_string(EnergyKind k) { return k == EnergyKind::entropy ? "entropy" : "power"; }
inline std::string to_string(DissipationMode m) { return m == DissipationMode::free ? "free" : "trace"; }

}  // namespace wbflow
