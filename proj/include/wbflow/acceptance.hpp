#pragma once

// The thirteen acceptance criteria. Each returns its verdict together with the
// numbers it was decided on; nothing here is tuned per criterion beyond the
// stated tolerances.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wbflow/diagnostics.hpp"
#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/jko.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/oracles.hpp"
#include "wbflow/pde_reference.hpp"
#include "wbflow/static_transport.hpp"

namespace wbflow::acceptance {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::string> notes;  // supplementary observations, not part of the verdict
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline DiscreteMeasure random_measure(const GridPtr& g, std::mt19937_64& rng, double zero_probability = 0.25) {
  std::uniform_real_distribution<double> value(0.0, 2.0), coin(0.0, 1.0);
  std::vector<double> rho(g->size());
  for (double& r : rho) r = coin(rng) < zero_probability ? 0.0 : value(rng);
  return DiscreteMeasure(g, std::move(rho));
}

inline DiscreteMeasure with_mass(const DiscreteMeasure& mu, double mass) {
  std::vector<double> rho = mu.density();
  const double s = mass / mu.mass();
  for (double& r : rho) r *= s;
  return DiscreteMeasure(mu.grid(), std::move(rho));
}

inline DiscreteMeasure sine_bump(const GridPtr& g) {
  return DiscreteMeasure::sample(g, [](const Point& x) { return 1.0 + std::sin(std::numbers::pi * x[0]); });
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double vol) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * vol;
}

template <class F>
CriterionResult timed(int id, std::string name, F&& body, double limit_seconds = kInfinity) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > limit_seconds) {
    r.passed = false;
    r.detail += ", exceeded the " + fmt(limit_seconds) + " s budget";
  }
  return r;
}

}  // namespace detail

inline CriterionResult metric_axioms(const Options& opt) {
  return detail::timed(1, "metric axioms", [&](CriterionResult& r) {
    auto g = build_grid_1d(16);
    std::mt19937_64 rng(opt.seed);
    double worst_sym = 0.0, worst_tri = -kInfinity, worst_self = 0.0, min_distinct = kInfinity;
    for (int t = 0; t < 1000; ++t) {
      const DiscreteMeasure a = detail::random_measure(g, rng), b = detail::random_measure(g, rng),
                            c = detail::random_measure(g, rng);
      for (double p : {1.0, 2.0}) {
        const double ab = wb_distance(a, b, p).value, ba = wb_distance(b, a, p).value;
        const double bc = wb_distance(b, c, p).value, ac = wb_distance(a, c, p).value;
        worst_sym = std::max(worst_sym, std::abs(ab - ba));
        worst_tri = std::max(worst_tri, ac - ab - bc);
        worst_self = std::max(worst_self, wb_distance(a, a, p).value);
        if (!(a == b)) min_distinct = std::min(min_distinct, ab);
      }
    }
    r.passed = worst_sym <= 1e-9 && worst_tri <= 1e-9 && worst_self == 0.0 && min_distinct > 0.0;
    r.detail = "max asymmetry " + detail::fmt(worst_sym) + ", max triangle excess " + detail::fmt(worst_tri) +
               ", max Wb(a,a) " + detail::fmt(worst_self) + ", min Wb over distinct pairs " + detail::fmt(min_distinct);
  }, 60.0);
}

inline CriterionResult reservoir_reroute(const Options&) {
  return detail::timed(2, "reservoir reroute", [&](CriterionResult& r) {
    auto g = build_grid_1d(4);
    const DiscreteMeasure mu = DiscreteMeasure::point_mass(g, 0, 1.0), nu = DiscreteMeasure::point_mass(g, 3, 1.0);
    const double wb = wb_distance(mu, nu, 2.0).cost;
    const double brute = oracle::brute_force_wb_cost(mu, nu, 2.0);
    const double w = wasserstein(mu, nu, 2.0).cost;
    r.passed = std::abs(wb - 0.03125) <= 1e-12 && std::abs(wb - brute) <= 1e-12 && wb < w;
    r.detail = "Wb2^2 " + detail::fmt(wb) + ", vertex enumeration " + detail::fmt(brute) + ", W2^2 " + detail::fmt(w);
  });
}

inline CriterionResult wb_below_w(const Options& opt) {
  return detail::timed(3, "Wb2 <= W2", [&](CriterionResult& r) {
    auto g = build_grid_1d(16);
    std::mt19937_64 rng(opt.seed + 3);
    double worst = -kInfinity;
    for (int t = 0; t < 500; ++t) {
      DiscreteMeasure a = detail::random_measure(g, rng), b = detail::random_measure(g, rng);
      if (a.mass() == 0.0 || b.mass() == 0.0) {
        --t;
        continue;
      }
      a = detail::with_mass(a, 1.0);
      b = detail::with_mass(b, 1.0);
      worst = std::max(worst, wb_distance(a, b, 2.0).value - wasserstein_distance(a, b, 2.0));
    }
    r.passed = worst <= 1e-9;
    r.detail = "max Wb2 - W2 over 500 pairs " + detail::fmt(worst);
  }, 60.0);
}

// Shared with the action-bound criterion.
struct DynamicCase {
  double static_cost;
  DynamicResult k32, k64;
};

inline std::vector<DynamicCase> dynamic_cases(const Options& opt) {
  auto g = build_grid_1d(8);
  std::mt19937_64 rng(opt.seed + 4);
  std::uniform_real_distribution<double> value(0.2, 2.0);
  std::vector<DynamicCase> cases;
  for (int t = 0; t < 5; ++t) {
    std::vector<double> a(8), b(8);
    for (double& v : a) v = value(rng);
    for (double& v : b) v = value(rng);
    const DiscreteMeasure mu(g, a), nu(g, b);
    cases.push_back({wb_distance(mu, nu, 2.0).cost, solve_dynamic(mu, nu, 2.0, 32), solve_dynamic(mu, nu, 2.0, 64)});
  }
  return cases;
}

inline CriterionResult benamou_brenier(const std::vector<DynamicCase>& cases) {
  return detail::timed(4, "Benamou-Brenier consistency", [&](CriterionResult& r) {
    double worst = 0.0;
    bool monotone = true;
    std::string rel;
    for (const DynamicCase& c : cases) {
      const double g32 = std::abs(c.k32.action - c.static_cost) / c.static_cost;
      const double g64 = std::abs(c.k64.action - c.static_cost) / c.static_cost;
      worst = std::max(worst, g32);
      monotone = monotone && g64 <= g32;
      rel += (rel.empty() ? "" : " ") + detail::fmt(g32) + "->" + detail::fmt(g64);
    }
    r.passed = worst <= 0.05 && monotone;
    r.detail = "relative gap K=32->64 per pair: " + rel;
  });
}

inline CriterionResult action_bound_check(const std::vector<const Curve*>& curves) {
  return detail::timed(5, "action bound", [&](CriterionResult& r) {
    double worst = 0.0;
    for (const Curve* c : curves)
      for (const ActionBound& b : action_bound(*c, 2.0))
        if (b.bound > 0.0 || b.distance_p > 0.0) worst = std::max(worst, b.distance_p / b.bound);
    r.passed = worst <= 1.0 + 1e-6;
    r.detail = "max Wb2^2 / (dt * interval action) over " + std::to_string(curves.size()) + " curves: " +
               detail::fmt(worst);
  });
}

struct JkoCase {
  std::string energy;
  double tau;
  JkoRun run;
  double l1;
};

inline std::vector<JkoCase> jko_cases() {
  auto g = build_grid_1d(32);
  const DiscreteMeasure mu0 = detail::sine_bump(g);
  std::vector<JkoCase> cases;
  for (const EnergySpec& spec : {EnergySpec::entropy(1.0), EnergySpec::power(1.4, 1.0)}) {
    const Curve ref = fd_solve(spec, mu0, 1e-4, 0.1);
    const std::string name = spec.kind() == EnergyKind::entropy ? "entropy" : "power(1.4)";
    for (double tau : {0.01, 0.005, 0.0025}) {
      JkoRun run = run_jko(spec, mu0, tau, 0.1);
      const double l1 = detail::l1_distance(run.curve.densities.back(), ref.densities.back(), g->cell_volume());
      cases.push_back({name, tau, std::move(run), l1});
    }
  }
  return cases;
}

inline CriterionResult jko_convergence(const std::vector<JkoCase>& cases, double seconds) {
  CriterionResult r;
  r.id = 6;
  r.name = "JKO -> PDE";
  bool ok = seconds <= 600.0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    r.detail += (k ? ", " : "") + cases[k].energy + " tau=" + detail::fmt(cases[k].tau) + " L1=" + detail::fmt(cases[k].l1);
    if (k % 3 != 0) ok = ok && cases[k].l1 < cases[k - 1].l1;
  }
  r.passed = ok;
  r.seconds = seconds;
  return r;
}

inline CriterionResult jko_step_inequality(const std::vector<JkoCase>& cases) {
  return detail::timed(7, "JKO step inequality", [&](CriterionResult& r) {
    double worst = -kInfinity, worst_increase = -kInfinity;
    for (const JkoCase& c : cases)
      for (std::size_t n = 1; n < c.run.steps.size(); ++n) {
        const JkoStepDiagnostics& s = c.run.steps[n];
        const double prev = c.run.steps[n - 1].energy;
        worst = std::max(worst, s.energy + s.step_distance * s.step_distance / (2.0 * c.tau) - prev);
        worst_increase = std::max(worst_increase, s.energy - prev);
      }
    r.passed = worst <= 1e-7 && worst_increase <= 0.0;
    r.detail = "max F(n+1) + Wb2^2/(2 tau) - F(n) = " + detail::fmt(worst) + ", max energy increase " +
               detail::fmt(worst_increase);
  });
}

struct FdCase {
  Curve coarse;  // dx = 1/32, dt = 1e-3
  Curve fine;    // dx = 1/64, dt = 2.5e-4
  Curve halved;  // dx = 1/64, dt = 5e-4
};

inline FdCase fd_cases() {
  const EnergySpec spec = EnergySpec::entropy(1.0);
  FdCase c;
  c.coarse = fd_solve(spec, detail::sine_bump(build_grid_1d(32)), 1e-3, 0.1);
  c.fine = fd_solve(spec, detail::sine_bump(build_grid_1d(64)), 2.5e-4, 0.1);
  c.halved = fd_solve(spec, detail::sine_bump(build_grid_1d(64)), 5e-4, 0.1);
  return c;
}

inline CriterionResult de_giorgi_vanishing(const FdCase& fd) {
  return detail::timed(8, "De Giorgi vanishing", [&](CriterionResult& r) {
    const EnergySpec spec = EnergySpec::entropy(1.0);
    auto evaluate = [&](SpeedEstimator speed) {
      const DeGiorgiTerms c = de_giorgi_terms(fd.coarse, spec, DissipationMode::trace, speed);
      const DeGiorgiTerms f = de_giorgi_terms(fd.fine, spec, DissipationMode::trace, speed);
      const double rc = de_giorgi(reversed(fd.coarse), spec, DissipationMode::trace, speed);
      const double rf = de_giorgi(reversed(fd.fine), spec, DissipationMode::trace, speed);
      const bool ok = std::abs(f.value()) < std::abs(c.value()) && rc > -0.1 * c.energy_change &&
                      rf > -0.1 * f.energy_change;
      const std::string text = "|L| " + detail::fmt(std::abs(c.value())) + " -> " + detail::fmt(std::abs(f.value())) +
                               ", reversed " + detail::fmt(rc) + " / " + detail::fmt(rf) + " vs 0.1 dF " +
                               detail::fmt(-0.1 * c.energy_change);
      return std::pair<bool, std::string>(ok, text);
    };
    const auto [ok, text] = evaluate(SpeedEstimator::lp);
    r.passed = ok;
    r.detail = "LP speed: " + text;
    const auto [ok2, text2] = evaluate(SpeedEstimator::one_step);
    r.notes.push_back(std::string("one-step grid speed would ") + (ok2 ? "pass" : "fail") + ": " + text2);
  });
}

inline CriterionResult boundary_emergence(const std::vector<JkoCase>& cases) {
  return detail::timed(9, "boundary condition emergence", [&](CriterionResult& r) {
    bool ok = true;
    for (const JkoCase& c : cases) {
      const Grid& g = *c.run.curve.grid;
      double worst = kInfinity;
      for (const BoundaryEdge& e : g.boundary_edges()) {
        const double before = std::abs(c.run.curve.densities.front()[e.cell] - 1.0);
        const double after = std::abs(c.run.curve.densities.back()[e.cell] - 1.0);
        worst = std::min(worst, after > 0.0 ? before / after : kInfinity);
      }
      ok = ok && worst >= 2.0;
      r.detail += (r.detail.empty() ? "" : ", ") + c.energy + " tau=" + detail::fmt(c.tau) + " factor " + detail::fmt(worst);
    }
    r.passed = ok;
  });
}

inline CriterionResult slope_blow_up(const Options&) {
  return detail::timed(10, "slope blow-up", [&](CriterionResult& r) {
    auto g = build_grid_1d(64);
    const EnergySpec spec = EnergySpec::entropy(1.0);
    const double dx = 1.0 / 64.0;
    const std::vector<double> eps{8 * dx, 4 * dx, 2 * dx, dx};
    const std::vector<SlopeRow> flat = slope_experiment(spec, DiscreteMeasure::constant(g, 2.0), eps);
    bool ok = true;
    std::string factors;
    for (std::size_t k = 1; k < flat.size(); ++k) {
      const double f = flat[k].ratio / flat[k - 1].ratio;
      ok = ok && f >= 1.2 && f <= 1.8;
      factors += (factors.empty() ? "" : " ") + detail::fmt(f);
    }
    const DiscreteMeasure collar =
        DiscreteMeasure::sample(g, [&](const Point& x) { return std::min(x[0], 1.0 - x[0]) < 0.25 ? 1.0 : 2.0; });
    double collar_max = 0.0;
    for (const SlopeRow& row : slope_experiment(spec, collar, eps)) collar_max = std::max(collar_max, row.ratio);
    r.passed = ok && collar_max == 0.0;
    r.detail = "growth per halving " + factors + ", max collar ratio " + detail::fmt(collar_max);
  });
}

inline CriterionResult chain_rule(const FdCase& fd) {
  return detail::timed(11, "chain rule", [&](CriterionResult& r) {
    const EnergySpec spec = EnergySpec::entropy(1.0);
    const double coarse = chain_rule_check(fd.coarse, spec), fine = chain_rule_check(fd.halved, spec);
    r.passed = fine < coarse;
    r.detail = "deviation " + detail::fmt(coarse) + " -> " + detail::fmt(fine);
  });
}

inline CriterionResult dissipation_convexity(const Options& opt) {
  return detail::timed(12, "dissipation convexity", [&](CriterionResult& r) {
    auto g = build_grid_1d(16);
    std::mt19937_64 rng(opt.seed + 12);
    std::uniform_real_distribution<double> value(0.05, 3.0);
    double worst = -kInfinity;
    for (const EnergySpec& spec : {EnergySpec::entropy(1.0), EnergySpec::power(1.4, 1.0)})
      for (int t = 0; t < 200; ++t) {
        std::vector<double> a(16), b(16);
        for (double& v : a) v = value(rng);
        for (double& v : b) v = value(rng);
        for (DissipationMode mode : {DissipationMode::free, DissipationMode::trace}) {
          const double ia = dissipation_alpha_form(spec, DiscreteMeasure(g, a), mode);
          const double ib = dissipation_alpha_form(spec, DiscreteMeasure(g, b), mode);
          for (double s : {0.25, 0.5, 0.75}) {
            std::vector<double> m(16);
            for (std::size_t i = 0; i < 16; ++i) m[i] = (1 - s) * a[i] + s * b[i];
            const double im = dissipation_alpha_form(spec, DiscreteMeasure(g, m), mode);
            worst = std::max(worst, im - (1 - s) * ia - s * ib);
          }
        }
      }
    r.passed = worst <= 1e-9;
    r.detail = "max convexity excess " + detail::fmt(worst);
  });
}

inline CriterionResult gradient_check(const Options& opt) {
  return detail::timed(13, "JKO gradient check", [&](CriterionResult& r) {
    auto g = build_grid_1d(8);
    std::mt19937_64 rng(opt.seed + 13);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const EnergySpec spec = t % 2 == 0 ? EnergySpec::entropy(1.0) : EnergySpec::power(1.4, 1.0);
      std::uniform_real_distribution<double> value(0.2, 2.0);
      std::vector<double> rho(8);
      for (double& v : rho) v = value(rng);
      const JkoObjective obj(spec, DiscreteMeasure(g, rho), 0.01);
      std::vector<double> x = obj.random_interior_point(rng), grad;
      obj.gradient(x, grad);
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double h = 1e-7;
        std::vector<double> xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const double fd = (obj.value(xp) - obj.value(xm)) / (2 * h);
        num = std::max(num, std::abs(fd - grad[k]));
        den = std::max(den, std::abs(grad[k]));
      }
      worst = std::max(worst, num / den);
    }
    r.passed = worst <= 1e-6;
    r.detail = "max relative gradient error " + detail::fmt(worst);
  });
}

inline std::vector<CriterionResult> run_all(const Options& opt, const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  auto emit = [&](CriterionResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  emit(metric_axioms(opt));
  emit(reservoir_reroute(opt));
  emit(wb_below_w(opt));

  auto t0 = std::chrono::steady_clock::now();
  const std::vector<DynamicCase> dyn = dynamic_cases(opt);
  const double dyn_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CriterionResult bb = benamou_brenier(dyn);
  bb.seconds += dyn_seconds;
  emit(std::move(bb));

  const FdCase fd = fd_cases();
  std::vector<const Curve*> curves;
  for (const DynamicCase& c : dyn) {
    curves.push_back(&c.k32.curve);
    curves.push_back(&c.k64.curve);
  }
  curves.push_back(&fd.coarse);
  curves.push_back(&fd.fine);
  emit(action_bound_check(curves));

  t0 = std::chrono::steady_clock::now();
  const std::vector<JkoCase> jko = jko_cases();
  emit(jko_convergence(jko, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
  emit(jko_step_inequality(jko));
  emit(de_giorgi_vanishing(fd));
  emit(boundary_emergence(jko));
  emit(slope_blow_up(opt));
  emit(chain_rule(fd));
  emit(dissipation_convexity(opt));
  emit(gradient_check(opt));
  return out;
}

}  // namespace wbflow::acceptance
