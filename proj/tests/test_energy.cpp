#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "wbflow/energy.hpp"

using namespace wbflow;

namespace {

// G(r) = int_0^r sqrt(s) F''(s) ds with s = u^4, composite Simpson in u.
double quadrature_G(const EnergySpec& spec, double r) {
  const int n = 20000;
  const double b = std::pow(r, 0.25), h = b / n;
  auto f = [&](double u) { return u == 0.0 ? 0.0 : 4.0 * std::pow(u, 5) * spec.second_derivative(std::pow(u, 4)); };
  double s = f(0) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

std::vector<EnergySpec> families() {
  return {EnergySpec::entropy(1.0), EnergySpec::entropy(0.3), EnergySpec::power(2.0, 0.0), EnergySpec::power(1.4, 1.0),
          EnergySpec::power(3.0, 2.0)};
}

}  // namespace

TEST(Energy, EntropyClosedForms) {
  const EnergySpec e = EnergySpec::entropy(1.0);
  EXPECT_NEAR(e.value(2.0), 2 * std::log(2.0) - 1, 1e-15);
  EXPECT_NEAR(e.value(2.0), 0.386294, 1e-6);
  EXPECT_DOUBLE_EQ(e.pressure(2.0), 1.0);
  EXPECT_DOUBLE_EQ(e.dissipation_potential(4.0), 4.0);
  EXPECT_NEAR(quadrature_G(e, 4.0), 4.0, 1e-10);
  EXPECT_DOUBLE_EQ(e.value(0.0), 1.0);
}

TEST(Energy, PowerPressure) {
  const EnergySpec p = EnergySpec::power(2.0, 0.0);
  for (double z : {0.0, 0.5, 1.0, 3.0}) EXPECT_DOUBLE_EQ(p.pressure(z), z * z);
}

TEST(Energy, GMatchesQuadrature) {
  for (const EnergySpec& s : families())
    for (double r : {0.1, 1.0, 2.5, 7.0})
      EXPECT_NEAR(s.dissipation_potential(r), quadrature_G(s, r), 1e-8 * std::max(1.0, s.dissipation_potential(r)));
}

TEST(Energy, PressureMatchesDefinition) {
  for (const EnergySpec& s : families())
    for (double r : {0.2, 1.0, 3.0}) {
      EXPECT_NEAR(s.pressure(r), r * s.derivative(r) - s.value(r), 1e-12) << r;
      EXPECT_NEAR(s.base_pressure(r), r * (s.base_value(r + 1e-6) - s.base_value(r - 1e-6)) / 2e-6 - s.base_value(r),
                  1e-6);
    }
}

TEST(Energy, DerivativesMatchFiniteDifferences) {
  for (const EnergySpec& s : families())
    for (double r : {0.3, 1.0, 2.0}) {
      const double h = 1e-6;
      EXPECT_NEAR(s.derivative(r), (s.value(r + h) - s.value(r - h)) / (2 * h), 1e-7);
      EXPECT_NEAR(s.second_derivative(r), (s.derivative(r + h) - s.derivative(r - h)) / (2 * h), 1e-6);
      EXPECT_NEAR(s.pressure_derivative(r), r * s.second_derivative(r), 1e-12);
      const double gp = std::sqrt(r) * s.second_derivative(r);
      EXPECT_NEAR(s.h(r), 1.0 / (gp * gp), 1e-12 * s.h(r));
    }
}

TEST(Energy, Invariants) {
  for (const EnergySpec& s : families()) {
    EXPECT_NEAR(s.value(s.lambda()), 0.0, 1e-14);
    EXPECT_NEAR(s.pressure(s.lambda()), 0.0, 1e-14);
    double prev_g = -1.0;
    for (double r = 0.0; r <= 6.0; r += 0.01) {
      EXPECT_GE(s.value(r), -1e-14);
      if (std::abs(r - s.lambda()) > 1e-3) {
        EXPECT_GT(s.value(r), 0.0);
      }
      const double g = s.dissipation_potential(r);
      EXPECT_GT(g, prev_g);
      prev_g = g;
      if (r > 0) {
        EXPECT_GT(s.second_derivative(r), 0.0);
      }
    }
    EXPECT_EQ(s.dissipation_potential(0.0), 0.0);
  }
}

TEST(Energy, HConcavityFollowsExponent) {
  for (const EnergySpec& s : {EnergySpec::entropy(1.0), EnergySpec::power(1.2, 1.0), EnergySpec::power(1.5, 1.0)}) {
    ASSERT_TRUE(s.h_is_concave());
    for (double r = 0.1; r < 5.0; r += 0.1) EXPECT_LE(s.h(r + 0.05) + s.h(r - 0.05) - 2 * s.h(r), 1e-12);
  }
  EXPECT_FALSE(EnergySpec::power(2.0, 1.0).h_is_concave());
}

TEST(Energy, DoublingAndPressureBounds) {
  for (const EnergySpec& s : families()) {
    // Fit C once on a coarse lattice, then require it on a finer one.
    double c_double = 0.0, c_pressure = 0.0;
    for (double r = 0.0; r <= 20.0; r += 0.5) {
      c_pressure = std::max(c_pressure, s.base_pressure(r) / (1 + std::abs(s.base_value(r))));
      for (double t = 0.0; t <= 20.0; t += 0.5)
        c_double = std::max(c_double, s.value(r + t) / (1 + s.value(r) + s.value(t)));
    }
    c_double *= 1.5;
    c_pressure *= 1.5;
    for (double r = 0.0; r <= 20.0; r += 0.13)
      for (double t = 0.0; t <= 20.0; t += 0.17) {
        EXPECT_LE(s.value(r + t), c_double * (1 + s.value(r) + s.value(t)));
      }
    for (double r = 0.0; r <= 20.0; r += 0.13) {
      EXPECT_GE(s.base_pressure(r), 0.0);
      EXPECT_LE(s.base_pressure(r), c_pressure * (1 + std::abs(s.base_value(r))));
    }
  }
}

TEST(Energy, MakeEnergyValidatesAndWarns) {
  EXPECT_THROW(make_energy({EnergyKind::entropy, 0.0, 2.0}), invalid_input);
  EXPECT_THROW(make_energy({EnergyKind::power, 1.0, 1.0}), invalid_input);
  std::ostringstream log;
  make_energy({EnergyKind::power, 1.0, 2.0}, &log);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  log.str("");
  make_energy({EnergyKind::power, 1.0, 1.4}, &log);
  EXPECT_TRUE(log.str().empty());
}

TEST(InternalEnergy, Examples) {
  auto g = build_grid_1d(8);
  const EnergySpec e = EnergySpec::entropy(1.0);
  EXPECT_NEAR(internal_energy(e, DiscreteMeasure::constant(g, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(internal_energy(e, DiscreteMeasure::constant(g, 2.0)), 2 * std::log(2.0) - 1, 1e-14);
  EXPECT_NEAR(internal_energy(e, DiscreteMeasure::zero(g)), 1.0, 1e-15);
}

TEST(Dissipation, ConstantDensities) {
  auto g = build_grid_1d(4);
  const EnergySpec e = EnergySpec::entropy(1.0);
  EXPECT_EQ(dissipation(e, DiscreteMeasure::constant(g, 1.0), DissipationMode::trace), 0.0);
  EXPECT_EQ(dissipation(e, DiscreteMeasure::constant(g, 3.0), DissipationMode::free), 0.0);
  // Two boundary half-edges of weight vol/2 and length dx/2.
  const double jump = 2.0 - 2.0 * std::sqrt(3.0);
  EXPECT_NEAR(dissipation(e, DiscreteMeasure::constant(g, 3.0), DissipationMode::trace),
              2 * 0.125 * (jump / 0.125) * (jump / 0.125), 1e-12);
}

TEST(Dissipation, LinearProfileConvergesToLog2) {
  const EnergySpec e = EnergySpec::entropy(1.0);
  double prev_err = 1.0;
  for (int n : {16, 32, 64, 128}) {
    auto g = build_grid_1d(n);
    const DiscreteMeasure mu = DiscreteMeasure::sample(g, [](const Point& x) { return 1.0 + x[0]; });
    const double err = std::abs(dissipation(e, mu, DissipationMode::free) - std::log(2.0));
    EXPECT_LT(err, prev_err);
    prev_err = err;
    EXPECT_NEAR(dissipation_alpha_form(e, mu, DissipationMode::free), std::log(2.0), 2.0 / n);
  }
  EXPECT_LT(prev_err, 1e-2);
}

TEST(Dissipation, AlphaFormTwoCells) {
  auto g = build_grid_1d(2);
  const EnergySpec e = EnergySpec::entropy(1.0);
  EXPECT_NEAR(dissipation_alpha_form(e, DiscreteMeasure(g, {1, 2}), DissipationMode::free), 4.0 / 3.0, 1e-14);
  EXPECT_EQ(dissipation_alpha_form(e, DiscreteMeasure::constant(g, 1.0), DissipationMode::trace), 0.0);
  EXPECT_TRUE(std::isinf(alpha_p(1.0, 0.0, 2.0)));
  EXPECT_EQ(alpha_p(0.0, 0.0, 2.0), 0.0);
  EXPECT_EQ(dissipation_alpha_form(EnergySpec::power(1.4, 0.0), DiscreteMeasure::zero(g), DissipationMode::trace), 0.0);
}

TEST(Dissipation, AlphaFormIsConvexAlongSegments) {
  auto g = build_grid(2, {{0, 1}, {0, 1}}, {4, 4});
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> value(0.05, 3.0);
  for (const EnergySpec& s : {EnergySpec::entropy(1.0), EnergySpec::power(1.4, 1.0), EnergySpec::power(1.5, 0.5)})
    for (int t = 0; t < 50; ++t) {
      std::vector<double> a(g->size()), b(g->size());
      for (double& v : a) v = value(rng);
      for (double& v : b) v = value(rng);
      for (DissipationMode m : {DissipationMode::free, DissipationMode::trace}) {
        const double ia = dissipation_alpha_form(s, DiscreteMeasure(g, a), m);
        const double ib = dissipation_alpha_form(s, DiscreteMeasure(g, b), m);
        for (double w : {0.1, 0.5, 0.9}) {
          std::vector<double> c(a.size());
          for (std::size_t i = 0; i < c.size(); ++i) c[i] = (1 - w) * a[i] + w * b[i];
          EXPECT_LE(dissipation_alpha_form(s, DiscreteMeasure(g, c), m), (1 - w) * ia + w * ib + 1e-9);
        }
      }
    }
}

TEST(Dissipation, ContinuousAlongConvergingSequences) {
  auto g = build_grid_1d(10);
  const EnergySpec e = EnergySpec::entropy(1.0);
  const DiscreteMeasure mu = DiscreteMeasure::sample(g, [](const Point& x) { return 1.5 + std::sin(5 * x[0]); });
  const double limit = dissipation(e, mu, DissipationMode::trace);
  double last = 0.0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<double> rho = mu.density();
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += std::pow(10.0, -2 * n) * std::cos(double(i));
    last = dissipation(e, DiscreteMeasure(g, rho), DissipationMode::trace);
  }
  EXPECT_LE(limit, last + 1e-9);
}
