#include <gtest/gtest.h>

#include <cmath>

#include "wbflow/diagnostics.hpp"
#include "wbflow/pde_reference.hpp"

using namespace wbflow;

namespace {

Curve sine_flow(int n, double dt, double horizon, const EnergySpec& spec) {
  auto g = build_grid_1d(n);
  const DiscreteMeasure mu =
      DiscreteMeasure::sample(g, [](const Point& x) { return 1.0 + 0.8 * std::sin(3.14159265358979 * x[0]); });
  return fd_solve(spec, mu, dt, horizon);
}

}  // namespace

TEST(DeGiorgi, ZeroOnEquilibrium) {
  auto g = build_grid_1d(6);
  const EnergySpec spec = EnergySpec::entropy(2.0);
  const Curve c = fd_solve(spec, DiscreteMeasure::constant(g, 2.0), 0.1, 0.3);
  for (auto speed : {SpeedEstimator::lp, SpeedEstimator::one_step})
    EXPECT_NEAR(de_giorgi(c, spec, DissipationMode::free, speed), 0.0, 1e-14);
}

TEST(DeGiorgi, TermsAddUp) {
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const Curve c = sine_flow(8, 0.01, 0.05, spec);
  const DeGiorgiTerms t = de_giorgi_terms(c, spec, DissipationMode::free, SpeedEstimator::one_step);
  EXPECT_LT(t.energy_change, 0.0);
  EXPECT_GT(t.speed_term, 0.0);
  EXPECT_GT(t.dissipation_term, 0.0);
  EXPECT_DOUBLE_EQ(t.value(), t.energy_change + t.speed_term + t.dissipation_term);
}

TEST(DeGiorgi, ReversedCurveIsPenalised) {
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const Curve c = sine_flow(16, 1e-3, 0.05, spec);
  const double forward = de_giorgi(c, spec, DissipationMode::free, SpeedEstimator::one_step);
  const double backward = de_giorgi(reversed(c), spec, DissipationMode::free, SpeedEstimator::one_step);
  EXPECT_GT(backward, 10 * std::abs(forward));
  EXPECT_GT(backward, 0.0);
}

TEST(DeGiorgi, OneStepSpeedVanishesUnderRefinement) {
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const double coarse = de_giorgi(sine_flow(16, 2e-3, 0.05, spec), spec, DissipationMode::free, SpeedEstimator::one_step);
  const double fine = de_giorgi(sine_flow(32, 5e-4, 0.05, spec), spec, DissipationMode::free, SpeedEstimator::one_step);
  EXPECT_LT(std::abs(fine), std::abs(coarse));
}

TEST(DeGiorgi, NeedsTwoNodes) {
  auto g = build_grid_1d(4);
  Curve c;
  c.grid = g;
  c.times = {0.0};
  c.densities = {std::vector<double>(4, 1.0)};
  EXPECT_THROW(de_giorgi(c, EnergySpec::entropy(1.0), DissipationMode::free), invalid_input);
}

TEST(ChainRule, ConsistentFlowPassesAndScaledFlowFails) {
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const Curve c = sine_flow(16, 5e-4, 0.02, spec);
  const double ok = chain_rule_check(c, spec);
  Curve doubled = c;
  for (auto& m : *doubled.momenta)
    for (double& v : m) v *= 2.0;
  const double bad = chain_rule_check(doubled, spec);
  EXPECT_LT(ok, 0.05);
  EXPECT_GT(bad, 10 * ok);
  Curve no_momenta = c;
  no_momenta.momenta.reset();
  EXPECT_THROW(chain_rule_check(no_momenta, spec), invalid_input);
}

TEST(ChainRule, ImprovesUnderRefinement) {
  const EnergySpec spec = EnergySpec::power(1.5, 1.0);
  const double a = chain_rule_check(sine_flow(8, 2e-3, 0.02, spec), spec);
  const double b = chain_rule_check(sine_flow(16, 5e-4, 0.02, spec), spec);
  EXPECT_LT(b, a);
}

TEST(Slope, EquilibriumHasNothingToRelease) {
  auto g = build_grid_1d(16);
  const EnergySpec spec = EnergySpec::entropy(1.0);
  for (const SlopeRow& r : slope_experiment(spec, DiscreteMeasure::constant(g, 1.0), {1.0 / 16, 2.0 / 16})) {
    EXPECT_EQ(r.j1, 0.0);
    EXPECT_EQ(r.j2, 0.0);
    EXPECT_EQ(r.ratio, 0.0);
  }
}

TEST(Slope, CollarReplacementByHand) {
  // Constant density c on [0,1]; one collar cell of width h on each side moves
  // (c - lambda) h of mass a distance h/2 to the boundary.
  auto g = build_grid_1d(8);
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const double c = 3.0, h = 1.0 / 8;
  const auto rows = slope_experiment(spec, DiscreteMeasure::constant(g, c), {h});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].j1, 2 * h * spec.value(c), 1e-14);
  EXPECT_NEAR(rows[0].j2, std::sqrt(2 * (c - 1.0) * h * h * h / 4), 1e-12);
  EXPECT_NEAR(rows[0].ratio, rows[0].j1 / rows[0].j2, 1e-12);
}

TEST(Slope, CollarOfSeveralCells) {
  // m cells per side. Sending each cell's excess straight out, a distance
  // (k + 1/2) h, bounds the cost; relaying through shallower cells is cheaper.
  auto g = build_grid_1d(64);
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const double c = 2.0, h = 1.0 / 64;
  std::vector<double> eps;
  for (int m : {8, 4, 2, 1}) eps.push_back(m * h);
  const auto rows = slope_experiment(spec, DiscreteMeasure::constant(g, c), eps);
  for (const SlopeRow& r : rows) {
    const int m = static_cast<int>(std::lround(r.epsilon / h));
    double moment = 0.0;
    for (int k = 0; k < m; ++k) moment += (k + 0.5) * (k + 0.5);
    EXPECT_NEAR(r.j1, 2 * m * h * spec.value(c), 1e-13);
    EXPECT_LE(r.j2, std::sqrt(2 * (c - 1.0) * h * h * h * moment) + 1e-12);
    if (m == 1) {
      EXPECT_NEAR(r.j2, std::sqrt(2 * (c - 1.0) * h * h * h * moment), 1e-12);
    }
  }
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GT(rows[k].ratio, rows[k - 1].ratio);
}

TEST(Slope, RejectsInvalidEpsilon) {
  auto g = build_grid_1d(8);
  const EnergySpec spec = EnergySpec::entropy(1.0);
  const DiscreteMeasure mu = DiscreteMeasure::constant(g, 2.0);
  EXPECT_THROW(slope_experiment(spec, mu, {0.0}), invalid_input);
  EXPECT_THROW(slope_experiment(spec, mu, {0.6}), invalid_input);
  EXPECT_THROW(slope_experiment(spec, mu, {0.1}), invalid_input);
}
