#include <gtest/gtest.h>

#include <random>

#include "wbflow/oracles.hpp"
#include "wbflow/static_transport.hpp"

using namespace wbflow;

namespace {

DiscreteMeasure random_measure(const GridPtr& g, std::mt19937_64& rng, double zero_probability = 0.3) {
  std::uniform_real_distribution<double> value(0.0, 2.0), coin(0.0, 1.0);
  std::vector<double> rho(g->size());
  for (double& r : rho) r = coin(rng) < zero_probability ? 0.0 : value(rng);
  return DiscreteMeasure(g, rho);
}

// Densities k/4 with at most `support` nonzero cells, so the oracle stays cheap.
DiscreteMeasure rational_measure(const GridPtr& g, std::mt19937_64& rng, std::size_t support) {
  std::vector<double> rho(g->size(), 0.0);
  std::uniform_int_distribution<std::size_t> cell(0, g->size() - 1);
  std::uniform_int_distribution<int> quarter(1, 12);
  for (std::size_t k = 0; k < support; ++k) rho[cell(rng)] = quarter(rng) / 4.0;
  return DiscreteMeasure(g, rho);
}

}  // namespace

TEST(WbDistance, IdentityIsZeroWithDiagonalPlan) {
  auto g = build_grid_1d(6);
  const DiscreteMeasure mu(g, {1, 0, 2, 0.5, 0, 3});
  const WbResult r = wb_distance(mu, mu, 2);
  EXPECT_EQ(r.value, 0.0);
  for (const auto& f : r.plan.interior) EXPECT_EQ(f.source, f.target);
  EXPECT_EQ(r.plan.total_to_boundary(), 0.0);
}

TEST(WbDistance, AllMassToNearestBoundary) {
  auto g = build_grid_1d(4);
  const WbResult r = wb_distance(DiscreteMeasure(g, {0, 4, 0, 0}), DiscreteMeasure::zero(g), 2);
  EXPECT_NEAR(r.cost, 0.140625, 1e-15);
  EXPECT_DOUBLE_EQ(r.plan.to_boundary[1], 1.0);
}

TEST(WbDistance, ReservoirRerouteBeatsDirectTransport) {
  auto g = build_grid_1d(4);
  const DiscreteMeasure mu = DiscreteMeasure::point_mass(g, 0, 1.0), nu = DiscreteMeasure::point_mass(g, 3, 1.0);
  const WbResult r = wb_distance(mu, nu, 2);
  EXPECT_NEAR(r.cost, 0.03125, 1e-12);
  EXPECT_NEAR(oracle::brute_force_wb_cost(mu, nu, 2), 0.03125, 1e-12);
  EXPECT_NEAR(wasserstein(mu, nu, 2).cost, 0.5625, 1e-12);
  EXPECT_TRUE(r.plan.interior.empty());
}

TEST(WbDistance, BothZeroGivesEmptyPlan) {
  auto g = build_grid_1d(4);
  const DiscreteMeasure z = DiscreteMeasure::zero(g);
  const WbResult r = wb_distance(z, z, 1);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.plan.interior.empty());
}

TEST(WbDistance, MassScaling) {
  auto g = build_grid_1d(10);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const DiscreteMeasure a = random_measure(g, rng), b = random_measure(g, rng);
    std::vector<double> ca = a.density(), cb = b.density();
    for (double& v : ca) v *= 3.5;
    for (double& v : cb) v *= 3.5;
    for (double p : {1.0, 2.0, 3.0})
      EXPECT_NEAR(wb_distance(DiscreteMeasure(g, ca), DiscreteMeasure(g, cb), p).cost,
                  3.5 * wb_distance(a, b, p).cost, 1e-12);
  }
}

TEST(WbDistance, CertificateAndMarginalsOnRandomInstances) {
  std::mt19937_64 rng(5);
  for (auto g : {build_grid_1d(12), build_grid(2, {{0, 1}, {0, 1}}, {4, 5})}) {
    for (int t = 0; t < 30; ++t) {
      const DiscreteMeasure a = random_measure(g, rng), b = random_measure(g, rng);
      const WbResult r = wb_distance(a, b, 2);
      EXPECT_TRUE(r.certificate.holds(1e-9));
      const PlanReport rep = validate_plan(r.plan, a, b, 1e-9);
      EXPECT_TRUE(rep.within_tolerance) << rep.max_residual();
      EXPECT_NEAR(plan_cost(r.plan, 2), r.cost, 1e-12);
      EXPECT_NEAR(a.mass() - b.mass(), r.plan.total_to_boundary() - r.plan.total_from_boundary(), 1e-12);
    }
  }
}

TEST(WbDistance, MatchesVertexEnumerationOnTinyGrids) {
  std::mt19937_64 rng(17);
  for (int cells : {2, 3, 4, 5}) {
    auto g = build_grid_1d(cells);
    for (int t = 0; t < 25; ++t) {
      const DiscreteMeasure a = rational_measure(g, rng, 3), b = rational_measure(g, rng, 3);
      for (double p : {1.0, 2.0})
        EXPECT_NEAR(wb_distance(a, b, p).cost, oracle::brute_force_wb_cost(a, b, p), 1e-10);
    }
  }
}

TEST(WbDistance, MetricAxioms) {
  auto g = build_grid(2, {{0, 1}, {0, 1}}, {3, 3});
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const DiscreteMeasure a = random_measure(g, rng), b = random_measure(g, rng), c = random_measure(g, rng);
    for (double p : {1.0, 2.0}) {
      const double ab = wb_distance(a, b, p).value;
      EXPECT_NEAR(ab, wb_distance(b, a, p).value, 1e-9);
      EXPECT_LE(wb_distance(a, c, p).value, ab + wb_distance(b, c, p).value + 1e-9);
      if (!(a == b)) {
        EXPECT_GT(ab, 0.0);
      }
    }
  }
}

TEST(WbDistance, RejectsBadInput) {
  auto g = build_grid_1d(4), h = build_grid_1d(4);
  EXPECT_THROW(wb_distance(DiscreteMeasure::zero(g), DiscreteMeasure::zero(h), 2), invalid_input);
  EXPECT_THROW(wb_distance(DiscreteMeasure::zero(g), DiscreteMeasure::zero(g), 0.5), invalid_input);
  auto big = build_grid(2, {{0, 1}, {0, 1}}, {65, 64});
  EXPECT_THROW(wb_distance(DiscreteMeasure::zero(big), DiscreteMeasure::zero(big), 2), invalid_input);
}

TEST(Wasserstein, BasicValuesAndBalanceCheck) {
  auto g = build_grid_1d(4);
  const DiscreteMeasure a = DiscreteMeasure::point_mass(g, 0, 1.0), b = DiscreteMeasure::point_mass(g, 3, 1.0);
  EXPECT_EQ(wasserstein_distance(a, a, 2), 0.0);
  EXPECT_NEAR(wasserstein(a, b, 2).cost, 0.5625, 1e-15);
  EXPECT_THROW(wasserstein(a, DiscreteMeasure::point_mass(g, 3, 2.0), 2), invalid_input);
  EXPECT_THROW(wasserstein(DiscreteMeasure::zero(g), DiscreteMeasure::zero(g), 2), invalid_input);
}

TEST(Wasserstein, DominatesWb) {
  auto g = build_grid_1d(16);
  std::mt19937_64 rng(29);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a = random_measure(g, rng, 0.0).density(), b = random_measure(g, rng, 0.0).density();
    double sa = 0, sb = 0;
    for (double v : a) sa += v;
    for (double v : b) sb += v;
    for (double& v : b) v *= sa / sb;
    const DiscreteMeasure ma(g, a), mb(g, b);
    if (std::abs(ma.mass() - mb.mass()) > 1e-12) continue;
    EXPECT_LE(wb_distance(ma, mb, 2).value, wasserstein_distance(ma, mb, 2) + 1e-9);
  }
}

TEST(TransportationSimplex, DegenerateInstanceTerminates) {
  lp::TransportationProblem pb;
  pb.supply = {1, 1, 1};
  pb.demand = {1, 1, 1};
  pb.cost = {0, 1, 1, 1, 0, 1, 1, 1, 0};
  const auto s = lp::solve_transportation(pb);
  EXPECT_NEAR(s.objective, 0.0, 1e-15);
  EXPECT_EQ(s.basis.size(), 5u);
  EXPECT_LE(s.primal_residual, 1e-15);
}
