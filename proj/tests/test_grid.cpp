#include <gtest/gtest.h>

#include <cmath>

#include "wbflow/grid.hpp"

using namespace wbflow;

TEST(Grid, UnitIntervalFourCells) {
  auto g = build_grid_1d(4);
  const double centers[] = {0.125, 0.375, 0.625, 0.875};
  const double dist[] = {0.125, 0.375, 0.375, 0.125};
  ASSERT_EQ(g->size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(g->center(i)[0], centers[i]);
    EXPECT_DOUBLE_EQ(g->boundary_distance(i), dist[i]);
  }
}

TEST(Grid, SquareTwoByTwo) {
  auto g = build_grid(2, {{0, 1}, {0, 1}}, {2, 2});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g->boundary_distance(i), 0.25);
  EXPECT_DOUBLE_EQ(g->cell_volume(), 0.25);
}

TEST(Grid, CellVolume) { EXPECT_DOUBLE_EQ(build_grid_1d(8, 0.0, 2.0)->cell_volume(), 0.25); }

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(build_grid(3, {{0, 1}, {0, 1}, {0, 1}}, {2, 2, 2}), invalid_input);
  EXPECT_THROW(build_grid(1, {{1, 1}}, {4}), invalid_input);
  EXPECT_THROW(build_grid(1, {{1, 0}}, {4}), invalid_input);
  EXPECT_THROW(build_grid(1, {{0, 1}}, {1}), invalid_input);
}

TEST(Grid, NearestBoundaryPoint) {
  EXPECT_DOUBLE_EQ(build_grid_1d(4)->nearest_boundary_point(0)[0], 0.0);
  // Centre of a three-cell grid is equidistant from both ends.
  EXPECT_DOUBLE_EQ(build_grid_1d(3)->nearest_boundary_point(1)[0], 0.0);
  auto g = build_grid(2, {{0, 1}, {0, 1}}, {5, 5});
  const std::size_t cell = g->cell_index(0, 2);  // centre (0.1, 0.5)
  const Point p = g->nearest_boundary_point(cell);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Grid, NearestPointRealisesBoundaryDistance) {
  for (auto g : {build_grid_1d(7), build_grid(2, {{0, 2}, {-1, 1}}, {6, 4}), build_grid(2, {{0, 1}, {0, 3}}, {3, 5})}) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Point p = g->nearest_boundary_point(i);
      double d = 0.0;
      for (int k = 0; k < g->dimension(); ++k) d += (p[k] - g->center(i)[k]) * (p[k] - g->center(i)[k]);
      EXPECT_DOUBLE_EQ(std::sqrt(d), g->boundary_distance(i));
      EXPECT_GT(g->boundary_distance(i), 0.0);
      EXPECT_LE(g->boundary_distance(i), g->inradius());
    }
  }
}

TEST(Grid, EdgeCountsPerCell) {
  auto g = build_grid(2, {{0, 1}, {0, 1}}, {4, 3});
  std::vector<int> degree(g->size(), 0);
  for (const auto& e : g->interior_edges()) {
    ++degree[e.lo];
    ++degree[e.hi];
  }
  for (const auto& e : g->boundary_edges()) ++degree[e.cell];
  for (int d : degree) EXPECT_EQ(d, 4);
  EXPECT_EQ(g->interior_edges().size(), 3u * 3u + 4u * 2u);
  EXPECT_EQ(g->boundary_edges().size(), 2u * 4u + 2u * 3u);
}

TEST(Grid, RefinementHalvesMinimumBoundaryDistance) {
  auto min_d = [](const GridPtr& g) {
    double m = 1e300;
    for (double d : g->boundary_distances()) m = std::min(m, d);
    return m;
  };
  EXPECT_DOUBLE_EQ(min_d(build_grid_1d(16)), 2.0 * min_d(build_grid_1d(32)));
  EXPECT_DOUBLE_EQ(min_d(build_grid(2, {{0, 1}, {0, 1}}, {4, 4})),
                   2.0 * min_d(build_grid(2, {{0, 1}, {0, 1}}, {8, 8})));
}
