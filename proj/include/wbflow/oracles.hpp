#pragma once

// Exhaustive reference solver for tiny Wb_p instances: enumerates every basic
// solution of the reservoir transportation LP and keeps the cheapest feasible
// one. Exponential; meant for cross-checking the simplex on a handful of cells.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "wbflow/error.hpp"
#include "wbflow/measure.hpp"

namespace wbflow::oracle {

inline double binomial(std::size_t n, std::size_t k) {
  double b = 1.0;
  for (std::size_t i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
  return b;
}

// Wb_p^p by vertex enumeration over the supports of mu and nu.
inline double brute_force_wb_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                                  double max_bases = 2e6) {
  require_same_grid(mu, nu);
  const Grid& g = *mu.grid();
  std::vector<std::size_t> src, dst;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.density(i) > 0.0) src.push_back(i);
    if (nu.density(i) > 0.0) dst.push_back(i);
  }
  if (src.empty() && dst.empty()) return 0.0;
  const std::size_t m = src.size() + 1, n = dst.size() + 1;
  // Variables: every (row, col) pair; reservoir -> reservoir is free slack.
  struct Var {
    std::size_t row, col;
    double cost;
  };
  std::vector<Var> vars;
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const bool rr = r == m - 1, cr = c == n - 1;
      double cost = 0.0;
      if (rr && cr) cost = 0.0;
      else if (!rr && !cr) cost = std::pow(g.distance(src[r], dst[c]), p);
      else if (cr) cost = std::pow(g.boundary_distance(src[r]), p);
      else cost = std::pow(g.boundary_distance(dst[c]), p);
      vars.push_back({r, c, cost});
    }
  // Reservoir row supplies total(nu), reservoir column absorbs total(mu).
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m + n - 1));
  for (std::size_t r = 0; r + 1 < m; ++r) total_a += (rhs[static_cast<Eigen::Index>(r)] = mu.cell_mass(src[r]));
  for (std::size_t c = 0; c + 1 < n; ++c) total_b += (rhs[static_cast<Eigen::Index>(m + c)] = nu.cell_mass(dst[c]));
  rhs[static_cast<Eigen::Index>(m - 1)] = total_b;
  // The last column constraint is implied by the others and is dropped.
  const std::size_t rank = m + n - 1, nv = vars.size();
  if (binomial(nv, rank) > max_bases) throw invalid_input("instance too large for vertex enumeration");

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(nv));
  for (std::size_t v = 0; v < nv; ++v) {
    A(static_cast<Eigen::Index>(vars[v].row), static_cast<Eigen::Index>(v)) = 1.0;
    if (vars[v].col + 1 < n) A(static_cast<Eigen::Index>(m + vars[v].col), static_cast<Eigen::Index>(v)) = 1.0;
  }
  const double scale = std::max(1.0, std::max(total_a, total_b));
  double best = kInfinity;
  std::vector<std::size_t> pick(rank);
  for (std::size_t k = 0; k < rank; ++k) pick[k] = k;
  Eigen::MatrixXd B(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
  for (;;) {
    for (std::size_t k = 0; k < rank; ++k) B.col(static_cast<Eigen::Index>(k)) = A.col(static_cast<Eigen::Index>(pick[k]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(rhs);
      if ((B * x - rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * scale && x.minCoeff() >= -1e-12 * scale) {
        double cost = 0.0;
        for (std::size_t k = 0; k < rank; ++k) cost += std::max(0.0, x[static_cast<Eigen::Index>(k)]) * vars[pick[k]].cost;
        best = std::min(best, cost);
      }
    }
    // Next combination in lexicographic order.
    std::size_t k = rank;
    while (k > 0 && pick[k - 1] == nv - rank + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t t = k; t < rank; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

}  // namespace wbflow::oracle
