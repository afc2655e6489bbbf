#pragma once

// Primal transportation simplex (the network simplex specialised to a complete
// bipartite graph). Bases are spanning trees of the row/column graph, duals are
// recomputed along the tree after every pivot, and pivots follow Bland's rule
// so degenerate cycles cannot occur.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "wbflow/error.hpp"

namespace wbflow::lp {

struct TransportationProblem {
  std::vector<double> supply;  // one entry per row
  std::vector<double> demand;  // one entry per column
  std::vector<double> cost;    // row-major, rows * cols

  std::size_t rows() const { return supply.size(); }
  std::size_t cols() const { return demand.size(); }
  double c(std::size_t i, std::size_t j) const { return cost[i * cols() + j]; }
};

struct BasicCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

struct TransportationSolution {
  std::vector<BasicCell> basis;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  double objective = 0.0;
  long pivots = 0;
  // Optimality certificate: max violation of u_i + v_j <= c_ij over all
  // cells, max |c_ij - u_i - v_j| over cells carrying flow, and the largest
  // marginal residual of the returned flows.
  double dual_infeasibility = 0.0;
  double slackness_violation = 0.0;
  double primal_residual = 0.0;
};

struct SimplexOptions {
  long max_pivots = 50'000'000;
};

class TransportationSimplex {
 public:
  explicit TransportationSimplex(const TransportationProblem& problem, SimplexOptions options = {})
      : pb_(problem), opt_(options), m_(problem.rows()), n_(problem.cols()) {
    if (m_ == 0 || n_ == 0) throw invalid_input("transportation problem needs at least one row and column");
    if (pb_.cost.size() != m_ * n_) throw invalid_input("cost matrix has the wrong size");
    double cmax = 0.0;
    for (double c : pb_.cost) {
      if (!std::isfinite(c)) throw invalid_input("transportation costs must be finite");
      cmax = std::max(cmax, std::abs(c));
    }
    tol_ = 1e-13 * std::max(1.0, cmax);
  }

  TransportationSolution solve() {
    initial_basis();
    long pivots = 0;
    for (;;) {
      compute_potentials();
      std::size_t enter = npos;
      for (std::size_t k = 0; k < m_ * n_; ++k) {
        if (in_basis_[k]) continue;
        const std::size_t i = k / n_, j = k % n_;
        if (pb_.cost[k] - u_[i] - v_[j] < -tol_) {
          enter = k;
          break;
        }
      }
      if (enter == npos) break;
      if (++pivots > opt_.max_pivots)
        throw solver_error("transportation simplex exceeded its pivot budget", 0.0);
      pivot(enter);
    }
    return finish(pivots);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Node ids: rows are 0..m-1, columns m..m+n-1.
  std::size_t row_node(std::size_t i) const { return i; }
  std::size_t col_node(std::size_t j) const { return m_ + j; }

  void add_basic(std::size_t i, std::size_t j, double flow) {
    const std::size_t k = i * n_ + j;
    in_basis_[k] = 1;
    flow_[k] = flow;
    adj_[row_node(i)].push_back(k);
    adj_[col_node(j)].push_back(k);
  }

  void remove_basic(std::size_t k) {
    in_basis_[k] = 0;
    flow_[k] = 0.0;
    auto drop = [k](std::vector<std::size_t>& list) {
      list.erase(std::find(list.begin(), list.end(), k));
    };
    drop(adj_[row_node(k / n_)]);
    drop(adj_[col_node(k % n_)]);
  }

  // Least-cost rule; each allocation retires exactly one row or column so the
  // result is a spanning tree with m + n - 1 cells, possibly degenerate.
  void initial_basis() {
    in_basis_.assign(m_ * n_, 0);
    flow_.assign(m_ * n_, 0.0);
    adj_.assign(m_ + n_, {});
    std::vector<std::size_t> order(m_ * n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pb_.cost[a] < pb_.cost[b]; });
    std::vector<double> ra(pb_.supply), rb(pb_.demand);
    std::vector<char> row_on(m_, 1), col_on(n_, 1);
    std::size_t rows_on = m_, cols_on = n_;
    for (std::size_t k : order) {
      const std::size_t i = k / n_, j = k % n_;
      if (!row_on[i] || !col_on[j]) continue;
      const double x = std::max(0.0, std::min(ra[i], rb[j]));
      add_basic(i, j, x);
      ra[i] -= x;
      rb[j] -= x;
      if (rows_on == 1 && cols_on == 1) break;
      bool retire_row;
      if (rows_on == 1) retire_row = false;
      else if (cols_on == 1) retire_row = true;
      else retire_row = ra[i] <= rb[j];
      if (retire_row) {
        row_on[i] = 0;
        --rows_on;
      } else {
        col_on[j] = 0;
        --cols_on;
      }
    }
  }

  void compute_potentials() {
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{row_node(0)};
    seen[row_node(0)] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const std::size_t i = k / n_, j = k % n_;
        if (node < m_) {
          if (seen[col_node(j)]) continue;
          v_[j] = pb_.cost[k] - u_[i];
          seen[col_node(j)] = 1;
          stack.push_back(col_node(j));
        } else {
          if (seen[row_node(i)]) continue;
          u_[i] = pb_.cost[k] - v_[j];
          seen[row_node(i)] = 1;
          stack.push_back(row_node(i));
        }
      }
    }
  }

  // Tree path from the entering cell's column back to its row; alternating
  // signs starting with '-' on the first path cell.
  std::vector<std::size_t> cycle_path(std::size_t enter) {
    const std::size_t start = col_node(enter % n_);
    const std::size_t goal = row_node(enter / n_);
    std::vector<std::size_t> via(m_ + n_, npos);  // basic cell used to reach node
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == goal) break;
      for (std::size_t k : adj_[node]) {
        const std::size_t other = node < m_ ? col_node(k % n_) : row_node(k / n_);
        if (seen[other]) continue;
        seen[other] = 1;
        via[other] = k;
        stack.push_back(other);
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t node = goal; node != start;) {
      const std::size_t k = via[node];
      path.push_back(k);
      node = node < m_ ? col_node(k % n_) : row_node(k / n_);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(std::size_t enter) {
    const std::vector<std::size_t> path = cycle_path(enter);
    double theta = kInfinity;
    std::size_t leave = npos;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      const std::size_t k = path[t];
      if (flow_[k] < theta || (flow_[k] == theta && k < leave)) {
        theta = flow_[k];
        leave = k;
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t t = 0; t < path.size(); ++t) flow_[path[t]] += (t % 2 == 0) ? -theta : theta;
    remove_basic(leave);
    add_basic(enter / n_, enter % n_, theta);
  }

  TransportationSolution finish(long pivots) {
    compute_potentials();
    TransportationSolution s;
    s.pivots = pivots;
    s.row_potential = u_;
    s.col_potential = v_;
    std::vector<double> out(m_, 0.0), in(n_, 0.0);
    for (std::size_t k = 0; k < m_ * n_; ++k) {
      const std::size_t i = k / n_, j = k % n_;
      const double reduced = pb_.cost[k] - u_[i] - v_[j];
      s.dual_infeasibility = std::max(s.dual_infeasibility, -reduced);
      if (!in_basis_[k]) continue;
      const double f = std::max(0.0, flow_[k]);
      s.basis.push_back({i, j, f});
      s.objective += f * pb_.cost[k];
      out[i] += f;
      in[j] += f;
      if (f > 0.0) s.slackness_violation = std::max(s.slackness_violation, std::abs(reduced));
    }
    for (std::size_t i = 0; i < m_; ++i)
      s.primal_residual = std::max(s.primal_residual, std::abs(out[i] - pb_.supply[i]));
    for (std::size_t j = 0; j < n_; ++j)
      s.primal_residual = std::max(s.primal_residual, std::abs(in[j] - pb_.demand[j]));
    return s;
  }

  const TransportationProblem& pb_;
  SimplexOptions opt_;
  std::size_t m_, n_;
  double tol_;
  std::vector<char> in_basis_;
  std::vector<double> flow_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
};

inline TransportationSolution solve_transportation(const TransportationProblem& problem,
                                                   SimplexOptions options = {}) {
  return TransportationSimplex(problem, options).solve();
}

}  // namespace wbflow::lp
