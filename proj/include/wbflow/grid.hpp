#pragma once

// Uniform cell-centred discretisation of a box domain in one or two
// dimensions. All integrals over the domain use the midpoint rule on cells.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "wbflow/error.hpp"

namespace wbflow {

using Point = std::array<double, 2>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

// Undirected edge between two face-adjacent cells; `lo` < `hi` along `axis`.
struct InteriorEdge {
  std::size_t lo;
  std::size_t hi;
  int axis;
};

// Face of a boundary-adjacent cell lying on the domain boundary.
// side 0 is the face at extents[axis].lo, side 1 the face at extents[axis].hi.
struct BoundaryEdge {
  std::size_t cell;
  int axis;
  int side;
};

class Grid {
 public:
  Grid(int dimension, std::vector<Interval> extents, std::vector<int> cells_per_axis)
      : dimension_(dimension), extents_(std::move(extents)), cells_(std::move(cells_per_axis)) {
    if (dimension_ != 1 && dimension_ != 2)
      throw invalid_input("grid dimension must be 1 or 2, got " + std::to_string(dimension_));
    if (static_cast<int>(extents_.size()) != dimension_ ||
        static_cast<int>(cells_.size()) != dimension_)
      throw invalid_input("grid extents and cells_per_axis must have one entry per axis");
    for (int k = 0; k < dimension_; ++k) {
      if (!(extents_[k].hi > extents_[k].lo) || !std::isfinite(extents_[k].lo) ||
          !std::isfinite(extents_[k].hi))
        throw invalid_input("degenerate extent on axis " + std::to_string(k));
      if (cells_[k] < 2)
        throw invalid_input("cells_per_axis must be >= 2 on axis " + std::to_string(k));
      cell_size_[k] = extents_[k].length() / cells_[k];
    }
    build();
  }

  int dimension() const { return dimension_; }
  const std::vector<Interval>& extents() const { return extents_; }
  const std::vector<int>& cells_per_axis() const { return cells_; }
  std::size_t size() const { return centers_.size(); }

  double cell_size(int axis) const { return cell_size_[axis]; }
  double cell_volume() const { return volume_; }
  // Measure of a cell face orthogonal to `axis` (1 in 1D).
  double face_area(int axis) const { return volume_ / cell_size_[axis]; }

  const Point& center(std::size_t cell) const { return centers_[cell]; }
  const std::vector<Point>& centers() const { return centers_; }
  double boundary_distance(std::size_t cell) const { return boundary_distance_[cell]; }
  const std::vector<double>& boundary_distances() const { return boundary_distance_; }

  const std::vector<InteriorEdge>& interior_edges() const { return interior_edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  // Interior edges are numbered first, then boundary edges.
  std::size_t edge_count() const { return interior_edges_.size() + boundary_edges_.size(); }

  // Distance between the centres joined by an edge (boundary: centre to face).
  double edge_length(const InteriorEdge& e) const { return cell_size_[e.axis]; }
  double edge_length(const BoundaryEdge& e) const { return 0.5 * cell_size_[e.axis]; }

  std::array<int, 2> cell_coords(std::size_t cell) const {
    if (dimension_ == 1) return {static_cast<int>(cell), 0};
    return {static_cast<int>(cell % cells_[0]), static_cast<int>(cell / cells_[0])};
  }

  std::size_t cell_index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(j);
  }

  double distance(std::size_t a, std::size_t b) const {
    double s = 0.0;
    for (int k = 0; k < dimension_; ++k) {
      const double d = centers_[a][k] - centers_[b][k];
      s += d * d;
    }
    return std::sqrt(s);
  }

  // Closest point of the boundary to the cell centre. Equidistant faces are
  // resolved by lowest axis, then by the face with the smaller coordinate.
  Point nearest_boundary_point(std::size_t cell) const {
    const Point& c = centers_[cell];
    Point best = c;
    double best_distance = kInfinity;
    for (int k = 0; k < dimension_; ++k) {
      const double to_lo = c[k] - extents_[k].lo;
      const double to_hi = extents_[k].hi - c[k];
      if (to_lo < best_distance) {
        best_distance = to_lo;
        best = c;
        best[k] = extents_[k].lo;
      }
      if (to_hi < best_distance) {
        best_distance = to_hi;
        best = c;
        best[k] = extents_[k].hi;
      }
    }
    return best;
  }

  // Half the smallest side length; no cell centre is farther than this from the boundary.
  double inradius() const {
    double r = kInfinity;
    for (int k = 0; k < dimension_; ++k) r = std::min(r, 0.5 * extents_[k].length());
    return r;
  }

 private:
  void build() {
    const int nx = cells_[0];
    const int ny = dimension_ == 2 ? cells_[1] : 1;
    volume_ = 1.0;
    for (int k = 0; k < dimension_; ++k) volume_ *= cell_size_[k];

    centers_.resize(static_cast<std::size_t>(nx) * ny);
    boundary_distance_.resize(centers_.size());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = cell_index(i, j);
        Point p{extents_[0].lo + (i + 0.5) * cell_size_[0], 0.0};
        if (dimension_ == 2) p[1] = extents_[1].lo + (j + 0.5) * cell_size_[1];
        centers_[c] = p;
        double d = kInfinity;
        for (int k = 0; k < dimension_; ++k)
          d = std::min({d, p[k] - extents_[k].lo, extents_[k].hi - p[k]});
        boundary_distance_[c] = d;
      }
    }

    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = cell_index(i, j);
        if (i + 1 < nx) interior_edges_.push_back({c, cell_index(i + 1, j), 0});
        if (dimension_ == 2 && j + 1 < ny) interior_edges_.push_back({c, cell_index(i, j + 1), 1});
      }
    }
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = cell_index(i, j);
        if (i == 0) boundary_edges_.push_back({c, 0, 0});
        if (i == nx - 1) boundary_edges_.push_back({c, 0, 1});
        if (dimension_ == 2) {
          if (j == 0) boundary_edges_.push_back({c, 1, 0});
          if (j == ny - 1) boundary_edges_.push_back({c, 1, 1});
        }
      }
    }
  }

  int dimension_;
  std::vector<Interval> extents_;
  std::vector<int> cells_;
  std::array<double, 2> cell_size_{1.0, 1.0};
  double volume_ = 1.0;
  std::vector<Point> centers_;
  std::vector<double> boundary_distance_;
  std::vector<InteriorEdge> interior_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(int dimension, std::vector<Interval> extents, std::vector<int> cells_per_axis) {
  return std::make_shared<const Grid>(dimension, std::move(extents), std::move(cells_per_axis));
}

// Convenience for the common unit-interval case.
inline GridPtr build_grid_1d(int cells, double lo = 0.0, double hi = 1.0) {
  return build_grid(1, {{lo, hi}}, {cells});
}

}  // namespace wbflow
