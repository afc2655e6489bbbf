#pragma once

// CSV and JSON serialisation. CSV columns:
//
//   measure   cell,x[,y],density
//   plan      kind,source,target,mass      kind in {interior,to_boundary,from_boundary};
//                                          the boundary side of a flow is written as -1
//   curve     time,cell,density
//   momenta   interval,edge,flux           edges: interior ids first, then boundary
//   edges     edge,kind,a,b,axis           a,b = lo,hi cells or cell,side
//
// Grids serialise as {dimension, extents, cells_per_axis} and energies as
// {variant, lambda[, alpha]}.

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/grid.hpp"
#include "wbflow/measure.hpp"

namespace wbflow::io {

using json = nlohmann::json;

inline void full_precision(std::ostream& os) { os << std::setprecision(std::numeric_limits<double>::max_digits10); }

inline void write_measure(std::ostream& os, const DiscreteMeasure& mu) {
  const Grid& g = *mu.grid();
  full_precision(os);
  os << (g.dimension() == 1 ? "cell,x,density\n" : "cell,x,y,density\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << i << ',' << g.center(i)[0];
    if (g.dimension() == 2) os << ',' << g.center(i)[1];
    os << ',' << mu.density(i) << '\n';
  }
}

inline void write_plan(std::ostream& os, const TransportPlan& plan) {
  full_precision(os);
  os << "kind,source,target,mass\n";
  for (const InteriorFlow& f : plan.interior) os << "interior," << f.source << ',' << f.target << ',' << f.mass << '\n';
  for (std::size_t i = 0; i < plan.to_boundary.size(); ++i)
    if (plan.to_boundary[i] > 0.0) os << "to_boundary," << i << ",-1," << plan.to_boundary[i] << '\n';
  for (std::size_t j = 0; j < plan.from_boundary.size(); ++j)
    if (plan.from_boundary[j] > 0.0) os << "from_boundary,-1," << j << ',' << plan.from_boundary[j] << '\n';
}

inline void write_curve(std::ostream& os, const Curve& c) {
  full_precision(os);
  os << "time,cell,density\n";
  for (std::size_t k = 0; k < c.nodes(); ++k)
    for (std::size_t i = 0; i < c.densities[k].size(); ++i) os << c.times[k] << ',' << i << ',' << c.densities[k][i] << '\n';
}

inline void write_momenta(std::ostream& os, const Curve& c) {
  if (!c.momenta) throw invalid_input("curve has no momenta to write");
  full_precision(os);
  os << "interval,edge,flux\n";
  for (std::size_t k = 0; k < c.momenta->size(); ++k)
    for (std::size_t e = 0; e < (*c.momenta)[k].size(); ++e) os << k << ',' << e << ',' << (*c.momenta)[k][e] << '\n';
}

inline void write_edges(std::ostream& os, const Grid& g) {
  os << "edge,kind,a,b,axis\n";
  std::size_t id = 0;
  for (const InteriorEdge& e : g.interior_edges()) os << id++ << ",interior," << e.lo << ',' << e.hi << ',' << e.axis << '\n';
  for (const BoundaryEdge& e : g.boundary_edges())
    os << id++ << ",boundary," << e.cell << ',' << e.side << ',' << e.axis << '\n';
}

template <class Writer, class... Args>
void write_file(const std::string& path, Writer&& writer, const Args&... args) {
  std::ofstream f(path);
  if (!f) throw invalid_input("cannot open " + path + " for writing");
  writer(f, args...);
}

inline json grid_to_json(const Grid& g) {
  json extents = json::array();
  for (const Interval& iv : g.extents()) extents.push_back({iv.lo, iv.hi});
  return {{"dimension", g.dimension()}, {"extents", extents}, {"cells_per_axis", g.cells_per_axis()}};
}

inline GridPtr grid_from_json(const json& j) {
  const int dim = j.at("dimension").get<int>();
  std::vector<Interval> extents;
  for (const json& e : j.at("extents")) {
    if (!e.is_array() || e.size() != 2) throw invalid_input("grid extents must be [lo, hi] pairs");
    extents.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  std::vector<int> cells;
  const json& c = j.at("cells_per_axis");
  if (c.is_number_integer()) cells.assign(static_cast<std::size_t>(dim), c.get<int>());
  else cells = c.get<std::vector<int>>();
  return build_grid(dim, std::move(extents), std::move(cells));
}

inline json energy_to_json(const EnergySpec& e) {
  json j{{"variant", to_string(e.kind())}, {"lambda", e.lambda()}};
  if (e.kind() == EnergyKind::power) j["alpha"] = e.alpha();
  return j;
}

inline EnergyParams energy_params_from_json(const json& j) {
  EnergyParams p;
  const std::string v = j.at("variant").get<std::string>();
  if (v == "entropy") p.kind = EnergyKind::entropy;
  else if (v == "power") p.kind = EnergyKind::power;
  else throw invalid_input("unknown energy variant '" + v + "'");
  p.lambda = j.at("lambda").get<double>();
  if (p.kind == EnergyKind::power) p.alpha = j.at("alpha").get<double>();
  return p;
}

}  // namespace wbflow::io
