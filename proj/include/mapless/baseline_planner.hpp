#ifndef MAPLESS_BASELINE_PLANNER_HPP
#define MAPLESS_BASELINE_PLANNER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "agent_ground.hpp"
#include "errors.hpp"
#include "grid_mdp.hpp"

namespace mapless {

/// Occupancy shares the agent-ground layout and indexing.
using OccupancyGrid = BinaryGrid;

inline constexpr double kDistanceCap = 200.0;  // ESDF value when nothing is occupied

/// Per-cell Euclidean distance (in cells) to the nearest occupied cell.
struct DistanceField {
  int size = 0;
  std::vector<double> distance;

  double at(Cell c) const { return distance[static_cast<std::size_t>(c.row * size + c.col)]; }
};

namespace detail {

// One-dimensional squared-distance transform of a sampled function
// (lower envelope of parabolas). f and out have length n.
inline void distance_transform_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    auto intersect = [&](int p) {
      return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
    };
    double s = intersect(v[static_cast<std::size_t>(k)]);
    while (s <= z[static_cast<std::size_t>(k)]) {  // z[0] = -inf stops the loop at k == 0
      --k;
      s = intersect(v[static_cast<std::size_t>(k)]);
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  if (k < 0) {
    std::fill(out, out + n, inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
    const int p = v[static_cast<std::size_t>(j)];
    out[q] = static_cast<double>(q - p) * (q - p) + f[p];
  }
}

}  // namespace detail

/// Exact Euclidean distance transform (separable two-pass method), capped at 200 cells.
inline DistanceField esdf(const OccupancyGrid& grid) {
  const int n = grid.size;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> sq(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = grid.cells[i] ? 0.0 : inf;

  std::vector<double> col_in(static_cast<std::size_t>(n)), col_out(static_cast<std::size_t>(n));
  std::vector<int> v;
  std::vector<double> z;
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) col_in[static_cast<std::size_t>(r)] = sq[static_cast<std::size_t>(r * n + c)];
    detail::distance_transform_1d(col_in.data(), col_out.data(), n, v, z);
    for (int r = 0; r < n; ++r) sq[static_cast<std::size_t>(r * n + c)] = col_out[static_cast<std::size_t>(r)];
  }
  std::vector<double> row_out(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    detail::distance_transform_1d(&sq[static_cast<std::size_t>(r * n)], row_out.data(), n, v, z);
    std::copy(row_out.begin(), row_out.end(), sq.begin() + r * n);
  }

  DistanceField field;
  field.size = n;
  field.distance.resize(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) field.distance[i] = std::min(std::sqrt(sq[i]), kDistanceCap);
  return field;
}

struct AStarConfig {
  double clearance_weight = 1.0;  // lambda
  double safe_distance = 3.0;     // cells
};

struct PlannedPath {
  bool found = false;
  std::vector<Cell> cells;  // start..goal
  double cost = 0.0;
  std::size_t expansions = 0;
  std::size_t peak_open = 0;
};

inline double step_length(Cell a, Cell b) { return (a.row != b.row && a.col != b.col) ? std::sqrt(2.0) : 1.0; }

inline double octile(Cell a, Cell b) {
  const int dr = std::abs(a.row - b.row), dc = std::abs(a.col - b.col);
  return std::abs(dr - dc) + std::sqrt(2.0) * std::min(dr, dc);
}

/// A* over king moves. Cost is the path length plus
/// lambda * sum(max(0, d_safe - esdf(cell))) over every entered cell; the
/// octile heuristic ignores the clearance term so it stays admissible.
/// Ties break on lower f, then higher g, then lower row-major index.
inline PlannedPath astar(const OccupancyGrid& grid, const DistanceField& field, Cell start, Cell goal,
                         const AStarConfig& config = {}) {
  const int n = grid.size;
  if (!in_bounds(start, n) || !in_bounds(goal, n)) throw bounds_error("A* endpoint outside the grid");
  if (grid.at(start) || grid.at(goal)) throw contract_error("A* endpoints must be free cells");

  struct Entry {
    double f;
    double g;
    int index;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<double> g(cells, std::numeric_limits<double>::infinity());
  std::vector<int> parent(cells, -1);
  std::vector<std::uint8_t> closed(cells, 0);
  auto idx = [n](Cell c) { return c.row * n + c.col; };

  PlannedPath out;
  g[static_cast<std::size_t>(idx(start))] = 0.0;
  open.push({octile(start, goal), 0.0, idx(start)});
  out.peak_open = 1;

  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    const auto ei = static_cast<std::size_t>(e.index);
    if (closed[ei] || e.g != g[ei]) continue;
    closed[ei] = 1;
    ++out.expansions;
    const Cell cur{e.index / n, e.index % n};
    if (cur == goal) {
      out.found = true;
      out.cost = e.g;
      for (int i = e.index; i != -1; i = parent[static_cast<std::size_t>(i)]) out.cells.push_back({i / n, i % n});
      std::reverse(out.cells.begin(), out.cells.end());
      return out;
    }
    for (const CellDelta d : kActionDeltas) {
      const Cell nb{cur.row + d.drow, cur.col + d.dcol};
      if (!in_bounds(nb, n) || grid.at(nb)) continue;
      const auto ni = static_cast<std::size_t>(idx(nb));
      if (closed[ni]) continue;
      const double penalty = std::max(0.0, config.safe_distance - field.at(nb));
      const double ng = e.g + step_length(cur, nb) + config.clearance_weight * penalty;
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = e.index;
        open.push({ng + octile(nb, goal), ng, idx(nb)});
        out.peak_open = std::max(out.peak_open, open.size());
      }
    }
  }
  return out;
}

struct PlanCostProbe {
  double wall_time_s = 0.0;
  std::size_t expansions = 0;
  std::size_t peak_open = 0;
  bool found = false;
  double cost = 0.0;
};

/// Full per-replan baseline pipeline: rasterize, ESDF, A*.
inline PlanCostProbe plan_cost_probe(const LidarScan& scan, const Pose2D& pose, const LocalGoal& goal,
                                     const AStarConfig& config = {}, int inflation = kDefaultInflation) {
  const auto t0 = std::chrono::steady_clock::now();
  const AgentGround ground = rasterize(scan, pose, goal, inflation);
  const DistanceField field = esdf(ground.obstacle);
  const PlannedPath path = astar(ground.obstacle, field, ground.agent, ground.goal, config);
  const auto t1 = std::chrono::steady_clock::now();
  return {std::chrono::duration<double>(t1 - t0).count(), path.expansions, path.peak_open, path.found, path.cost};
}

}  // namespace mapless

#endif  // MAPLESS_BASELINE_PLANNER_HPP
