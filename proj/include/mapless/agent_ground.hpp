#ifndef MAPLESS_AGENT_GROUND_HPP
#define MAPLESS_AGENT_GROUND_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "local_goal.hpp"
#include "world_sim.hpp"

namespace mapless {

inline constexpr int kGroundSize = 100;          // cells per side
inline constexpr double kGroundResolution = 0.1;  // meters per cell
inline constexpr int kGroundCenter = kGroundSize / 2;
inline constexpr double kMaxReturnRange = 5.0;    // returns farther away are dropped
inline constexpr int kDefaultInflation = 2;

/// Grid index. Rows grow toward -y (south), columns toward +x (east).
struct Cell {
  int row = 0;
  int col = 0;
  constexpr bool operator==(const Cell&) const = default;
};

constexpr bool in_bounds(Cell c, int size = kGroundSize) {
  return c.row >= 0 && c.row < size && c.col >= 0 && c.col < size;
}

constexpr int chebyshev(Cell a, Cell b) {
  const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr > dc ? dr : dc;
}

inline double euclidean(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

/// World position of the center of `cell`, given the center of cell (0,0).
inline Vec2 cell_center(Vec2 origin, Cell cell, double resolution = kGroundResolution) {
  return {origin.x + cell.col * resolution, origin.y - cell.row * resolution};
}

/// Inverse of cell_center: the cell whose square contains p (may be out of bounds).
inline Cell world_to_cell(Vec2 origin, Vec2 p, double resolution = kGroundResolution) {
  return {static_cast<int>(std::floor((origin.y - p.y) / resolution + 0.5)),
          static_cast<int>(std::floor((p.x - origin.x) / resolution + 0.5))};
}

/// Origin that puts world point `center` at the center of cell (50,50).
inline Vec2 ground_origin_for(Vec2 center) {
  return {center.x - kGroundCenter * kGroundResolution, center.y + kGroundCenter * kGroundResolution};
}

/// Square binary occupancy grid, row-major.
struct BinaryGrid {
  int size = kGroundSize;
  std::vector<std::uint8_t> cells = std::vector<std::uint8_t>(kGroundSize * kGroundSize, 0);

  BinaryGrid() = default;
  explicit BinaryGrid(int n) : size(n), cells(static_cast<std::size_t>(n) * n, 0) {}

  std::uint8_t& at(Cell c) { return cells[static_cast<std::size_t>(c.row * size + c.col)]; }
  std::uint8_t at(Cell c) const { return cells[static_cast<std::size_t>(c.row * size + c.col)]; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }
  bool operator==(const BinaryGrid&) const = default;
};

/// The MDP state: rasterized returns, the agent cell and the local-goal cell.
struct AgentGround {
  BinaryGrid obstacle;
  Cell agent{kGroundCenter, kGroundCenter};
  Cell goal{kGroundCenter, kGroundCenter};
  double resolution = kGroundResolution;
  Vec2 origin;

  bool is_obstacle(Cell c) const { return obstacle.at(c) != 0; }
  bool operator==(const AgentGround&) const = default;
};

/// Cells hit by scan returns within 5 m of the scan pose, dilated by a
/// Chebyshev disk of `inflation` cells. Returns the grid and the direct hits.
struct Rasterized {
  BinaryGrid hits;
  BinaryGrid inflated;
};

inline Rasterized rasterize_returns(const LidarScan& scan, Vec2 origin, int inflation) {
  if (inflation < 0) throw parameter_error("inflation must be non-negative");
  Rasterized out;
  const Pose2D& p = scan.pose;
  // returns just outside the window still inflate into it
  std::vector<Cell> sources;
  for (int i = 0; i < kBeamCount; ++i) {
    const double r = scan.ranges[static_cast<std::size_t>(i)];
    if (!std::isfinite(r) || r > kMaxReturnRange) continue;
    const double bearing = p.psi + beam_offset(i);
    const Vec2 hit{p.x + r * std::cos(bearing), p.y + r * std::sin(bearing)};
    const Cell c = world_to_cell(origin, hit);
    if (in_bounds(c)) out.hits.at(c) = 1;
    if (c.row >= -inflation && c.col >= -inflation && c.row < kGroundSize + inflation && c.col < kGroundSize + inflation)
      sources.push_back(c);
  }
  for (const Cell& h : sources)
    for (int dr = -inflation; dr <= inflation; ++dr)
      for (int dc = -inflation; dc <= inflation; ++dc) {
        const Cell n{h.row + dr, h.col + dc};
        if (in_bounds(n)) out.inflated.at(n) = 1;
      }
  return out;
}

/// Builds the vehicle-centered agent ground. The grid is axis-aligned to the
/// world frame; the agent sits at (50,50).
inline AgentGround rasterize(const LidarScan& scan, const Pose2D& pose, const LocalGoal& goal,
                             int inflation = kDefaultInflation) {
  AgentGround g;
  g.origin = ground_origin_for(pose.position());
  g.obstacle = rasterize_returns(scan, g.origin, inflation).inflated;
  g.agent = {kGroundCenter, kGroundCenter};
  g.goal = world_to_cell(g.origin, goal.world_frame);
  if (!in_bounds(g.goal)) throw contract_error("local goal falls outside the agent ground");
  g.obstacle.at(g.agent) = 0;
  g.obstacle.at(g.goal) = 0;
  return g;
}

inline AgentGround update_agent(const AgentGround& ground, Cell new_cell) {
  if (!in_bounds(new_cell))
    throw bounds_error("agent cell (" + std::to_string(new_cell.row) + "," + std::to_string(new_cell.col) +
                       ") outside the agent ground");
  AgentGround next = ground;
  next.agent = new_cell;
  return next;
}

// ---------------------------------------------------------------------------
// Network input encoding

/// Three binary planes (obstacle, agent, goal), plane-major then row-major.
struct StateTensor {
  static constexpr int kChannels = 3;
  int size = kGroundSize;
  std::vector<std::uint8_t> data;

  StateTensor() : data(static_cast<std::size_t>(kChannels) * kGroundSize * kGroundSize, 0) {}
  explicit StateTensor(int n) : size(n), data(static_cast<std::size_t>(kChannels) * n * n, 0) {}

  std::uint8_t& at(int plane, int row, int col) {
    return data[static_cast<std::size_t>((plane * size + row) * size + col)];
  }
  std::uint8_t at(int plane, int row, int col) const {
    return data[static_cast<std::size_t>((plane * size + row) * size + col)];
  }
  bool operator==(const StateTensor&) const = default;
};

enum Plane : int { kObstaclePlane = 0, kAgentPlane = 1, kGoalPlane = 2 };

inline StateTensor to_tensor(const AgentGround& ground) {
  StateTensor t(ground.obstacle.size);
  std::copy(ground.obstacle.cells.begin(), ground.obstacle.cells.end(), t.data.begin());
  t.at(kAgentPlane, ground.agent.row, ground.agent.col) = 1;
  t.at(kGoalPlane, ground.goal.row, ground.goal.col) = 1;
  return t;
}

/// Rebuilds the ground from its tensor encoding. The agent and goal planes
/// must each hold exactly one set cell.
inline AgentGround from_tensor(const StateTensor& t, Vec2 origin, double resolution = kGroundResolution) {
  AgentGround g;
  g.obstacle = BinaryGrid(t.size);
  g.origin = origin;
  g.resolution = resolution;
  int agents = 0, goals = 0;
  for (int r = 0; r < t.size; ++r)
    for (int c = 0; c < t.size; ++c) {
      g.obstacle.at({r, c}) = t.at(kObstaclePlane, r, c);
      if (t.at(kAgentPlane, r, c)) {
        g.agent = {r, c};
        ++agents;
      }
      if (t.at(kGoalPlane, r, c)) {
        g.goal = {r, c};
        ++goals;
      }
    }
  if (agents != 1 || goals != 1) throw contract_error("state tensor must mark exactly one agent and one goal cell");
  return g;
}

// ---------------------------------------------------------------------------
// Debug snapshots

inline void write_pgm(const BinaryGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "P5\n" << grid.size << ' ' << grid.size << "\n255\n";
  for (auto v : grid.cells) out.put(static_cast<char>(v ? 0 : 255));
}

/// Writes <prefix>_obstacle.pgm, <prefix>_agent.pgm, <prefix>_goal.pgm and a
/// <prefix>.json sidecar with the agent and goal cells.
inline void export_snapshot(const AgentGround& ground, const std::string& prefix) {
  write_pgm(ground.obstacle, prefix + "_obstacle.pgm");
  BinaryGrid agent(ground.obstacle.size), goal(ground.obstacle.size);
  agent.at(ground.agent) = 1;
  goal.at(ground.goal) = 1;
  write_pgm(agent, prefix + "_agent.pgm");
  write_pgm(goal, prefix + "_goal.pgm");
  nlohmann::json side = {{"agent", {ground.agent.row, ground.agent.col}},
                         {"goal", {ground.goal.row, ground.goal.col}},
                         {"origin", {ground.origin.x, ground.origin.y}},
                         {"resolution", ground.resolution},
                         {"obstacle_cells", ground.obstacle.count()}};
  std::ofstream out(prefix + ".json");
  if (!out) throw std::runtime_error("cannot write '" + prefix + ".json'");
  out << side.dump(2) << '\n';
}

}  // namespace mapless

#endif  // MAPLESS_AGENT_GROUND_HPP
