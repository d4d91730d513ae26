#ifndef MAPLESS_GRID_MDP_HPP
#define MAPLESS_GRID_MDP_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "agent_ground.hpp"
#include "errors.hpp"

namespace mapless {

/// King's move. N is toward -row (+y in the world).
enum class Action : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

inline constexpr int kActionCount = 8;

struct CellDelta {
  int drow;
  int dcol;
};

inline constexpr std::array<CellDelta, kActionCount> kActionDeltas{{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1},
}};

constexpr CellDelta delta(Action a) { return kActionDeltas[static_cast<std::size_t>(a)]; }
constexpr int index(Action a) { return static_cast<int>(a); }
constexpr Action action_from_index(int i) { return static_cast<Action>(i); }
constexpr bool is_diagonal(Action a) { return delta(a).drow != 0 && delta(a).dcol != 0; }

inline std::string_view to_string(Action a) {
  static constexpr std::array<std::string_view, kActionCount> names{"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[static_cast<std::size_t>(a)];
}

inline constexpr double kGoalReward = 10.0;
inline constexpr double kCrashReward = -100.0;

enum class StepEvent : std::uint8_t { step, goal, collision, out_of_bounds, timeout };

inline std::string_view to_string(StepEvent e) {
  switch (e) {
    case StepEvent::step: return "step";
    case StepEvent::goal: return "goal";
    case StepEvent::collision: return "collision";
    case StepEvent::out_of_bounds: return "out_of_bounds";
    case StepEvent::timeout: return "timeout";
  }
  return "?";
}

struct EpisodeConfig {
  int max_steps = 200;
  double gamma = 0.99;
  int goal_tolerance_cells = 0;     // Chebyshev radius counted as reaching the goal
  bool block_corner_cutting = false;  // diagonal moves between two obstacle cells collide
};

struct StepOutcome {
  AgentGround next_ground;
  double reward = 0.0;
  bool terminal = false;
  StepEvent event = StepEvent::step;
};

inline bool at_goal(const AgentGround& g, Cell c, const EpisodeConfig& config) {
  return chebyshev(c, g.goal) <= config.goal_tolerance_cells;
}

/// One deterministic MDP transition with the shaped reward:
/// +10 on reaching the goal, -100 on hitting an obstacle or leaving the
/// ground, otherwise the decrease in Euclidean cell distance to the goal.
inline StepOutcome step(const AgentGround& ground, Action action, int steps_taken, const EpisodeConfig& config) {
  if (steps_taken < 0 || steps_taken >= config.max_steps)
    throw contract_error("step called after the step limit was reached");
  if (ground.is_obstacle(ground.agent) || at_goal(ground, ground.agent, config))
    throw contract_error("step called on a terminal state");

  const CellDelta d = delta(action);
  const Cell next{ground.agent.row + d.drow, ground.agent.col + d.dcol};
  StepOutcome out;
  if (!in_bounds(next, ground.obstacle.size)) {
    out.next_ground = ground;
    out.reward = kCrashReward;
    out.terminal = true;
    out.event = StepEvent::out_of_bounds;
    return out;
  }

  out.next_ground = update_agent(ground, next);
  const bool corner_cut = config.block_corner_cutting && is_diagonal(action) &&
                          ground.is_obstacle({ground.agent.row + d.drow, ground.agent.col}) &&
                          ground.is_obstacle({ground.agent.row, ground.agent.col + d.dcol});
  if (ground.is_obstacle(next) || corner_cut) {
    out.reward = kCrashReward;
    out.terminal = true;
    out.event = StepEvent::collision;
  } else if (at_goal(ground, next, config)) {
    out.reward = kGoalReward;
    out.terminal = true;
    out.event = StepEvent::goal;
  } else {
    out.reward = euclidean(ground.agent, ground.goal) - euclidean(next, ground.goal);
    if (steps_taken == config.max_steps - 1) {
      out.terminal = true;
      out.event = StepEvent::timeout;
    }
  }
  return out;
}

struct EpisodeStart {
  AgentGround ground;
  double initial_distance = 0.0;  // cells
};

inline EpisodeStart make_episode(const LidarScan& scan, const Pose2D& pose, const LocalGoal& goal,
                                 int inflation = kDefaultInflation) {
  if (goal.distance > 4.0 + 1e-9) throw contract_error("local goal farther than 4 m");
  EpisodeStart e;
  e.ground = rasterize(scan, pose, goal, inflation);
  e.initial_distance = euclidean(e.ground.agent, e.ground.goal);
  return e;
}

}  // namespace mapless

#endif  // MAPLESS_GRID_MDP_HPP
