#ifndef MAPLESS_EXPLORER_HPP
#define MAPLESS_EXPLORER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "agent_ground.hpp"
#include "errors.hpp"
#include "grid_mdp.hpp"
#include "local_goal.hpp"
#include "policy_net.hpp"
#include "world_sim.hpp"

namespace mapless {

struct ExplorationConfig {
  int replan_period = 10;  // ticks
  double speed = 0.5;      // m/s
  double dt = 0.1;         // s
  int max_ticks = 12000;
  int stuck_window = 100;           // ticks
  double stuck_displacement = 0.5;  // m
  ScanConfig scan{kDefaultMaxRange, 0.01};
  GoalSelectionConfig goal;
  int inflation = kDefaultInflation;
  // seeded perturbation of the map's start pose
  double start_jitter = 0.1;          // m, lateral and longitudinal
  double start_heading_jitter = 0.1;  // rad

  void validate() const {
    if (replan_period < 1) throw parameter_error("replan period must be >= 1 tick");
    if (!(speed > 0.0)) throw parameter_error("speed must be positive");
    if (!(dt > 0.0)) throw parameter_error("dt must be positive");
    if (max_ticks < 1) throw parameter_error("max ticks must be >= 1");
    if (stuck_window < 1 || !(stuck_displacement >= 0.0)) throw parameter_error("invalid stuck detector");
    if (inflation < 0) throw parameter_error("inflation must be >= 0");
    if (!(start_jitter >= 0.0 && start_heading_jitter >= 0.0)) throw parameter_error("start jitter must be >= 0");
    goal.validate();
  }
};

enum class MissionOutcome : std::uint8_t { completed, collided, stuck, step_limit };

inline std::string_view to_string(MissionOutcome o) {
  switch (o) {
    case MissionOutcome::completed: return "completed";
    case MissionOutcome::collided: return "collided";
    case MissionOutcome::stuck: return "stuck";
    case MissionOutcome::step_limit: return "step_limit";
  }
  return "?";
}

struct TrajectoryRow {
  int tick = 0;
  double time = 0.0;  // end of tick
  Pose2D pose;        // after the tick's motion
  Vec2 velocity;      // commanded, body frame
  Vec2 local_goal;    // world frame
  Action action = Action::N;
  double clearance = 0.0;
  std::string events;  // ';'-separated: replan, forced_replan, collision, completed, stuck
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
};

struct ExplorationResult {
  MissionOutcome outcome = MissionOutcome::step_limit;
  TrajectoryLog log;
  double distance = 0.0;  // accumulated traversal, m
  int replans = 0;
  int ticks = 0;
  double min_clearance = kInf;
};

/// Velocity command for a king move. The ground is world-axis-aligned, so the
/// move is a world direction (east = +x, north = +y) rotated into the body frame.
inline Vec2 action_to_velocity(Action action, const Pose2D& pose, double speed) {
  if (!(speed > 0.0)) throw parameter_error("speed must be positive");
  const CellDelta d = delta(action);
  Vec2 world{static_cast<double>(d.dcol), static_cast<double>(-d.drow)};
  world = world * (speed / norm(world));
  return rotate(world, -pose.psi);
}

using ReplanCallback = std::function<void(int replan_index, int tick, const AgentGround&)>;

/// Receding-horizon mission: every `replan_period` ticks scan, pick a local
/// goal and rasterize a fresh agent ground; every tick take the greedy policy
/// action from the vehicle's current cell and integrate it.
inline ExplorationResult run_exploration(const WorldMap& map, const NetworkParams<float>& params,
                                         const ExplorationConfig& config, std::uint64_t seed,
                                         const ReplanCallback& on_replan = {}) {
  config.validate();
  if (!map.start) throw state_error("map '" + map.name + "' has no start pose");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  Pose2D pose = *map.start;
  pose.x += config.start_jitter * jitter(rng);
  pose.y += config.start_jitter * jitter(rng);
  pose.psi = normalize_angle(pose.psi + config.start_heading_jitter * jitter(rng));
  if (!map.bounds.contains(pose.position()) || check_collision(map, pose))
    throw state_error("start pose (" + std::to_string(pose.x) + ", " + std::to_string(pose.y) + ") is not collision-free");

  ExplorationResult res;
  AgentGround ground;
  Vec2 goal_world{};
  int since_replan = 0;
  std::vector<Vec2> positions{pose.position()};

  auto replan = [&] {
    const LidarScan s = scan(map, pose, config.scan, &rng);
    const LocalGoal g = select_local_goal(subsample(s), pose, config.goal);
    ground = rasterize(s, pose, g, config.inflation);
    goal_world = g.world_frame;
    since_replan = 0;
    if (on_replan) on_replan(res.replans, res.ticks, ground);
    ++res.replans;
  };

  for (int tick = 0; tick < config.max_ticks; ++tick) {
    TrajectoryRow row;
    row.tick = tick;
    auto add_event = [&](const char* e) {
      if (!row.events.empty()) row.events += ';';
      row.events += e;
    };
    if (tick == 0 || since_replan >= config.replan_period) {
      replan();
      add_event("replan");
    }
    Cell cell = world_to_cell(ground.origin, pose.position(), ground.resolution);
    if (!in_bounds(cell) || cell == ground.goal) {
      replan();
      add_event("forced_replan");
      cell = world_to_cell(ground.origin, pose.position(), ground.resolution);
    }
    ground.agent = cell;

    const PolicyOutput out = forward(params, to_tensor(ground));
    row.action = select_action(out, SelectMode::greedy, rng);
    row.velocity = action_to_velocity(row.action, pose, config.speed);
    const Vec2 before = pose.position();
    pose = step_kinematics(pose, row.velocity, config.dt);
    res.distance += norm(pose.position() - before);
    ++since_replan;
    res.ticks = tick + 1;

    row.time = (tick + 1) * config.dt;
    row.pose = pose;
    row.local_goal = goal_world;
    row.clearance = clearance(map, pose.position());
    res.min_clearance = std::min(res.min_clearance, row.clearance);
    positions.push_back(pose.position());

    bool done = true;
    if (check_collision(map, pose)) {
      res.outcome = MissionOutcome::collided;
      add_event("collision");
    } else if (std::any_of(map.goal_regions.begin(), map.goal_regions.end(),
                           [&](const Bounds& b) { return b.contains(pose.position()); }) ||
               (map.target_distance && res.distance >= *map.target_distance)) {
      res.outcome = MissionOutcome::completed;
      add_event("completed");
    } else if (tick + 1 >= config.stuck_window &&
               norm(pose.position() - positions[positions.size() - 1 - static_cast<std::size_t>(config.stuck_window)]) <
                   config.stuck_displacement) {
      res.outcome = MissionOutcome::stuck;
      add_event("stuck");
    } else {
      done = false;
    }
    res.log.rows.push_back(std::move(row));
    if (done) return res;
  }
  res.outcome = MissionOutcome::step_limit;
  return res;
}

inline void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "tick,time,x,y,psi,vx,vy,goal_x,goal_y,action,clearance,events\n";
  char buf[320];
  for (const auto& r : log.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.3f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%s,%.9g,%s\n", r.tick, r.time, r.pose.x,
                  r.pose.y, r.pose.psi, r.velocity.x, r.velocity.y, r.local_goal.x, r.local_goal.y,
                  std::string(to_string(r.action)).c_str(), r.clearance, r.events.c_str());
    out << buf;
  }
}

}  // namespace mapless

#endif  // MAPLESS_EXPLORER_HPP
