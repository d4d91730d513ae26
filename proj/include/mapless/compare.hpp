#ifndef MAPLESS_COMPARE_HPP
#define MAPLESS_COMPARE_HPP

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "agent_ground.hpp"
#include "baseline_planner.hpp"
#include "curriculum.hpp"
#include "errors.hpp"
#include "local_goal.hpp"
#include "policy_net.hpp"
#include "world_sim.hpp"

namespace mapless {

struct CompareConfig {
  int probes = 100;
  double min_clearance = 0.5;  // probe poses keep this far from walls, meters
  ScanConfig scan;
  GoalSelectionConfig goal;
  AStarConfig astar;
  int inflation = kDefaultInflation;
};

struct CompareRow {
  int probe = 0;
  Pose2D pose;
  Vec2 goal;  // world frame
  Action drl_action = Action::N;
  bool baseline_found = false;
  double baseline_cost = 0.0;
  std::size_t expansions = 0;
  std::size_t peak_open = 0;
  double drl_time_s = 0.0;
  double baseline_time_s = 0.0;
};

struct CompareSummary {
  std::vector<CompareRow> rows;
  double mean_drl_time_s = 0.0;
  double mean_baseline_time_s = 0.0;
  double time_ratio = 0.0;  // drl / baseline
};

/// Random collision-free poses inside the map's wall loop.
inline std::vector<Pose2D> sample_probe_poses(const WorldMap& map, int n, double min_clearance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> px(map.bounds.xmin, map.bounds.xmax), py(map.bounds.ymin, map.bounds.ymax);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  std::vector<Pose2D> out;
  long tries = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++tries > 1000L * n + 10000) throw state_error("map '" + map.name + "' has no room for probe poses");
    const Vec2 p{px(rng), py(rng)};
    if (detail::inside_walls(map, p) && clearance(map, p) >= min_clearance) out.push_back({p.x, p.y, heading(rng)});
  }
  return out;
}

/// Paired per-decision cost: the learned pipeline (rasterize + forward) and
/// the grid baseline (rasterize + ESDF + A*) on the same scan and local goal.
/// Both run single-threaded; only the timing columns vary between runs.
inline CompareSummary compare_planners(const WorldMap& map, const NetworkParams<float>& params,
                                       const CompareConfig& config, std::uint64_t seed) {
  if (config.probes < 1) throw parameter_error("compare needs at least one probe");
  using clock = std::chrono::steady_clock;
  CompareSummary out;
  const auto poses = sample_probe_poses(map, config.probes, config.min_clearance, seed);
  double drl_sum = 0.0, base_sum = 0.0;
  for (int i = 0; i < config.probes; ++i) {
    const Pose2D& pose = poses[static_cast<std::size_t>(i)];
    const LidarScan s = scan(map, pose, {config.scan.max_range, 0.0});
    const LocalGoal goal = select_local_goal(subsample(s), pose, config.goal);

    CompareRow row;
    row.probe = i;
    row.pose = pose;
    row.goal = goal.world_frame;

    const auto t0 = clock::now();
    const AgentGround ground = rasterize(s, pose, goal, config.inflation);
    const PolicyOutput pred = forward(params, to_tensor(ground));
    const auto t1 = clock::now();
    std::mt19937_64 unused(0);
    row.drl_action = select_action(pred, SelectMode::greedy, unused);
    row.drl_time_s = std::chrono::duration<double>(t1 - t0).count();

    const PlanCostProbe base = plan_cost_probe(s, pose, goal, config.astar, config.inflation);
    row.baseline_found = base.found;
    row.baseline_cost = base.cost;
    row.expansions = base.expansions;
    row.peak_open = base.peak_open;
    row.baseline_time_s = base.wall_time_s;

    drl_sum += row.drl_time_s;
    base_sum += row.baseline_time_s;
    out.rows.push_back(row);
  }
  out.mean_drl_time_s = drl_sum / config.probes;
  out.mean_baseline_time_s = base_sum / config.probes;
  out.time_ratio = out.mean_baseline_time_s > 0.0 ? out.mean_drl_time_s / out.mean_baseline_time_s : 0.0;
  return out;
}

}  // namespace mapless

#endif  // MAPLESS_COMPARE_HPP
