#ifndef MAPLESS_CURRICULUM_HPP
#define MAPLESS_CURRICULUM_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "agent_ground.hpp"
#include "baseline_planner.hpp"
#include "errors.hpp"
#include "grid_mdp.hpp"
#include "local_goal.hpp"
#include "policy_net.hpp"
#include "world_sim.hpp"

namespace mapless {

// ---------------------------------------------------------------------------
// Schedule

struct CurriculumStage {
  int episode_threshold = 0;  // last episode (1-based, inclusive) of this stage
  double goal_distance = 0.0;  // meters
  bool operator==(const CurriculumStage&) const = default;
};

struct CurriculumSchedule {
  std::vector<CurriculumStage> stages;
  int total_episodes = 0;

  void validate() const {
    if (stages.empty()) throw parameter_error("curriculum: no stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (i > 0 && stages[i].episode_threshold <= stages[i - 1].episode_threshold)
        throw parameter_error("curriculum: thresholds must be strictly increasing");
      if (i > 0 && stages[i].goal_distance < stages[i - 1].goal_distance)
        throw parameter_error("curriculum: goal distances must be non-decreasing");
      if (!(stages[i].goal_distance > 0.0 && stages[i].goal_distance <= 4.0))
        throw parameter_error("curriculum: goal distances must lie in (0, 4] m");
    }
    if (stages.back().episode_threshold != total_episodes)
      throw parameter_error("curriculum: final threshold must equal the episode total");
  }

  /// Goal distance for a 1-based episode index. Episodes past the end use the last stage.
  double goal_distance(int episode) const {
    for (const auto& s : stages)
      if (episode <= s.episode_threshold) return s.goal_distance;
    return stages.back().goal_distance;
  }

  bool operator==(const CurriculumSchedule&) const = default;
};

/// 2 m for episodes 1-500, 3 m for 501-1000, 4 m for 1001-1500.
inline CurriculumSchedule default_schedule() { return {{{500, 2.0}, {1000, 3.0}, {1500, 4.0}}, 1500}; }

/// Non-curriculum baseline: one stage at a fixed distance.
inline CurriculumSchedule fixed_schedule(double goal_distance, int total_episodes) {
  return {{{total_episodes, goal_distance}}, total_episodes};
}

/// Default schedule stretched or shrunk to `total_episodes` (even thirds).
inline CurriculumSchedule scaled_schedule(int total_episodes) {
  if (total_episodes < 3) return fixed_schedule(2.0, std::max(total_episodes, 1));
  const int a = total_episodes / 3, b = 2 * total_episodes / 3;
  return {{{a, 2.0}, {b, 3.0}, {total_episodes, 4.0}}, total_episodes};
}

// ---------------------------------------------------------------------------
// Scenario generation

struct ScenarioConfig {
  int stubs = 6;                   // random wall stubs per open-field scene
  double stub_min = 1.0;           // meters
  double stub_max = 3.0;
  double field_half_extent = 4.5;  // stub centers lie in [-e, e]^2 around the vehicle
  double map_scene_fraction = 0.5; // share of scenes drawn from generated corridor maps
  double map_width_min = 1.6;
  double map_width_max = 3.0;
  double start_clearance = 0.6;    // meters between the vehicle and any wall
  int inflation = kDefaultInflation;
  int max_drafts = 100;
};

struct ScenarioGenerator {
  std::uint64_t seed = 0;
  ScenarioConfig config;
  GoalSelectionConfig goal_selection;
};

struct Scenario {
  AgentGround ground;
  double initial_distance = 0.0;  // cells
  Pose2D pose;
  LocalGoal goal;
  std::string scene;  // "field" or a map kind
  int drafts = 0;
};

class generation_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::mt19937_64 episode_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t episode) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(episode),
                    static_cast<std::uint32_t>(episode >> 32)};
  return std::mt19937_64(seq);
}

// Even-odd rule against the map's closed wall loop.
inline bool inside_walls(const WorldMap& map, Vec2 p) {
  bool inside = false;
  for (const auto& s : map.segments) {
    const bool crosses = (s.a.y > p.y) != (s.b.y > p.y);
    if (crosses && p.x < s.a.x + (p.y - s.a.y) * (s.b.x - s.a.x) / (s.b.y - s.a.y)) inside = !inside;
  }
  return inside;
}

inline WorldMap random_field(std::mt19937_64& rng, const ScenarioConfig& c) {
  std::uniform_real_distribution<double> pos(-c.field_half_extent, c.field_half_extent);
  std::uniform_real_distribution<double> len(c.stub_min, c.stub_max);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  WorldMap m;
  m.name = "field";
  const double e = c.field_half_extent + c.stub_max;
  m.bounds = {-e, -e, e, e};
  while (static_cast<int>(m.segments.size()) < c.stubs) {
    const Vec2 center{pos(rng), pos(rng)};
    const double l = len(rng), a = ang(rng);
    const Vec2 half = Vec2{std::cos(a), std::sin(a)} * (l / 2.0);
    const Segment s{center - half, center + half};
    if (point_segment_distance({0.0, 0.0}, s) < c.start_clearance) continue;
    m.segments.push_back(s);
  }
  return m;
}

}  // namespace detail

/// Draws a training scenario: a scene (random wall stubs or a generated
/// corridor map), a vehicle pose, and a goal `goal_distance` meters along the
/// bearing the local-goal selector picks. Drafts are rejected until start and
/// goal cells are free and connected on the inflated ground.
inline Scenario generate_scenario(const ScenarioGenerator& gen, int episode, double goal_distance) {
  if (!(goal_distance > 0.0 && goal_distance <= 4.0)) throw parameter_error("scenario goal distance must lie in (0, 4] m");
  const ScenarioConfig& c = gen.config;
  gen.goal_selection.validate();
  auto rng = detail::episode_rng(gen.seed, 0x5ce7a410, static_cast<std::uint64_t>(episode));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);

  for (int draft = 1; draft <= c.max_drafts; ++draft) {
    WorldMap map;
    Pose2D pose;
    std::string scene;
    if (unit(rng) < c.map_scene_fraction) {
      static constexpr MapKind kinds[3] = {MapKind::corridor, MapKind::l_shape, MapKind::y_junction};
      const MapKind kind = kinds[std::uniform_int_distribution<int>(0, 2)(rng)];
      const double width = c.map_width_min + (c.map_width_max - c.map_width_min) * unit(rng);
      map = generate_map(kind, 0, {width, kind == MapKind::corridor ? 30.0 : 15.0});
      scene = map.name;
      std::uniform_real_distribution<double> px(map.bounds.xmin, map.bounds.xmax), py(map.bounds.ymin, map.bounds.ymax);
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        const Vec2 p{px(rng), py(rng)};
        if (detail::inside_walls(map, p) && clearance(map, p) >= c.start_clearance) {
          pose = {p.x, p.y, heading(rng)};
          placed = true;
        }
      }
      if (!placed) continue;
    } else {
      map = detail::random_field(rng, c);
      scene = "field";
      pose = {0.0, 0.0, heading(rng)};
    }

    const LidarScan s = scan(map, pose);
    const LocalGoal selected = select_local_goal(subsample(s), pose, gen.goal_selection);
    LocalGoal goal = selected;
    goal.distance = goal_distance;
    goal.body_frame = Vec2{std::cos(selected.bearing_offset), std::sin(selected.bearing_offset)} * goal_distance;
    goal.world_frame = pose.position() + rotate(goal.body_frame, pose.psi);

    AgentGround ground = rasterize(s, pose, goal, c.inflation);
    const BinaryGrid raw = rasterize_returns(s, ground.origin, c.inflation).inflated;
    if (raw.at(ground.goal) || raw.at(ground.agent)) continue;
    if (ground.goal == ground.agent) continue;
    const PlannedPath path = astar(ground.obstacle, esdf(ground.obstacle), ground.agent, ground.goal, {0.0, 0.0});
    if (!path.found) continue;

    Scenario out;
    out.initial_distance = euclidean(ground.agent, ground.goal);
    out.ground = std::move(ground);
    out.pose = pose;
    out.goal = goal;
    out.scene = scene;
    out.drafts = draft;
    return out;
  }
  throw generation_error("no valid scenario after " + std::to_string(c.max_drafts) + " drafts (episode " +
                         std::to_string(episode) + ")");
}

// ---------------------------------------------------------------------------
// Training

struct TrainingRow {
  int episode = 0;
  double goal_distance = 0.0;
  double total_reward = 0.0;
  int steps = 0;
  StepEvent event = StepEvent::step;
  double policy_loss = 0.0;  // per-transition means
  double value_loss = 0.0;
  double entropy = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingMetrics {
  std::vector<TrainingRow> rows;

  double mean_reward_last(std::size_t n) const {
    if (rows.empty()) return 0.0;
    const std::size_t k = std::min(n, rows.size());
    double s = 0.0;
    for (std::size_t i = rows.size() - k; i < rows.size(); ++i) s += rows[i].total_reward;
    return s / static_cast<double>(k);
  }
};

struct TrainConfig {
  Architecture arch;
  A2CHyper hyper;
  EpisodeConfig episode;
  double head_init_scale = 0.01;
  std::uint64_t seed = 0;  // parameter init and action sampling
  int checkpoint_every = 100;
  std::function<void(int episode, const NetworkParams<float>&)> on_checkpoint;
  std::function<void(const TrainingRow&)> on_episode;
};

struct TrainResult {
  NetworkParams<float> params;
  TrainingMetrics metrics;
};

class training_aborted : public std::runtime_error {
public:
  training_aborted(const std::string& what, NetworkParams<float> last_good, int episode)
      : std::runtime_error(what), last_good_(std::move(last_good)), episode_(episode) {}
  const NetworkParams<float>& last_good() const { return last_good_; }
  int episode() const { return episode_; }

private:
  NetworkParams<float> last_good_;
  int episode_;
};

struct Rollout {
  UpdateBatch batch;
  double total_reward = 0.0;
  int steps = 0;
  StepEvent event = StepEvent::step;
  std::vector<Cell> path;  // agent cells visited, start included
};

/// Runs one episode on a frozen agent ground.
inline Rollout rollout(const NetworkParams<float>& params, const AgentGround& start, const EpisodeConfig& config,
                       SelectMode mode, std::mt19937_64& rng, bool keep_batch = true) {
  Rollout r;
  AgentGround ground = start;
  r.path.push_back(ground.agent);
  for (int t = 0; t < config.max_steps; ++t) {
    StateTensor state = to_tensor(ground);
    const PolicyOutput out = forward(params, state);
    const Action action = select_action(out, mode, rng);
    StepOutcome o = step(ground, action, t, config);
    r.total_reward += o.reward;
    r.steps = t + 1;
    r.event = o.event;
    const bool done = o.terminal && o.event != StepEvent::timeout;
    if (keep_batch) {
      Transition tr{std::move(state), action, o.reward, done, std::nullopt};
      if (o.event == StepEvent::timeout) tr.next_state = to_tensor(o.next_ground);
      r.batch.push_back(std::move(tr));
    }
    ground = std::move(o.next_ground);
    r.path.push_back(ground.agent);
    if (o.terminal) break;
  }
  return r;
}

/// Curriculum training: one rollout and one A2C update per episode.
inline TrainResult train(const CurriculumSchedule& schedule, const ScenarioGenerator& gen, const TrainConfig& config) {
  schedule.validate();
  TrainResult res;
  res.params = init_params<float>(config.arch, config.seed, config.head_init_scale);
  AdamState<float> adam;
  NetworkParams<float> last_good = res.params;
  auto rng = detail::episode_rng(config.seed, 0xac7104, 0);

  for (int ep = 1; ep <= schedule.total_episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    const double dist = schedule.goal_distance(ep);
    const Scenario sc = generate_scenario(gen, ep, dist);
    Rollout r = rollout(res.params, sc.ground, config.episode, SelectMode::sample, rng);

    LossReport rep;
    try {
      rep = a2c_update(res.params, r.batch, config.hyper, adam);
    } catch (const non_finite_gradient& e) {
      throw training_aborted(std::string("episode ") + std::to_string(ep) + ": " + e.what(), last_good, ep);
    }
    if (!std::isfinite(rep.total))
      throw training_aborted("episode " + std::to_string(ep) + ": non-finite loss", last_good, ep);

    TrainingRow row;
    row.episode = ep;
    row.goal_distance = dist;
    row.total_reward = r.total_reward;
    row.steps = r.steps;
    row.event = r.event;
    const double n = static_cast<double>(rep.transitions);
    row.policy_loss = rep.policy_loss / n;
    row.value_loss = rep.value_loss / n;
    row.entropy = rep.entropy / n;
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.metrics.rows.push_back(row);
    if (config.on_episode) config.on_episode(row);
    if (config.checkpoint_every > 0 && ep % config.checkpoint_every == 0) {
      last_good = res.params;
      if (config.on_checkpoint) config.on_checkpoint(ep, res.params);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalSummary {
  int episodes = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;  // collisions and out-of-bounds exits
  double timeout_rate = 0.0;
  double mean_path_ratio = 0.0;  // over successes; policy path length / A* optimum
  int successes = 0;
};

struct EvalEpisode {
  int index = 0;  // scenario index in the generator
  std::string scene;
  double initial_distance = 0.0;
  StepEvent event = StepEvent::step;
  int steps = 0;
  double path_cost = 0.0;
  double optimal_cost = 0.0;
};

inline double path_length(const std::vector<Cell>& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) s += step_length(path[i - 1], path[i]);
  return s;
}

/// One greedy rollout on scenario `episode` of the generator, scored against
/// the A* optimum when it reaches the goal.
inline EvalEpisode evaluate_episode(const NetworkParams<float>& params, const ScenarioGenerator& gen, int episode,
                                    double goal_distance, const EpisodeConfig& config = {}) {
  const Scenario sc = generate_scenario(gen, episode, goal_distance);
  std::mt19937_64 unused_rng(0);
  const Rollout r = rollout(params, sc.ground, config, SelectMode::greedy, unused_rng, false);
  EvalEpisode e{episode, sc.scene, sc.initial_distance, r.event, r.steps, path_length(r.path), 0.0};
  if (r.event == StepEvent::goal)
    e.optimal_cost = astar(sc.ground.obstacle, esdf(sc.ground.obstacle), sc.ground.agent, sc.ground.goal, {0.0, 0.0}).cost;
  return e;
}

inline EvalSummary summarize(const std::vector<EvalEpisode>& episodes) {
  if (episodes.empty()) throw parameter_error("evaluation needs at least one episode");
  EvalSummary s;
  s.episodes = static_cast<int>(episodes.size());
  double ratio_sum = 0.0;
  int collisions = 0, timeouts = 0;
  for (const auto& e : episodes) {
    if (e.event == StepEvent::goal) {
      ratio_sum += e.path_cost / e.optimal_cost;
      ++s.successes;
    } else if (e.event == StepEvent::timeout) {
      ++timeouts;
    } else {
      ++collisions;
    }
  }
  const double n = s.episodes;
  s.success_rate = s.successes / n;
  s.collision_rate = collisions / n;
  s.timeout_rate = timeouts / n;
  s.mean_path_ratio = s.successes > 0 ? ratio_sum / s.successes : 0.0;
  return s;
}

/// Greedy rollouts with no learning over scenarios
/// `first_episode .. first_episode + n_episodes - 1`.
inline EvalSummary evaluate(const NetworkParams<float>& params, const ScenarioGenerator& gen, int n_episodes,
                            double goal_distance, const EpisodeConfig& config = {}, int first_episode = 1,
                            std::vector<EvalEpisode>* details = nullptr) {
  if (n_episodes < 1) throw parameter_error("evaluation needs at least one episode");
  std::vector<EvalEpisode> eps;
  for (int i = 0; i < n_episodes; ++i) eps.push_back(evaluate_episode(params, gen, first_episode + i, goal_distance, config));
  if (details) details->insert(details->end(), eps.begin(), eps.end());
  return summarize(eps);
}

}  // namespace mapless

#endif  // MAPLESS_CURRICULUM_HPP
