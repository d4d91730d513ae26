#ifndef MAPLESS_CONFIG_HPP
#define MAPLESS_CONFIG_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "curriculum.hpp"
#include "errors.hpp"
#include "explorer.hpp"
#include "compare.hpp"

namespace mapless {

// JSON mapping of every tunable. A config file holds any subset of the keys
// produced by default_config(); missing keys keep their defaults and unknown
// keys are rejected so typos do not pass silently.

using Json = nlohmann::json;

inline Json to_json(const Architecture& a) {
  return {{"input_size", a.input_size},       {"conv1_filters", a.conv1_filters}, {"conv1_kernel", a.conv1_kernel},
          {"conv1_stride", a.conv1_stride},   {"conv2_filters", a.conv2_filters}, {"conv2_kernel", a.conv2_kernel},
          {"conv2_stride", a.conv2_stride},   {"hidden", a.hidden}};
}

inline Json to_json(const A2CHyper& h) {
  return {{"learning_rate", h.learning_rate}, {"entropy_coef", h.entropy_coef}, {"value_coef", h.value_coef},
          {"gamma", h.gamma},                 {"grad_clip", h.grad_clip},       {"adam_beta1", h.adam_beta1},
          {"adam_beta2", h.adam_beta2},       {"adam_eps", h.adam_eps}};
}

inline Json to_json(const EpisodeConfig& e) {
  return {{"max_steps", e.max_steps},
          {"goal_tolerance_cells", e.goal_tolerance_cells},
          {"block_corner_cutting", e.block_corner_cutting}};
}

inline Json to_json(const GoalSelectionConfig& g) {
  return {{"d_th", g.d_th},
          {"w_psi", g.w_psi},
          {"far_cap", g.far_cap},
          {"mid_cap", g.mid_cap},
          {"mode", g.mode == GoalMode::mean_index ? "mean_index" : "argmax"}};
}

inline Json to_json(const ScenarioConfig& c) {
  return {{"stubs", c.stubs},
          {"stub_min", c.stub_min},
          {"stub_max", c.stub_max},
          {"field_half_extent", c.field_half_extent},
          {"map_scene_fraction", c.map_scene_fraction},
          {"map_width_min", c.map_width_min},
          {"map_width_max", c.map_width_max},
          {"start_clearance", c.start_clearance},
          {"inflation", c.inflation},
          {"max_drafts", c.max_drafts}};
}

inline Json to_json(const CurriculumSchedule& s) {
  Json stages = Json::array();
  for (const auto& st : s.stages) stages.push_back({st.episode_threshold, st.goal_distance});
  return stages;
}

inline Json to_json(const ExplorationConfig& e) {
  return {{"replan_period", e.replan_period},
          {"speed", e.speed},
          {"dt", e.dt},
          {"max_ticks", e.max_ticks},
          {"stuck_window", e.stuck_window},
          {"stuck_displacement", e.stuck_displacement},
          {"max_range", e.scan.max_range},
          {"noise_sigma", e.scan.noise_sigma},
          {"inflation", e.inflation},
          {"start_jitter", e.start_jitter},
          {"start_heading_jitter", e.start_heading_jitter}};
}

inline Json to_json(const AStarConfig& a) {
  return {{"clearance_weight", a.clearance_weight}, {"safe_distance", a.safe_distance}};
}

namespace detail {

// Reads j[key] into out when present, with a path-qualified message on type errors.
template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw parameter_error("config key '" + path + "." + key + "' has the wrong type");
  }
}

inline void reject_unknown(const Json& j, const Json& known, const std::string& path) {
  if (!j.is_object()) throw parameter_error("config section '" + path + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw parameter_error("unknown config key '" + path + "." + it.key() + "'");
}

}  // namespace detail

inline void from_json_section(const Json& j, Architecture& a, const std::string& path = "network") {
  detail::reject_unknown(j, to_json(a), path);
  detail::read(j, "input_size", a.input_size, path);
  detail::read(j, "conv1_filters", a.conv1_filters, path);
  detail::read(j, "conv1_kernel", a.conv1_kernel, path);
  detail::read(j, "conv1_stride", a.conv1_stride, path);
  detail::read(j, "conv2_filters", a.conv2_filters, path);
  detail::read(j, "conv2_kernel", a.conv2_kernel, path);
  detail::read(j, "conv2_stride", a.conv2_stride, path);
  detail::read(j, "hidden", a.hidden, path);
  a.validate();
}

inline void from_json_section(const Json& j, A2CHyper& h, const std::string& path = "hyper") {
  detail::reject_unknown(j, to_json(h), path);
  detail::read(j, "learning_rate", h.learning_rate, path);
  detail::read(j, "entropy_coef", h.entropy_coef, path);
  detail::read(j, "value_coef", h.value_coef, path);
  detail::read(j, "gamma", h.gamma, path);
  detail::read(j, "grad_clip", h.grad_clip, path);
  detail::read(j, "adam_beta1", h.adam_beta1, path);
  detail::read(j, "adam_beta2", h.adam_beta2, path);
  detail::read(j, "adam_eps", h.adam_eps, path);
  if (!(h.learning_rate > 0.0)) throw parameter_error("hyper.learning_rate must be positive");
  if (!(h.gamma > 0.0 && h.gamma < 1.0)) throw parameter_error("hyper.gamma must lie in (0, 1)");
  if (!(h.entropy_coef >= 0.0 && h.value_coef >= 0.0)) throw parameter_error("loss coefficients must be >= 0");
}

inline void from_json_section(const Json& j, EpisodeConfig& e, const std::string& path = "episode") {
  detail::reject_unknown(j, to_json(e), path);
  detail::read(j, "max_steps", e.max_steps, path);
  detail::read(j, "goal_tolerance_cells", e.goal_tolerance_cells, path);
  detail::read(j, "block_corner_cutting", e.block_corner_cutting, path);
  if (e.max_steps < 1) throw parameter_error("episode.max_steps must be >= 1");
  if (e.goal_tolerance_cells < 0) throw parameter_error("episode.goal_tolerance_cells must be >= 0");
}

inline void from_json_section(const Json& j, GoalSelectionConfig& g, const std::string& path = "goal") {
  detail::reject_unknown(j, to_json(g), path);
  detail::read(j, "d_th", g.d_th, path);
  detail::read(j, "w_psi", g.w_psi, path);
  detail::read(j, "far_cap", g.far_cap, path);
  detail::read(j, "mid_cap", g.mid_cap, path);
  std::string mode = g.mode == GoalMode::mean_index ? "mean_index" : "argmax";
  detail::read(j, "mode", mode, path);
  if (mode == "mean_index") g.mode = GoalMode::mean_index;
  else if (mode == "argmax") g.mode = GoalMode::argmax;
  else throw parameter_error("goal.mode must be 'mean_index' or 'argmax'");
  g.validate();
}

inline void from_json_section(const Json& j, ScenarioConfig& c, const std::string& path = "scenario") {
  detail::reject_unknown(j, to_json(c), path);
  detail::read(j, "stubs", c.stubs, path);
  detail::read(j, "stub_min", c.stub_min, path);
  detail::read(j, "stub_max", c.stub_max, path);
  detail::read(j, "field_half_extent", c.field_half_extent, path);
  detail::read(j, "map_scene_fraction", c.map_scene_fraction, path);
  detail::read(j, "map_width_min", c.map_width_min, path);
  detail::read(j, "map_width_max", c.map_width_max, path);
  detail::read(j, "start_clearance", c.start_clearance, path);
  detail::read(j, "inflation", c.inflation, path);
  detail::read(j, "max_drafts", c.max_drafts, path);
  if (c.stubs < 0 || !(c.stub_min > 0.0 && c.stub_min <= c.stub_max)) throw parameter_error("invalid scenario stubs");
  if (!(c.map_scene_fraction >= 0.0 && c.map_scene_fraction <= 1.0))
    throw parameter_error("scenario.map_scene_fraction must lie in [0, 1]");
  if (!(c.map_width_min >= 1.0 && c.map_width_min <= c.map_width_max)) throw parameter_error("invalid scenario map widths");
  if (c.inflation < 0 || c.max_drafts < 1) throw parameter_error("invalid scenario inflation or draft limit");
}

/// Accepts "default", "none" (fixed 4 m goals), or a list of
/// [last_episode, goal_distance] pairs.
inline CurriculumSchedule schedule_from_json(const Json& j, int total_episodes) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "default") return total_episodes == 1500 ? default_schedule() : scaled_schedule(total_episodes);
    if (name == "none") return fixed_schedule(4.0, total_episodes);
    throw parameter_error("schedule must be 'default', 'none' or a list of stages");
  }
  if (!j.is_array()) throw parameter_error("schedule must be 'default', 'none' or a list of stages");
  CurriculumSchedule s;
  for (const auto& st : j) {
    if (!st.is_array() || st.size() != 2 || !st[0].is_number_integer() || !st[1].is_number())
      throw parameter_error("schedule stages are [last_episode, goal_distance] pairs");
    s.stages.push_back({st[0].get<int>(), st[1].get<double>()});
  }
  s.total_episodes = s.stages.empty() ? 0 : s.stages.back().episode_threshold;
  s.validate();
  return s;
}

inline void from_json_section(const Json& j, ExplorationConfig& e, const std::string& path = "explore") {
  detail::reject_unknown(j, to_json(e), path);
  detail::read(j, "replan_period", e.replan_period, path);
  detail::read(j, "speed", e.speed, path);
  detail::read(j, "dt", e.dt, path);
  detail::read(j, "max_ticks", e.max_ticks, path);
  detail::read(j, "stuck_window", e.stuck_window, path);
  detail::read(j, "stuck_displacement", e.stuck_displacement, path);
  detail::read(j, "max_range", e.scan.max_range, path);
  detail::read(j, "noise_sigma", e.scan.noise_sigma, path);
  detail::read(j, "inflation", e.inflation, path);
  detail::read(j, "start_jitter", e.start_jitter, path);
  detail::read(j, "start_heading_jitter", e.start_heading_jitter, path);
  e.validate();
}

inline void from_json_section(const Json& j, AStarConfig& a, const std::string& path = "astar") {
  detail::reject_unknown(j, to_json(a), path);
  detail::read(j, "clearance_weight", a.clearance_weight, path);
  detail::read(j, "safe_distance", a.safe_distance, path);
  if (!(a.clearance_weight >= 0.0 && a.safe_distance >= 0.0)) throw parameter_error("A* weights must be >= 0");
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw format_error(e.what(), detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

}  // namespace mapless

#endif  // MAPLESS_CONFIG_HPP
