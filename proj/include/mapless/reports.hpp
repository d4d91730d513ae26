#ifndef MAPLESS_REPORTS_HPP
#define MAPLESS_REPORTS_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "compare.hpp"
#include "curriculum.hpp"

namespace mapless {

// CSV renderers. Numbers use %.9g (or %.17g where bit-exactness matters) so
// two runs with the same seed produce byte-identical files. Wall-clock
// columns can be dropped for such comparisons.

namespace detail {

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace detail

inline std::string training_csv(const TrainingMetrics& m, bool with_time = true) {
  std::ostringstream out;
  out << "episode,goal_distance,total_reward,steps,event,policy_loss,value_loss,entropy";
  out << (with_time ? ",wall_time_s\n" : "\n");
  for (const auto& r : m.rows) {
    out << detail::format("%d,%.3f,%.17g,%d,%s,%.17g,%.17g,%.17g", r.episode, r.goal_distance, r.total_reward, r.steps,
                          std::string(to_string(r.event)).c_str(), r.policy_loss, r.value_loss, r.entropy);
    if (with_time) out << detail::format(",%.6f", r.wall_time_s);
    out << '\n';
  }
  return out.str();
}

inline std::string eval_summary_csv(const EvalSummary& s, double goal_distance) {
  std::ostringstream out;
  out << "goal_distance,episodes,successes,success_rate,collision_rate,timeout_rate,mean_path_ratio\n";
  out << detail::format("%.3f,%d,%d,%.17g,%.17g,%.17g,%.17g\n", goal_distance, s.episodes, s.successes, s.success_rate,
                        s.collision_rate, s.timeout_rate, s.mean_path_ratio);
  return out.str();
}

inline std::string eval_episodes_csv(const std::vector<EvalEpisode>& eps) {
  std::ostringstream out;
  out << "index,scene,initial_distance,event,steps,path_cost,optimal_cost\n";
  for (const auto& e : eps)
    out << detail::format("%d,%s,%.17g,%s,%d,%.17g,%.17g\n", e.index, e.scene.c_str(), e.initial_distance,
                          std::string(to_string(e.event)).c_str(), e.steps, e.path_cost, e.optimal_cost);
  return out.str();
}

inline std::string compare_csv(const CompareSummary& c, bool with_time = true) {
  std::ostringstream out;
  out << "probe,x,y,psi,goal_x,goal_y,drl_action,baseline_found,baseline_cost,expansions,peak_open";
  out << (with_time ? ",drl_time_s,baseline_time_s\n" : "\n");
  for (const auto& r : c.rows) {
    out << detail::format("%d,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%d,%.17g,%zu,%zu", r.probe, r.pose.x, r.pose.y,
                          r.pose.psi, r.goal.x, r.goal.y, std::string(to_string(r.drl_action)).c_str(),
                          r.baseline_found ? 1 : 0, r.baseline_cost, r.expansions, r.peak_open);
    if (with_time) out << detail::format(",%.9f,%.9f", r.drl_time_s, r.baseline_time_s);
    out << '\n';
  }
  return out.str();
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace mapless

#endif  // MAPLESS_REPORTS_HPP
