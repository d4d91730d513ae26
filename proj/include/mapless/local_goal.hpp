#ifndef MAPLESS_LOCAL_GOAL_HPP
#define MAPLESS_LOCAL_GOAL_HPP

#include <array>
#include <cmath>
#include <cstdint>

#include "errors.hpp"
#include "geometry.hpp"
#include "world_sim.hpp"

namespace mapless {

inline constexpr int kSampleCount = 48;
inline constexpr int kSampleStride = 30;

struct ScanSample {
  int beam_index = 0;
  double sigma = kInf;           // measured range, meters or +inf
  double bearing_offset = 0.0;   // relative to heading, radians
};

/// 48 evenly spaced beams of a scan, indices 0, 30, ..., 1410.
struct SampledScan {
  std::array<ScanSample, kSampleCount> samples{};
};

inline SampledScan subsample(const LidarScan& scan) {
  SampledScan out;
  for (int j = 0; j < kSampleCount; ++j) {
    const int beam = j * kSampleStride;
    out.samples[static_cast<std::size_t>(j)] = {beam, scan.ranges[static_cast<std::size_t>(beam)], beam_offset(beam)};
  }
  return out;
}

enum class GoalMode : std::uint8_t {
  mean_index,  // mean index of the open-space candidates
  argmax,      // beam with the largest thresholded distance
};

struct GoalSelectionConfig {
  double d_th = 4.0;     // candidate threshold, meters
  double w_psi = 0.2;    // perpendicularity weight scale, meters
  double far_cap = 4.0;  // goal distance for open beams
  double mid_cap = 3.0;  // goal distance for beams in [mid_cap, d_th)
  GoalMode mode = GoalMode::mean_index;

  void validate() const {
    if (!(mid_cap <= d_th)) throw parameter_error("goal selection: mid_cap must not exceed d_th");
    if (!(w_psi >= 0.0 && w_psi < mid_cap)) throw parameter_error("goal selection: w_psi must lie in [0, mid_cap)");
    if (!(far_cap >= mid_cap)) throw parameter_error("goal selection: far_cap must be at least mid_cap");
  }
};

/// Deduction applied to capped distances. Largest straight ahead and behind,
/// zero for beams perpendicular to the heading.
inline double perpendicularity_weight(double bearing_offset, const GoalSelectionConfig& config) {
  return config.w_psi * std::abs(std::cos(bearing_offset));
}

/// Piecewise distance cap. The open-space branch wins at sigma == d_th.
inline double threshold(double sigma, const GoalSelectionConfig& config, double weight) {
  if (std::isinf(sigma) || sigma >= config.d_th) return config.far_cap - weight;
  if (sigma >= config.mid_cap) return config.mid_cap - weight;
  return sigma;
}

inline bool is_candidate(double sigma, const GoalSelectionConfig& config) {
  return std::isinf(sigma) || sigma >= config.d_th;
}

struct LocalGoal {
  Vec2 body_frame;
  Vec2 world_frame;
  int chosen_index = 0;  // sample index, 0..47
  double distance = 0.0;
  double bearing_offset = 0.0;
};

inline LocalGoal select_local_goal(const SampledScan& sampled, const Pose2D& pose, const GoalSelectionConfig& config) {
  std::array<double, kSampleCount> capped{};
  for (int k = 0; k < kSampleCount; ++k) {
    const auto& s = sampled.samples[static_cast<std::size_t>(k)];
    capped[static_cast<std::size_t>(k)] = threshold(s.sigma, config, perpendicularity_weight(s.bearing_offset, config));
  }

  auto argmax_capped = [&] {
    int best = 0;
    for (int k = 1; k < kSampleCount; ++k)
      if (capped[static_cast<std::size_t>(k)] > capped[static_cast<std::size_t>(best)]) best = k;
    return best;
  };

  int chosen = 0;
  if (config.mode == GoalMode::mean_index) {
    long sum = 0, count = 0;
    for (int k = 0; k < kSampleCount; ++k)
      if (is_candidate(sampled.samples[static_cast<std::size_t>(k)].sigma, config)) {
        sum += k;
        ++count;
      }
    if (count == 0) {
      chosen = argmax_capped();
    } else {
      // round(sum / count), exact halves go to the smaller index
      const long lo = sum / count;
      chosen = static_cast<int>(2 * (sum - lo * count) > count ? lo + 1 : lo);
    }
  } else {
    chosen = argmax_capped();
  }

  const auto& s = sampled.samples[static_cast<std::size_t>(chosen)];
  LocalGoal goal;
  goal.chosen_index = chosen;
  goal.distance = capped[static_cast<std::size_t>(chosen)];
  goal.bearing_offset = s.bearing_offset;
  goal.body_frame = Vec2{std::cos(s.bearing_offset), std::sin(s.bearing_offset)} * goal.distance;
  goal.world_frame = pose.position() + rotate(goal.body_frame, pose.psi);
  return goal;
}

}  // namespace mapless

#endif  // MAPLESS_LOCAL_GOAL_HPP
