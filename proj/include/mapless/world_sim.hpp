#ifndef MAPLESS_WORLD_SIM_HPP
#define MAPLESS_WORLD_SIM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "geometry.hpp"

namespace mapless {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr int kBeamCount = 1440;
inline constexpr double kLidarFov = 1.5 * kPi;  // 270 degrees
inline constexpr double kDefaultMaxRange = 20.0;
inline constexpr double kVehicleRadius = 0.3;

/// Vector environment the LiDAR raycasts against.
///
/// Besides the wall segments a map may carry mission metadata used by the
/// explorer: a start pose, goal regions, and a traversal distance after which
/// a mission counts as complete.
struct WorldMap {
  std::string name;
  Bounds bounds;
  std::vector<Segment> segments;

  std::optional<Pose2D> start;
  std::vector<Bounds> goal_regions;
  std::optional<double> target_distance;

  bool operator==(const WorldMap&) const = default;
};

/// Throws validation_error naming the first offending segment.
inline void validate(const WorldMap& map) {
  if (!(map.bounds.xmin < map.bounds.xmax && map.bounds.ymin < map.bounds.ymax))
    throw validation_error("map '" + map.name + "': bounds are empty or inverted");
  if (map.segments.empty()) throw validation_error("map '" + map.name + "': no segments");
  for (std::size_t i = 0; i < map.segments.size(); ++i) {
    const Segment& s = map.segments[i];
    for (Vec2 p : {s.a, s.b}) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !map.bounds.contains(p)) {
        std::ostringstream msg;
        msg << "map '" << map.name << "': segment " << i << " (" << s.a.x << "," << s.a.y << ")-(" << s.b.x
            << "," << s.b.y << ") has an endpoint outside bounds";
        throw validation_error(msg.str());
      }
    }
  }
  if (map.start && !map.bounds.contains(map.start->position()))
    throw validation_error("map '" + map.name + "': start pose outside bounds");
}

// ---------------------------------------------------------------------------
// Map file I/O

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline int line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 1 : line_of_offset(text, pos);
}

inline std::vector<double> numbers(const nlohmann::json& j, std::size_t n, std::string_view text,
                                   std::string_view key) {
  if (!j.is_array() || j.size() != n)
    throw format_error("'" + std::string(key) + "' must be an array of " + std::to_string(n) + " numbers",
                       line_of_key(text, key));
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number())
      throw format_error("'" + std::string(key) + "' contains a non-number", line_of_key(text, key));
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const WorldMap& map) {
  nlohmann::json j;
  j["name"] = map.name;
  j["bounds"] = {map.bounds.xmin, map.bounds.ymin, map.bounds.xmax, map.bounds.ymax};
  auto segs = nlohmann::json::array();
  for (const auto& s : map.segments) segs.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  j["segments"] = std::move(segs);
  if (map.start) j["start"] = {map.start->x, map.start->y, map.start->psi};
  if (!map.goal_regions.empty()) {
    auto regions = nlohmann::json::array();
    for (const auto& r : map.goal_regions) regions.push_back({r.xmin, r.ymin, r.xmax, r.ymax});
    j["goal_regions"] = std::move(regions);
  }
  if (map.target_distance) j["target_distance"] = *map.target_distance;
  return j;
}

/// Parses the JSON map format. Format problems raise format_error with a
/// line number, invariant violations raise validation_error.
inline WorldMap parse_map(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error(e.what(), detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!j.is_object()) throw format_error("map must be a JSON object", 1);
  for (const char* key : {"name", "bounds", "segments"})
    if (!j.contains(key)) throw format_error(std::string("missing key '") + key + "'", 1);
  if (!j["name"].is_string()) throw format_error("'name' must be a string", detail::line_of_key(text, "name"));

  WorldMap map;
  map.name = j["name"].get<std::string>();
  const auto b = detail::numbers(j["bounds"], 4, text, "bounds");
  map.bounds = {b[0], b[1], b[2], b[3]};
  if (!j["segments"].is_array())
    throw format_error("'segments' must be an array", detail::line_of_key(text, "segments"));
  for (const auto& s : j["segments"]) {
    const auto v = detail::numbers(s, 4, text, "segments");
    map.segments.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  if (j.contains("start")) {
    const auto v = detail::numbers(j["start"], 3, text, "start");
    map.start = Pose2D{v[0], v[1], normalize_angle(v[2])};
  }
  if (j.contains("goal_regions")) {
    if (!j["goal_regions"].is_array())
      throw format_error("'goal_regions' must be an array", detail::line_of_key(text, "goal_regions"));
    for (const auto& r : j["goal_regions"]) {
      const auto v = detail::numbers(r, 4, text, "goal_regions");
      map.goal_regions.push_back({v[0], v[1], v[2], v[3]});
    }
  }
  if (j.contains("target_distance")) {
    if (!j["target_distance"].is_number())
      throw format_error("'target_distance' must be a number", detail::line_of_key(text, "target_distance"));
    map.target_distance = j["target_distance"].get<double>();
  }
  validate(map);
  return map;
}

inline WorldMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

inline void save_map(const WorldMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write map file '" + path + "'");
  out << to_json(map).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Generators

enum class MapKind { corridor, l_shape, y_junction, tunnel };

inline std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::corridor: return "corridor";
    case MapKind::l_shape: return "l_shape";
    case MapKind::y_junction: return "y_junction";
    case MapKind::tunnel: return "tunnel";
  }
  return "?";
}

inline MapKind parse_map_kind(std::string_view s) {
  if (s == "corridor") return MapKind::corridor;
  if (s == "l_shape") return MapKind::l_shape;
  if (s == "y_junction") return MapKind::y_junction;
  if (s == "tunnel") return MapKind::tunnel;
  throw parameter_error("unknown map kind '" + std::string(s) + "'");
}

struct MapParams {
  double width = 2.0;    // corridor width, meters
  double length = 50.0;  // corridor length / arm length / tunnel centerline length, meters
};

namespace detail {

inline std::vector<Segment> closed_polygon(const std::vector<Vec2>& v) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < v.size(); ++i) segs.push_back({v[i], v[(i + 1) % v.size()]});
  return segs;
}

inline Bounds padded_bbox(const std::vector<Segment>& segs, double pad) {
  Bounds b{kInf, kInf, -kInf, -kInf};
  for (const auto& s : segs)
    for (Vec2 p : {s.a, s.b}) {
      b.xmin = std::min(b.xmin, p.x);
      b.ymin = std::min(b.ymin, p.y);
      b.xmax = std::max(b.xmax, p.x);
      b.ymax = std::max(b.ymax, p.y);
    }
  return {b.xmin - pad, b.ymin - pad, b.xmax + pad, b.ymax + pad};
}

inline Bounds box_around(Vec2 c, double half) { return {c.x - half, c.y - half, c.x + half, c.y + half}; }

// Intersection of the lines p + t*d and q + s*e (assumed non-parallel).
inline Vec2 line_intersection(Vec2 p, Vec2 d, Vec2 q, Vec2 e) {
  const double t = cross(q - p, e) / cross(d, e);
  return p + d * t;
}

// Terminal regions span the last stretch of each dead end: within the goal
// horizon of an end wall no beam is open and local goals degrade.
inline constexpr double kGoalRegionDepth = 4.0;

inline WorldMap make_corridor(double w, double len) {
  const double h = w / 2.0;
  WorldMap m;
  m.segments = closed_polygon({{0.0, -h}, {len, -h}, {len, h}, {0.0, h}});
  m.start = Pose2D{1.0, 0.0, 0.0};
  m.goal_regions = {{len - kGoalRegionDepth, -h, len, h}};
  return m;
}

// Corridor along +x for `arm` meters, then a left turn running `arm` meters along +y.
inline WorldMap make_l_shape(double w, double arm) {
  const double h = w / 2.0;
  WorldMap m;
  m.segments = closed_polygon({{0.0, -h}, {arm + h, -h}, {arm + h, arm}, {arm - h, arm}, {arm - h, h}, {0.0, h}});
  m.start = Pose2D{1.0, 0.0, 0.0};
  m.goal_regions = {{arm - h, arm - kGoalRegionDepth, arm + h, arm}};
  return m;
}

// Stem along +x, then two arms splitting at +-40 degrees.
inline WorldMap make_y_junction(double w, double arm) {
  const double h = w / 2.0;
  const double angle = 40.0 * kPi / 180.0;
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 junction{arm, 0.0};
  const Vec2 up{c, s}, down{c, -s};
  const Vec2 outer_down{-s, -c};  // outward normal of the lower arm
  const Vec2 outer_up{-s, c};

  const Vec2 p1 = line_intersection({0.0, -h}, {1.0, 0.0}, junction + outer_down * h, down);
  const Vec2 p2 = junction + outer_down * h + down * arm;
  const Vec2 p3 = junction - outer_down * h + down * arm;
  const Vec2 crotch = line_intersection(junction - outer_down * h, down, junction - outer_up * h, up);
  const Vec2 p5 = junction - outer_up * h + up * arm;
  const Vec2 p6 = junction + outer_up * h + up * arm;
  const Vec2 p7 = line_intersection({0.0, h}, {1.0, 0.0}, junction + outer_up * h, up);

  WorldMap m;
  m.segments = closed_polygon({{0.0, -h}, p1, p2, p3, crotch, p5, p6, p7, {0.0, h}});
  m.start = Pose2D{1.0, 0.0, 0.0};
  m.goal_regions = {box_around(junction + up * (arm - 2.5), 1.5 * h), box_around(junction + down * (arm - 2.5), 1.5 * h)};
  return m;
}

// Winding tunnel: a seeded polyline centerline offset by +-w/2 with mitered joints.
inline WorldMap make_tunnel(double w, double len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> seg_len(8.0, 14.0);
  std::uniform_real_distribution<double> turn(-30.0 * kPi / 180.0, 30.0 * kPi / 180.0);
  const double max_heading = 55.0 * kPi / 180.0;

  std::vector<Vec2> center{{0.0, 0.0}};
  double heading = 0.0, total = 0.0;
  while (total < len) {
    const double l = std::min(seg_len(rng), len - total);
    if (center.size() > 1) heading = std::clamp(heading + turn(rng), -max_heading, max_heading);
    center.push_back(center.back() + Vec2{std::cos(heading), std::sin(heading)} * l);
    total += l;
    if (len - total < 2.0) break;  // avoid a stub final piece
  }

  const double h = w / 2.0;
  std::vector<Vec2> left, right;
  for (std::size_t i = 0; i < center.size(); ++i) {
    Vec2 dir_in, dir_out;
    if (i == 0) dir_in = dir_out = center[1] - center[0];
    else if (i + 1 == center.size()) dir_in = dir_out = center[i] - center[i - 1];
    else {
      dir_in = center[i] - center[i - 1];
      dir_out = center[i + 1] - center[i];
    }
    dir_in = dir_in * (1.0 / norm(dir_in));
    dir_out = dir_out * (1.0 / norm(dir_out));
    const Vec2 n_in{-dir_in.y, dir_in.x}, n_out{-dir_out.y, dir_out.x};
    if (i == 0 || i + 1 == center.size()) {
      left.push_back(center[i] + n_in * h);
      right.push_back(center[i] - n_in * h);
    } else {
      left.push_back(line_intersection(center[i] + n_in * h, dir_in, center[i] + n_out * h, dir_out));
      right.push_back(line_intersection(center[i] - n_in * h, dir_in, center[i] - n_out * h, dir_out));
    }
  }

  std::vector<Vec2> poly(right.begin(), right.end());
  poly.insert(poly.end(), left.rbegin(), left.rend());
  WorldMap m;
  m.segments = closed_polygon(poly);
  const Vec2 d0 = center[1] - center[0];
  m.start = Pose2D{1.0 * d0.x / norm(d0), 1.0 * d0.y / norm(d0), std::atan2(d0.y, d0.x)};
  const Vec2 last = center.back(), prev = center[center.size() - 2];
  const Vec2 end_dir = (last - prev) * (1.0 / norm(last - prev));
  m.goal_regions = {box_around(last - end_dir * 2.5, 1.5 * h)};
  m.target_distance = 200.0;
  return m;
}

}  // namespace detail

/// Deterministic map generator. Only the tunnel depends on the seed; the
/// other kinds are fixed shapes parameterized by width and length.
inline WorldMap generate_map(MapKind kind, std::uint64_t seed, const MapParams& params) {
  if (!(params.width >= 1.0)) throw parameter_error("map width must be at least 1.0 m");
  if (!(params.length > 0.0)) throw parameter_error("map length must be positive");
  if (kind == MapKind::tunnel && params.length < 10.0) throw parameter_error("tunnel length must be at least 10 m");
  if ((kind == MapKind::l_shape || kind == MapKind::y_junction) && params.length < 2.0 * params.width)
    throw parameter_error("arm length must be at least twice the width");

  WorldMap m;
  switch (kind) {
    case MapKind::corridor: m = detail::make_corridor(params.width, params.length); break;
    case MapKind::l_shape: m = detail::make_l_shape(params.width, params.length); break;
    case MapKind::y_junction: m = detail::make_y_junction(params.width, params.length); break;
    case MapKind::tunnel: m = detail::make_tunnel(params.width, params.length, seed); break;
  }
  m.name = std::string(to_string(kind));
  m.bounds = detail::padded_bbox(m.segments, 1.0);
  validate(m);
  return m;
}

// ---------------------------------------------------------------------------
// Sensing

/// Distance along the ray to the nearest segment crossing, or +inf when
/// nothing is hit within max_range. Parallel (including collinear) segments
/// are never hit.
inline double raycast(const WorldMap& map, Vec2 origin, double bearing, double max_range) {
  const Vec2 d{std::cos(bearing), std::sin(bearing)};
  double best = kInf;
  for (const Segment& s : map.segments) {
    const Vec2 e = s.b - s.a;
    const double denom = cross(d, e);
    if (denom == 0.0) continue;
    const Vec2 ao = s.a - origin;
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, d) / denom;
    if (t > 0.0 && u >= 0.0 && u <= 1.0 && t < best) best = t;
  }
  return best <= max_range ? best : kInf;
}

struct LidarScan {
  std::array<double, kBeamCount> ranges{};
  double fov = kLidarFov;
  double max_range = kDefaultMaxRange;
  Pose2D pose;
};

/// Bearing of beam i relative to the heading. Beam 0 is the rightmost
/// (-135 deg), beams advance counterclockwise.
inline double beam_offset(int i) {
  return (static_cast<double>(i) / (kBeamCount - 1)) * kLidarFov - kLidarFov / 2.0;
}

struct ScanConfig {
  double max_range = kDefaultMaxRange;
  double noise_sigma = 0.0;  // Gaussian range noise, meters; 0 disables
};

inline LidarScan scan(const WorldMap& map, const Pose2D& pose, const ScanConfig& config = {},
                      std::mt19937_64* noise_rng = nullptr) {
  if (!map.bounds.contains(pose.position())) throw state_error("scan pose lies outside the map bounds");
  if (config.noise_sigma > 0.0 && noise_rng == nullptr)
    throw parameter_error("range noise requested without a random generator");

  LidarScan out;
  out.max_range = config.max_range;
  out.pose = pose;
  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  for (int i = 0; i < kBeamCount; ++i) {
    double r = raycast(map, pose.position(), pose.psi + beam_offset(i), config.max_range);
    if (config.noise_sigma > 0.0 && std::isfinite(r)) r = std::clamp(r + noise(*noise_rng), 1e-6, config.max_range);
    out.ranges[static_cast<std::size_t>(i)] = r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Motion and collision

/// Integrates a body-frame velocity command. The heading turns to the
/// direction of motion whenever the command is non-zero.
inline Pose2D step_kinematics(const Pose2D& pose, Vec2 velocity_body, double dt) {
  if (!(dt > 0.0)) throw contract_error("step_kinematics requires dt > 0");
  const Vec2 v_world = rotate(velocity_body, pose.psi);
  Pose2D next{pose.x + v_world.x * dt, pose.y + v_world.y * dt, pose.psi};
  if (velocity_body.x != 0.0 || velocity_body.y != 0.0) next.psi = normalize_angle(std::atan2(v_world.y, v_world.x));
  return next;
}

inline double clearance(const WorldMap& map, Vec2 p) {
  double best = kInf;
  for (const auto& s : map.segments) best = std::min(best, point_segment_distance(p, s));
  return best;
}

inline bool check_collision(const WorldMap& map, const Pose2D& pose, double radius = kVehicleRadius) {
  if (!(radius > 0.0)) throw parameter_error("collision radius must be positive");
  return clearance(map, pose.position()) < radius;
}

}  // namespace mapless

#endif  // MAPLESS_WORLD_SIM_HPP
