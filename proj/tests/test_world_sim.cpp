#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include <mapless/world_sim.hpp>

using namespace mapless;

namespace {

// Independent ray/segment intersection: solve origin + t*d = a + u*(b-a)
// by Cramer's rule on the 2x2 system.
double brute_force_raycast(const WorldMap& map, Vec2 o, double bearing, double max_range) {
  const double dx = std::cos(bearing), dy = std::sin(bearing);
  double best = INFINITY;
  for (const auto& s : map.segments) {
    const double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
    // [dx -ex; dy -ey] [t; u] = [ax - ox; ay - oy]
    const double det = dx * (-ey) - (-ex) * dy;
    if (det == 0.0) continue;
    const double rx = s.a.x - o.x, ry = s.a.y - o.y;
    const double t = (rx * (-ey) - (-ex) * ry) / det;
    const double u = (dx * ry - dy * rx) / det;
    if (t > 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  return best <= max_range ? best : INFINITY;
}

WorldMap random_map(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  WorldMap m;
  m.name = "random";
  m.bounds = {-10.0, -10.0, 10.0, 10.0};
  const int n = std::uniform_int_distribution<int>(1, 12)(rng);
  for (int i = 0; i < n; ++i) m.segments.push_back({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}});
  return m;
}

WorldMap single_wall() {
  WorldMap m;
  m.name = "wall";
  m.bounds = {-1.0, -2.0, 6.0, 2.0};
  m.segments = {{{5.0, -1.0}, {5.0, 1.0}}};
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mapless_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(LoadMap, OneSegment) {
  const auto path = temp_path("one.json");
  write_file(path, R"({"name": "one", "bounds": [-1, -1, 11, 1], "segments": [[0, 0, 10, 0]]})");
  const WorldMap m = load_map(path);
  ASSERT_EQ(m.segments.size(), 1u);
  EXPECT_EQ(m.segments[0].b, (Vec2{10.0, 0.0}));
  EXPECT_EQ(m.name, "one");
}

TEST(LoadMap, ZeroSegmentsIsValidationError) {
  const auto path = temp_path("empty.json");
  write_file(path, R"({"name": "empty", "bounds": [-1, -1, 11, 1], "segments": []})");
  EXPECT_THROW(load_map(path), validation_error);
}

TEST(LoadMap, SegmentOutsideBoundsNamesSegment) {
  const auto path = temp_path("outside.json");
  write_file(path, R"({"name": "o", "bounds": [0, 0, 1, 1], "segments": [[0, 0, 1, 1], [0, 0, 5, 0]]})");
  try {
    load_map(path);
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("segment 1"), std::string::npos) << e.what();
  }
}

TEST(LoadMap, SyntaxErrorReportsLine) {
  const auto path = temp_path("broken.json");
  write_file(path, "{\n  \"name\": \"b\",\n  \"bounds\": [0, 0, 1, 1],\n  \"segments\": [[0, 0, 1 1]]\n}\n");
  try {
    load_map(path);
    FAIL() << "expected format_error";
  } catch (const format_error& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(LoadMap, CorridorRoundTripIsBitIdentical) {
  const WorldMap m = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  const auto path = temp_path("corridor.json");
  save_map(m, path);
  const WorldMap back = load_map(path);
  EXPECT_EQ(back, m);
  const auto path2 = temp_path("tunnel.json");
  const WorldMap t = generate_map(MapKind::tunnel, 3, {2.0, 60.0});
  save_map(t, path2);
  EXPECT_EQ(load_map(path2), t);
}

TEST(GenerateMap, CorridorHasFourSegments) {
  const WorldMap m = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  EXPECT_EQ(m.segments.size(), 4u);
  EXPECT_NO_THROW(validate(m));
}

TEST(GenerateMap, BoundaryWalksAreClosed) {
  // Every vertex must be shared by exactly two segment endpoints, so walking
  // from any segment returns to its start.
  for (MapKind kind : {MapKind::corridor, MapKind::l_shape, MapKind::y_junction, MapKind::tunnel}) {
    const WorldMap m = generate_map(kind, 4, {2.0, 20.0});
    if (kind == MapKind::l_shape) EXPECT_EQ(m.segments.size(), 6u);
    std::vector<bool> used(m.segments.size(), false);
    Vec2 at = m.segments[0].b;
    used[0] = true;
    std::size_t walked = 1;
    while (!(at == m.segments[0].a)) {
      bool moved = false;
      for (std::size_t i = 0; i < m.segments.size() && !moved; ++i) {
        if (used[i]) continue;
        if (norm(m.segments[i].a - at) < 1e-9) { at = m.segments[i].b; moved = true; }
        else if (norm(m.segments[i].b - at) < 1e-9) { at = m.segments[i].a; moved = true; }
        if (moved) used[i] = true;
      }
      ASSERT_TRUE(moved) << to_string(kind) << ": boundary walk dead-ends";
      ++walked;
      if (norm(at - m.segments[0].a) < 1e-9) break;
    }
    EXPECT_EQ(walked, m.segments.size()) << to_string(kind);
  }
}

TEST(GenerateMap, DeterministicAndValidated) {
  EXPECT_EQ(generate_map(MapKind::tunnel, 9, {2.0, 100.0}), generate_map(MapKind::tunnel, 9, {2.0, 100.0}));
  EXPECT_NE(generate_map(MapKind::tunnel, 9, {2.0, 100.0}), generate_map(MapKind::tunnel, 10, {2.0, 100.0}));
  EXPECT_THROW(generate_map(MapKind::corridor, 0, {0.9, 50.0}), parameter_error);
  EXPECT_THROW(generate_map(MapKind::corridor, 0, {2.0, 0.0}), parameter_error);
}

TEST(Raycast, PerpendicularHitAndParallelMiss) {
  const WorldMap m = single_wall();
  EXPECT_DOUBLE_EQ(raycast(m, {0, 0}, 0.0, 20.0), 5.0);
  EXPECT_TRUE(std::isinf(raycast(m, {0, 0}, kPi / 2, 20.0)));
  EXPECT_TRUE(std::isinf(raycast(m, {0, 0}, 0.0, 4.0)));
}

TEST(Raycast, MatchesBruteForceOnRandomCases) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-9.0, 9.0), angle(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const WorldMap m = random_map(rng);
    const Vec2 o{coord(rng), coord(rng)};
    const double b = angle(rng);
    const double got = raycast(m, o, b, 20.0), want = brute_force_raycast(m, o, b, 20.0);
    if (std::isinf(want)) {
      EXPECT_TRUE(std::isinf(got)) << i;
    } else {
      EXPECT_NEAR(got, want, 1e-9) << i;
    }
  }
}

TEST(Raycast, SymmetryBetweenEndpoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec2 a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)};
    const Vec2 mid = (a + b) * 0.5, dir = b - a;
    const Vec2 perp = Vec2{-dir.y, dir.x} * (1.0 / norm(dir));
    WorldMap m;
    m.bounds = {-10, -10, 10, 10};
    m.segments = {{mid - perp, mid + perp}};
    const double ab = raycast(m, a, std::atan2(dir.y, dir.x), 50.0);
    const double ba = raycast(m, b, std::atan2(-dir.y, -dir.x), 50.0);
    if (std::isinf(ab) || std::isinf(ba)) continue;
    EXPECT_NEAR(ab + ba, norm(dir), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(Scan, SquareRoomGeometry) {
  WorldMap room;
  room.bounds = {-5, -5, 5, 5};
  room.segments = {{{-5, -5}, {5, -5}}, {{5, -5}, {5, 5}}, {{5, 5}, {-5, 5}}, {{-5, 5}, {-5, -5}}};
  const Pose2D pose{0.0, 0.0, 0.3};
  const LidarScan s = scan(room, pose);
  for (int i = 0; i < kBeamCount; ++i) {
    const double r = s.ranges[static_cast<std::size_t>(i)];
    ASSERT_TRUE(std::isfinite(r));
    EXPECT_GE(r, 5.0 - 1e-9);
    EXPECT_LE(r, 5.0 * std::sqrt(2.0) + 1e-9);
    // per-beam oracle: distance to the square along the beam direction
    const double b = pose.psi + beam_offset(i);
    const double want = 5.0 / std::max(std::abs(std::cos(b)), std::abs(std::sin(b)));
    EXPECT_NEAR(r, want, 1e-9);
  }
}

TEST(Scan, BeamGeometryAndEmptyMap) {
  EXPECT_DOUBLE_EQ(beam_offset(0), -0.75 * kPi);
  EXPECT_DOUBLE_EQ(beam_offset(kBeamCount - 1), 0.75 * kPi);
  WorldMap far;
  far.bounds = {-100, -100, 100, 100};
  far.segments = {{{90, 90}, {95, 95}}};
  const LidarScan s = scan(far, {0, 0, 0});
  for (double r : s.ranges) EXPECT_TRUE(std::isinf(r));
  EXPECT_EQ(s.ranges.size(), static_cast<std::size_t>(kBeamCount));
}

TEST(Scan, DeterministicWithoutNoiseAndOutsideBoundsThrows) {
  const WorldMap m = generate_map(MapKind::l_shape, 0, {2.0, 20.0});
  const Pose2D p = *m.start;
  const LidarScan a = scan(m, p), b = scan(m, p);
  EXPECT_EQ(a.ranges, b.ranges);
  EXPECT_THROW(scan(m, {1e6, 0, 0}), state_error);
  std::mt19937_64 rng(1);
  const LidarScan noisy = scan(m, p, {20.0, 0.02}, &rng);
  EXPECT_NE(noisy.ranges, a.ranges);
}

TEST(Kinematics, Examples) {
  Pose2D p = step_kinematics({0, 0, 0}, {1, 0}, 0.1);
  EXPECT_NEAR(p.x, 0.1, 1e-15);
  EXPECT_NEAR(p.y, 0.0, 1e-15);
  EXPECT_NEAR(p.psi, 0.0, 1e-15);
  p = step_kinematics({0, 0, 0}, {0, 1}, 0.1);
  EXPECT_NEAR(p.x, 0.0, 1e-15);
  EXPECT_NEAR(p.y, 0.1, 1e-15);
  EXPECT_NEAR(p.psi, kPi / 2, 1e-15);
  // rotation-matrix oracle: [cos -sin; sin cos] * (1, 0) at psi = pi/2
  p = step_kinematics({0, 0, kPi / 2}, {1, 0}, 0.1);
  EXPECT_NEAR(p.x, 0.1 * (std::cos(kPi / 2) * 1 - std::sin(kPi / 2) * 0), 1e-15);
  EXPECT_NEAR(p.y, 0.1 * (std::sin(kPi / 2) * 1 + std::cos(kPi / 2) * 0), 1e-15);
  EXPECT_NEAR(p.psi, kPi / 2, 1e-15);
  EXPECT_EQ(step_kinematics({1, 2, 0.5}, {0, 0}, 0.1), (Pose2D{1, 2, 0.5}));
  EXPECT_THROW(step_kinematics({}, {1, 0}, 0.0), contract_error);
}

TEST(Kinematics, PreservesSpeedAndNormalizesHeading) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), a(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D p{u(rng), u(rng), normalize_angle(a(rng))};
    const Vec2 v{u(rng), u(rng)};
    const double dt = 0.05 + std::abs(u(rng));
    const Pose2D q = step_kinematics(p, v, dt);
    EXPECT_NEAR(norm(q.position() - p.position()) / dt, norm(v), 1e-12);
    EXPECT_GT(q.psi, -kPi);
    EXPECT_LE(q.psi, kPi);
  }
}

TEST(Collision, Examples) {
  const WorldMap m = single_wall();
  EXPECT_FALSE(check_collision(m, {0.0, 0.0, 0.0}, 0.3));
  EXPECT_TRUE(check_collision(m, {4.9, 0.0, 0.0}, 0.3));
  EXPECT_THROW(check_collision(m, {0, 0, 0}, 0.0), parameter_error);
}

TEST(Collision, MatchesBruteForceDistance) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coord(-9.0, 9.0);
  for (int i = 0; i < 1000; ++i) {
    const WorldMap m = random_map(rng);
    const Vec2 p{coord(rng), coord(rng)};
    // projection onto each segment, clamped to its endpoints
    double best = INFINITY;
    for (const auto& s : m.segments) {
      const Vec2 d = s.b - s.a;
      const double t = std::clamp(((p.x - s.a.x) * d.x + (p.y - s.a.y) * d.y) / (d.x * d.x + d.y * d.y), 0.0, 1.0);
      best = std::min(best, std::hypot(p.x - (s.a.x + t * d.x), p.y - (s.a.y + t * d.y)));
    }
    const double r = 0.3 + 0.5 * (i % 5);
    EXPECT_EQ(check_collision(m, {p.x, p.y, 0.0}, r), best < r) << i;
  }
}
