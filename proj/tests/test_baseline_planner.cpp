#include <cmath>
#include <queue>
#include <random>

#include <gtest/gtest.h>

#include <mapless/baseline_planner.hpp>

using namespace mapless;

namespace {

OccupancyGrid random_grid(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution occ(density);
  OccupancyGrid g(n);
  for (auto& c : g.cells) c = occ(rng);
  return g;
}

double brute_force_distance(const OccupancyGrid& g, Cell c) {
  double best = INFINITY;
  for (int r = 0; r < g.size; ++r)
    for (int k = 0; k < g.size; ++k)
      if (g.at({r, k})) best = std::min(best, std::sqrt(double((r - c.row) * (r - c.row) + (k - c.col) * (k - c.col))));
  return std::min(best, 200.0);
}

// Plain Dijkstra over king moves with the same cost model as the A* baseline.
double dijkstra(const OccupancyGrid& grid, const DistanceField& field, Cell s, Cell t, double lambda, double d_safe) {
  const int n = grid.size;
  std::vector<double> dist(static_cast<std::size_t>(n) * n, INFINITY);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(s.row * n + s.col)] = 0.0;
  pq.push({0.0, s.row * n + s.col});
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(i)]) continue;
    const int r = i / n, c = i % n;
    if (r == t.row && c == t.col) return d;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (!dr && !dc) continue;
        const int nr = r + dr, nc = c + dc;
        if (nr < 0 || nc < 0 || nr >= n || nc >= n || grid.at({nr, nc})) continue;
        const double step = (dr && dc) ? std::sqrt(2.0) : 1.0;
        const double nd = d + step + lambda * std::max(0.0, d_safe - field.at({nr, nc}));
        if (nd < dist[static_cast<std::size_t>(nr * n + nc)]) {
          dist[static_cast<std::size_t>(nr * n + nc)] = nd;
          pq.push({nd, nr * n + nc});
        }
      }
  }
  return INFINITY;
}

Cell random_free(std::mt19937_64& rng, const OccupancyGrid& g) {
  std::uniform_int_distribution<int> u(0, g.size - 1);
  while (true) {
    const Cell c{u(rng), u(rng)};
    if (!g.at(c)) return c;
  }
}

void expect_valid_path(const OccupancyGrid& g, const PlannedPath& p, Cell s, Cell t) {
  ASSERT_TRUE(p.found);
  ASSERT_FALSE(p.cells.empty());
  EXPECT_EQ(p.cells.front(), s);
  EXPECT_EQ(p.cells.back(), t);
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    EXPECT_FALSE(g.at(p.cells[i]));
    if (i > 0) EXPECT_EQ(chebyshev(p.cells[i - 1], p.cells[i]), 1);
  }
}

double mean_clearance(const DistanceField& f, const PlannedPath& p) {
  double s = 0.0;
  for (const Cell& c : p.cells) s += f.at(c);
  return s / static_cast<double>(p.cells.size());
}

LidarScan scan_of(const WorldMap& m, const Pose2D& pose) { return scan(m, pose); }

LocalGoal goal_ahead(const Pose2D& pose, double d) {
  LocalGoal g;
  g.distance = d;
  g.body_frame = {d, 0.0};
  g.world_frame = pose.position() + rotate(g.body_frame, pose.psi);
  return g;
}

}  // namespace

TEST(Esdf, Examples) {
  OccupancyGrid g;
  g.at({50, 50}) = 1;
  const DistanceField f = esdf(g);
  EXPECT_DOUBLE_EQ(f.at({50, 53}), 3.0);
  EXPECT_DOUBLE_EQ(f.at({50, 50}), 0.0);
  EXPECT_DOUBLE_EQ(f.at({53, 54}), 5.0);
  const DistanceField empty = esdf(OccupancyGrid{});
  for (double d : empty.distance) EXPECT_EQ(d, kDistanceCap);
}

TEST(Esdf, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(5, 60);
  std::uniform_real_distribution<double> density(0.0005, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const OccupancyGrid g = random_grid(rng, size(rng), density(rng));
    const DistanceField f = esdf(g);
    for (int r = 0; r < g.size; ++r)
      for (int c = 0; c < g.size; ++c) ASSERT_EQ(f.at({r, c}), brute_force_distance(g, {r, c})) << trial;
  }
}

TEST(Esdf, NeighborsDifferByAtMostSqrtTwo) {
  std::mt19937_64 rng(43);
  const OccupancyGrid g = random_grid(rng, 100, 0.01);
  const DistanceField f = esdf(g);
  for (int r = 0; r + 1 < 100; ++r)
    for (int c = 0; c + 1 < 100; ++c) {
      EXPECT_LE(std::abs(f.at({r, c}) - f.at({r + 1, c})), 1.0 + 1e-12);
      EXPECT_LE(std::abs(f.at({r, c}) - f.at({r + 1, c + 1})), std::sqrt(2.0) + 1e-12);
    }
}

TEST(AStar, EmptyGridStraightPath) {
  const OccupancyGrid g;
  const PlannedPath p = astar(g, esdf(g), {50, 50}, {50, 90}, {0.0, 3.0});
  expect_valid_path(g, p, {50, 50}, {50, 90});
  EXPECT_DOUBLE_EQ(p.cost, 40.0);
  EXPECT_EQ(p.cells.size(), 41u);
  for (const Cell& c : p.cells) EXPECT_EQ(c.row, 50);
  EXPECT_EQ(p.expansions, 41u);
}

TEST(AStar, WallWithSingleGap) {
  OccupancyGrid g;
  for (int r = 0; r < 100; ++r) g.at({r, 60}) = 1;
  g.at({17, 60}) = 0;
  const DistanceField f = esdf(g);
  const PlannedPath p = astar(g, f, {50, 50}, {50, 90}, {0.0, 3.0});
  expect_valid_path(g, p, {50, 50}, {50, 90});
  EXPECT_NE(std::find(p.cells.begin(), p.cells.end(), Cell{17, 60}), p.cells.end());
  EXPECT_NEAR(p.cost, dijkstra(g, f, {50, 50}, {50, 90}, 0.0, 3.0), 1e-9);

  g.at({17, 60}) = 1;
  EXPECT_FALSE(astar(g, esdf(g), {50, 50}, {50, 90}).found);
}

TEST(AStar, EqualsDijkstra) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> density(0.0, 0.35);
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const OccupancyGrid g = random_grid(rng, 100, density(rng));
    const DistanceField f = esdf(g);
    const Cell s = random_free(rng, g), t = random_free(rng, g);
    const double lambda = trial % 2 ? 0.0 : 1.0;
    const PlannedPath p = astar(g, f, s, t, {lambda, 3.0});
    const double want = dijkstra(g, f, s, t, lambda, 3.0);
    if (std::isinf(want)) {
      EXPECT_FALSE(p.found) << trial;
      continue;
    }
    ++feasible;
    expect_valid_path(g, p, s, t);
    EXPECT_NEAR(p.cost, want, 1e-9) << trial;
  }
  EXPECT_GT(feasible, 100);
}

TEST(AStar, ClearanceWeightKeepsAwayFromWalls) {
  // a corridor whose shortest line hugs the lower wall
  OccupancyGrid g;
  for (int c = 0; c < 100; ++c) {
    g.at({40, c}) = 1;
    g.at({60, c}) = 1;
  }
  const DistanceField f = esdf(g);
  const PlannedPath hug = astar(g, f, {58, 10}, {58, 90}, {0.0, 3.0});
  const PlannedPath safe = astar(g, f, {58, 10}, {58, 90}, {1.0, 3.0});
  expect_valid_path(g, safe, {58, 10}, {58, 90});
  EXPECT_GT(mean_clearance(f, safe), mean_clearance(f, hug));

  std::mt19937_64 rng(53);
  double sum_safe = 0.0, sum_hug = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const OccupancyGrid r = random_grid(rng, 100, 0.05);
    const DistanceField rf = esdf(r);
    const Cell s = random_free(rng, r), t = random_free(rng, r);
    const PlannedPath a = astar(r, rf, s, t, {0.0, 3.0}), b = astar(r, rf, s, t, {1.0, 3.0});
    if (!a.found) continue;
    sum_hug += mean_clearance(rf, a);
    sum_safe += mean_clearance(rf, b);
  }
  EXPECT_GE(sum_safe, sum_hug);
}

TEST(AStar, EndpointChecks) {
  OccupancyGrid g;
  g.at({1, 1}) = 1;
  const DistanceField f = esdf(g);
  EXPECT_THROW(astar(g, f, {1, 1}, {5, 5}), contract_error);
  EXPECT_THROW(astar(g, f, {0, 0}, {100, 5}), bounds_error);
}

TEST(PlanCostProbe, EmptyVersusCluttered) {
  WorldMap empty;
  empty.bounds = {-50, -50, 50, 50};
  empty.segments = {{{40, 40}, {41, 41}}};
  const Pose2D pose{0.0, 0.0, 0.0};
  const LocalGoal goal = goal_ahead(pose, 4.0);
  const PlanCostProbe a = plan_cost_probe(scan_of(empty, pose), pose, goal);
  ASSERT_TRUE(a.found);
  EXPECT_EQ(a.expansions, 41u);
  EXPECT_DOUBLE_EQ(a.cost, 40.0);

  WorldMap clutter = empty;
  clutter.segments.push_back({{2.0, -1.5}, {2.0, 1.5}});
  const PlanCostProbe b = plan_cost_probe(scan_of(clutter, pose), pose, goal);
  ASSERT_TRUE(b.found);
  EXPECT_GT(b.expansions, a.expansions);
  const PlanCostProbe c = plan_cost_probe(scan_of(clutter, pose), pose, goal);
  EXPECT_EQ(c.expansions, b.expansions);
  EXPECT_EQ(c.peak_open, b.peak_open);
  EXPECT_EQ(c.cost, b.cost);
}
