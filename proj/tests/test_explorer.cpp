#include <cmath>

#include <gtest/gtest.h>

#include <mapless/explorer.hpp>
#include <mapless/goal_seeking_params.hpp>

using namespace mapless;

TEST(ActionToVelocity, WorldDirectionsInBodyFrame) {
  const double s = 0.5;
  Vec2 v = action_to_velocity(Action::E, {0, 0, 0}, s);
  EXPECT_NEAR(v.x, s, 1e-12);
  EXPECT_NEAR(v.y, 0.0, 1e-12);
  v = action_to_velocity(Action::NE, {0, 0, 0}, s);
  EXPECT_NEAR(v.x, s / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(v.y, s / std::sqrt(2.0), 1e-12);
  v = action_to_velocity(Action::E, {0, 0, kPi / 2}, s);
  EXPECT_NEAR(v.x, 0.0, 1e-12);
  EXPECT_NEAR(v.y, -s, 1e-12);
  for (int a = 0; a < kActionCount; ++a)
    EXPECT_NEAR(norm(action_to_velocity(action_from_index(a), {1, 2, 0.7}, s)), s, 1e-12);
  EXPECT_THROW(action_to_velocity(Action::N, {0, 0, 0}, 0.0), parameter_error);
}

TEST(Exploration, GoalSeekingCompletesCorridor) {
  const WorldMap map = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  const ExplorationConfig cfg;
  int callbacks = 0;
  const ExplorationResult r = run_exploration(map, goal_seeking_params<float>(), cfg, 1,
                                              [&](int i, int, const AgentGround&) { EXPECT_EQ(i, callbacks++); });
  EXPECT_EQ(r.outcome, MissionOutcome::completed) << to_string(r.outcome);
  EXPECT_EQ(callbacks, r.replans);
  EXPECT_GE(r.min_clearance, kVehicleRadius);
  EXPECT_LE(r.distance, 1.2 * 50.0);
  EXPECT_EQ(r.log.rows.back().events.find("completed") != std::string::npos, true);
}

TEST(Exploration, LogInvariants) {
  const WorldMap map = generate_map(MapKind::l_shape, 0, {2.0, 20.0});
  ExplorationConfig cfg;
  cfg.max_ticks = 1500;
  const ExplorationResult r = run_exploration(map, goal_seeking_params<float>(), cfg, 3);
  ASSERT_FALSE(r.log.rows.empty());
  EXPECT_EQ(r.ticks, static_cast<int>(r.log.rows.size()));
  Vec2 prev = r.log.rows.front().pose.position();
  int replans = 0;
  for (std::size_t i = 0; i < r.log.rows.size(); ++i) {
    const TrajectoryRow& row = r.log.rows[i];
    EXPECT_EQ(row.tick, static_cast<int>(i));
    EXPECT_NEAR(row.time, (row.tick + 1) * cfg.dt, 1e-12);
    if (i > 0) EXPECT_LE(norm(row.pose.position() - prev), cfg.speed * cfg.dt + 1e-12);
    prev = row.pose.position();
    EXPECT_NEAR(norm(row.velocity), cfg.speed, 1e-12);
    if (row.events.find("replan") != std::string::npos) ++replans;
    if (row.events.find("collision") != std::string::npos) EXPECT_LT(row.clearance, kVehicleRadius);
    EXPECT_NEAR(row.clearance, clearance(map, row.pose.position()), 1e-12);
  }
  EXPECT_EQ(replans, r.replans);
  // fixed-period replans happen at least every replan_period ticks
  EXPECT_GE(r.replans, (r.ticks + cfg.replan_period - 1) / cfg.replan_period);
}

TEST(Exploration, DeterministicPerSeed) {
  const WorldMap map = generate_map(MapKind::y_junction, 0, {2.0, 20.0});
  ExplorationConfig cfg;
  cfg.max_ticks = 400;
  const auto params = goal_seeking_params<float>();
  const ExplorationResult a = run_exploration(map, params, cfg, 9), b = run_exploration(map, params, cfg, 9);
  ASSERT_EQ(a.log.rows.size(), b.log.rows.size());
  for (std::size_t i = 0; i < a.log.rows.size(); ++i) {
    EXPECT_EQ(a.log.rows[i].pose, b.log.rows[i].pose);
    EXPECT_EQ(a.log.rows[i].events, b.log.rows[i].events);
  }
  const ExplorationResult c = run_exploration(map, params, cfg, 10);
  EXPECT_FALSE(c.log.rows.front().pose == a.log.rows.front().pose);
}

TEST(Exploration, FirstTickMovesSpeedTimesDt) {
  WorldMap map = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  ExplorationConfig cfg;
  cfg.start_jitter = 0.0;
  cfg.start_heading_jitter = 0.0;
  cfg.max_ticks = 1;
  const ExplorationResult r = run_exploration(map, goal_seeking_params<float>(), cfg, 0);
  ASSERT_EQ(r.log.rows.size(), 1u);
  EXPECT_NEAR(norm(r.log.rows[0].pose.position() - map.start->position()), 0.05, 1e-12);
  EXPECT_EQ(r.outcome, MissionOutcome::step_limit);
}

TEST(Exploration, InvalidStartRejected) {
  WorldMap map = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  map.start.reset();
  EXPECT_THROW(run_exploration(map, goal_seeking_params<float>(), {}, 0), state_error);
  map = generate_map(MapKind::corridor, 0, {2.0, 50.0});
  map.start->y = map.segments.front().a.y;  // on a wall
  ExplorationConfig cfg;
  cfg.start_jitter = 0.0;
  EXPECT_THROW(run_exploration(map, goal_seeking_params<float>(), cfg, 0), state_error);
  cfg.replan_period = 0;
  EXPECT_THROW(run_exploration(generate_map(MapKind::corridor, 0, {2.0, 50.0}), goal_seeking_params<float>(), cfg, 0),
               parameter_error);
}
