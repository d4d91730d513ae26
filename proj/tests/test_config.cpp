#include <gtest/gtest.h>

#include <mapless/config.hpp>

using namespace mapless;

TEST(Config, SectionsRoundTrip) {
  A2CHyper h;
  h.learning_rate = 1e-5;
  h.entropy_coef = 0.02;
  A2CHyper back;
  from_json_section(to_json(h), back);
  EXPECT_EQ(back.learning_rate, 1e-5);
  EXPECT_EQ(back.entropy_coef, 0.02);
  EXPECT_EQ(back.gamma, h.gamma);

  ScenarioConfig sc;
  sc.stubs = 3;
  sc.map_scene_fraction = 0.25;
  ScenarioConfig sc_back;
  from_json_section(to_json(sc), sc_back);
  EXPECT_EQ(sc_back.stubs, 3);
  EXPECT_EQ(sc_back.map_scene_fraction, 0.25);

  GoalSelectionConfig g;
  g.mode = GoalMode::argmax;
  GoalSelectionConfig g_back;
  from_json_section(to_json(g), g_back);
  EXPECT_EQ(g_back.mode, GoalMode::argmax);

  ExplorationConfig e;
  e.replan_period = 5;
  e.scan.noise_sigma = 0.0;
  ExplorationConfig e_back;
  from_json_section(to_json(e), e_back);
  EXPECT_EQ(e_back.replan_period, 5);
  EXPECT_EQ(e_back.scan.noise_sigma, 0.0);
}

TEST(Config, PartialSectionKeepsDefaults) {
  A2CHyper h;
  from_json_section(Json{{"gamma", 0.9}}, h);
  EXPECT_EQ(h.gamma, 0.9);
  EXPECT_EQ(h.learning_rate, A2CHyper{}.learning_rate);
}

TEST(Config, UnknownKeyNamed) {
  A2CHyper h;
  try {
    from_json_section(Json{{"learning_rat", 0.1}}, h);
    FAIL() << "expected parameter_error";
  } catch (const parameter_error& e) {
    EXPECT_NE(std::string(e.what()).find("hyper.learning_rat"), std::string::npos) << e.what();
  }
}

TEST(Config, InvalidValuesRejected) {
  A2CHyper h;
  EXPECT_THROW(from_json_section(Json{{"gamma", 1.5}}, h), parameter_error);
  EXPECT_THROW(from_json_section(Json{{"learning_rate", "fast"}}, h), parameter_error);
  GoalSelectionConfig g;
  EXPECT_THROW(from_json_section(Json{{"mode", "nearest"}}, g), parameter_error);
  EpisodeConfig ep;
  EXPECT_THROW(from_json_section(Json{{"max_steps", 0}}, ep), parameter_error);
  EXPECT_THROW(from_json_section(Json::array(), ep), parameter_error);
}

TEST(Config, Schedules) {
  EXPECT_EQ(schedule_from_json("default", 1500), default_schedule());
  EXPECT_EQ(schedule_from_json("default", 30), scaled_schedule(30));
  EXPECT_EQ(schedule_from_json("none", 100), fixed_schedule(4.0, 100));
  const CurriculumSchedule s = schedule_from_json(Json::parse("[[10, 2.0], [20, 4.0]]"), 20);
  EXPECT_EQ(s.total_episodes, 20);
  EXPECT_DOUBLE_EQ(s.goal_distance(11), 4.0);
  EXPECT_THROW(schedule_from_json("fast", 10), parameter_error);
  EXPECT_THROW(schedule_from_json(Json::parse("[[10, 3.0], [20, 2.0]]"), 20), parameter_error);
  EXPECT_THROW(schedule_from_json(Json::parse("[[10]]"), 10), parameter_error);
}
