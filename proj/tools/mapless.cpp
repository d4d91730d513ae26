// mapless: train, evaluate and fly the grid-world actor-critic planner.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <mapless/config.hpp>
#include <mapless/mapless.hpp>

#include "render.hpp"

namespace fs = std::filesystem;
using namespace mapless;

namespace {

Json default_config() {
  TrainConfig train;
  ScenarioGenerator gen;
  return {
      {"seed", 7},
      {"network", to_json(train.arch)},
      {"hyper", to_json(train.hyper)},
      {"episode", to_json(train.episode)},
      {"scenario", to_json(gen.config)},
      {"goal", to_json(gen.goal_selection)},
      {"train",
       {{"episodes", 1500},
        {"schedule", "default"},
        {"checkpoint_every", 100},
        {"head_init_scale", train.head_init_scale},
        {"scenario_seed", 1}}},
      {"eval", {{"episodes", 200}, {"distances", {2.0, 3.0, 4.0}}, {"scenario_seed", 1000003}, {"first_episode", 1}}},
      {"explore", to_json(ExplorationConfig{})},
      {"astar", to_json(AStarConfig{})},
      {"compare", {{"probes", 100}, {"min_clearance", 0.5}}},
  };
}

// Flag values are staged here and written into the config JSON after
// parsing, so only flags that were actually given override the file.
class Overrides {
public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& pointer, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    entries_.push_back([opt, value, pointer](Json& j) {
      if (opt->count() > 0) j[Json::json_pointer(pointer)] = *value;
    });
    return opt;
  }

  void apply(Json& j) const {
    for (const auto& e : entries_) e(j);
  }

private:
  std::vector<std::function<void(Json&)>> entries_;
};

struct Common {
  std::string config_path;
  std::string out_dir = "out";
};

void add_common(CLI::App* app, Common& c, Overrides& ov) {
  app->add_option("--config", c.config_path, "JSON config file (any subset of the resolved config keys)")
      ->check(CLI::ExistingFile);
  app->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  ov.add<std::uint64_t>(app, "--seed", "/seed", "Global seed");
}

Json resolve(const Common& c, const Overrides& ov) {
  Json cfg = default_config();
  if (!c.config_path.empty()) {
    const Json file = read_json_file(c.config_path);
    if (!file.is_object()) throw parameter_error("config file must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it)
      if (!cfg.contains(it.key())) throw parameter_error("unknown config key '" + it.key() + "'");
    cfg.merge_patch(file);
  }
  ov.apply(cfg);
  return cfg;
}

void write_config(const Json& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(cfg.dump(2) + "\n", (dir / "config.json").string());
}

TrainConfig train_config(const Json& cfg) {
  TrainConfig t;
  from_json_section(cfg.at("network"), t.arch);
  from_json_section(cfg.at("hyper"), t.hyper);
  from_json_section(cfg.at("episode"), t.episode);
  t.episode.gamma = t.hyper.gamma;
  t.seed = cfg.at("seed").get<std::uint64_t>();
  const Json& tr = cfg.at("train");
  t.checkpoint_every = tr.at("checkpoint_every").get<int>();
  t.head_init_scale = tr.at("head_init_scale").get<double>();
  return t;
}

ScenarioGenerator scenario_generator(const Json& cfg, std::uint64_t seed) {
  ScenarioGenerator g;
  g.seed = seed;
  from_json_section(cfg.at("scenario"), g.config);
  from_json_section(cfg.at("goal"), g.goal_selection);
  return g;
}

NetworkParams<float> load_policy(const std::string& weights, bool oracle, const Architecture& arch) {
  if (oracle) return goal_seeking_params<float>();
  if (weights.empty()) throw parameter_error("pass --weights FILE or --oracle");
  return load_params(weights, &arch);
}

WorldMap resolve_map(const std::string& path, const std::string& kind, std::uint64_t map_seed, double width,
                     double length) {
  if (!path.empty()) return load_map(path);
  if (kind.empty()) throw parameter_error("pass --map FILE or --kind NAME");
  const MapKind k = parse_map_kind(kind);
  MapParams p;
  p.width = width;
  p.length = length > 0.0 ? length : (k == MapKind::tunnel ? 240.0 : k == MapKind::corridor ? 50.0 : 20.0);
  return generate_map(k, map_seed, p);
}

std::string distance_tag(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fm", d);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_train(const Json& cfg, const fs::path& out) {
  TrainConfig tc = train_config(cfg);
  const Json& tr = cfg.at("train");
  const int episodes = tr.at("episodes").get<int>();
  if (episodes < 1) throw parameter_error("train.episodes must be >= 1");
  const CurriculumSchedule schedule = schedule_from_json(tr.at("schedule"), episodes);
  const ScenarioGenerator gen = scenario_generator(cfg, tr.at("scenario_seed").get<std::uint64_t>());

  write_config(cfg, out);
  fs::create_directories(out / "checkpoints");
  tc.on_checkpoint = [&](int ep, const NetworkParams<float>& p) {
    char name[64];
    std::snprintf(name, sizeof name, "episode_%06d.bin", ep);
    save_params(p, (out / "checkpoints" / name).string());
  };
  double window = 0.0;
  tc.on_episode = [&](const TrainingRow& r) {
    window += r.total_reward;
    if (r.episode % 50 == 0) {
      std::printf("episode %5d  goal %.1f m  mean reward (last 50) %8.2f  entropy %.3f\n", r.episode, r.goal_distance,
                  window / 50.0, r.entropy);
      std::fflush(stdout);
      window = 0.0;
    }
  };

  TrainResult res;
  try {
    res = train(schedule, gen, tc);
  } catch (const training_aborted& e) {
    save_params(e.last_good(), (out / "weights_last_good.bin").string());
    std::cerr << "training aborted: " << e.what() << " (last good weights saved)\n";
    return 2;
  }
  save_params(res.params, (out / "weights.bin").string());
  write_text(training_csv(res.metrics), (out / "metrics.csv").string());
  std::printf("final mean reward (last 100) %.3f\nweights: %s\n", res.metrics.mean_reward_last(100),
              (out / "weights.bin").string().c_str());
  return 0;
}

int cmd_eval(const Json& cfg, const fs::path& out, const std::string& weights, bool oracle, int jobs) {
  const TrainConfig tc = train_config(cfg);
  const Json& ev = cfg.at("eval");
  const int n = ev.at("episodes").get<int>();
  if (n < 1) throw parameter_error("eval.episodes must be >= 1");
  const int first = ev.at("first_episode").get<int>();
  const auto distances = ev.at("distances").get<std::vector<double>>();
  const ScenarioGenerator gen = scenario_generator(cfg, ev.at("scenario_seed").get<std::uint64_t>());
  const NetworkParams<float> params = load_policy(weights, oracle, tc.arch);

  write_config(cfg, out);
  std::string summary_csv;
  for (double d : distances) {
    std::vector<EvalEpisode> eps(static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) { eps[static_cast<std::size_t>(i)] = evaluate_episode(params, gen, first + i, d, tc.episode); });
    const EvalSummary s = summarize(eps);
    const std::string row = eval_summary_csv(s, d);
    summary_csv += summary_csv.empty() ? row : row.substr(row.find('\n') + 1);
    write_text(eval_episodes_csv(eps), (out / ("episodes_" + distance_tag(d) + ".csv")).string());
    std::printf("goal %.1f m: success %.3f  collision %.3f  timeout %.3f  path ratio %.4f  (%d episodes)\n", d,
                s.success_rate, s.collision_rate, s.timeout_rate, s.mean_path_ratio, s.episodes);
  }
  write_text(summary_csv, (out / "eval_summary.csv").string());
  return 0;
}

struct ExploreFlags {
  std::string map_path, kind, weights;
  bool oracle = false;
  std::uint64_t map_seed = 0;
  double width = 2.0, length = 0.0;
  int runs = 1, jobs = 1;
  bool snapshots = false;
};

int cmd_explore(const Json& cfg, const fs::path& out, const ExploreFlags& f) {
  const TrainConfig tc = train_config(cfg);
  ExplorationConfig ec;
  from_json_section(cfg.at("explore"), ec);
  from_json_section(cfg.at("goal"), ec.goal);
  const WorldMap map = resolve_map(f.map_path, f.kind, f.map_seed, f.width, f.length);
  const NetworkParams<float> params = load_policy(f.weights, f.oracle, tc.arch);
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  if (f.runs < 1) throw parameter_error("--runs must be >= 1");

  write_config(cfg, out);
  save_map(map, (out / "map.json").string());
  std::vector<Json> outcomes(static_cast<std::size_t>(f.runs));
  parallel_for(f.runs, f.jobs, [&](int i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    const std::string tag = "seed" + std::to_string(s);
    ReplanCallback snap;
    if (f.snapshots) {
      fs::create_directories(out / "snapshots" / tag);
      snap = [&, tag](int k, int, const AgentGround& g) {
        char name[32];
        std::snprintf(name, sizeof name, "replan_%06d", k);
        export_snapshot(g, (out / "snapshots" / tag / name).string());
      };
    }
    const ExplorationResult r = run_exploration(map, params, ec, s, snap);
    write_trajectory_csv(r.log, (out / ("trajectory_" + tag + ".csv")).string());
    outcomes[static_cast<std::size_t>(i)] = {{"map", map.name},
                                             {"seed", s},
                                             {"outcome", std::string(to_string(r.outcome))},
                                             {"distance_m", r.distance},
                                             {"ticks", r.ticks},
                                             {"replans", r.replans},
                                             {"min_clearance_m", r.min_clearance}};
  });
  for (const auto& o : outcomes) std::cout << o.dump() << '\n';
  write_text((f.runs == 1 ? outcomes.front() : Json(outcomes)).dump(2) + "\n", (out / "outcome.json").string());
  const bool all_completed = std::all_of(outcomes.begin(), outcomes.end(),
                                         [](const Json& o) { return o.at("outcome") == "completed"; });
  return all_completed ? 0 : 3;
}

int cmd_compare(const Json& cfg, const fs::path& out, const ExploreFlags& f) {
  const TrainConfig tc = train_config(cfg);
  CompareConfig cc;
  cc.probes = cfg.at("compare").at("probes").get<int>();
  cc.min_clearance = cfg.at("compare").at("min_clearance").get<double>();
  from_json_section(cfg.at("goal"), cc.goal);
  from_json_section(cfg.at("astar"), cc.astar);
  ExplorationConfig ec;
  from_json_section(cfg.at("explore"), ec);
  cc.scan.max_range = ec.scan.max_range;
  cc.inflation = ec.inflation;
  const WorldMap map = resolve_map(f.map_path, f.kind.empty() && f.map_path.empty() ? "tunnel" : f.kind, f.map_seed,
                                   f.width, f.length);
  const NetworkParams<float> params = load_policy(f.weights, f.oracle, tc.arch);

  write_config(cfg, out);
  const CompareSummary s = compare_planners(map, params, cc, cfg.at("seed").get<std::uint64_t>());
  write_text(compare_csv(s), (out / "compare.csv").string());
  const Json summary = {{"map", map.name},
                        {"probes", cc.probes},
                        {"mean_drl_time_s", s.mean_drl_time_s},
                        {"mean_baseline_time_s", s.mean_baseline_time_s},
                        {"time_ratio_drl_over_baseline", s.time_ratio}};
  write_text(summary.dump(2) + "\n", (out / "compare_summary.json").string());
  std::printf("probes %d  mean DRL %.3f ms  mean A*+ESDF %.3f ms  ratio %.3f\n", cc.probes, 1e3 * s.mean_drl_time_s,
              1e3 * s.mean_baseline_time_s, s.time_ratio);
  return 0;
}

struct GradcheckFlags {
  int batches = 10, params = 50;
  double eps = 1e-3, tol = 1e-4;
  bool write = false;
};

int cmd_gradcheck(const Json& cfg, const fs::path& out, const GradcheckFlags& f) {
  const GradCheckReport r = gradient_check(cfg.at("seed").get<std::uint64_t>(), f.batches, f.params, f.eps, f.tol);
  if (f.write) {
    write_config(cfg, out);
    std::string csv = "batch,tensor,element,analytic,numeric,rel_error\n";
    char buf[256];
    for (const auto& e : r.entries) {
      std::snprintf(buf, sizeof buf, "%d,%s,%zu,%.17g,%.17g,%.17g\n", e.batch, e.tensor.c_str(), e.element, e.analytic,
                    e.numeric, e.rel_error);
      csv += buf;
    }
    write_text(csv, (out / "gradcheck.csv").string());
  }
  std::printf("checked %zu parameters over %d batches, max relative error %.3e (tolerance %.1e), %d kink skips: %s\n",
              r.entries.size(), f.batches, r.max_rel_error, f.tol, r.skipped_at_kinks, r.passed ? "PASS" : "FAIL");
  return r.passed ? 0 : 1;
}

struct ReplayFlags {
  std::string trajectory, map_path, snapshots;
  int every = 50;
  int size = 640;
};

struct TrajPoint {
  int tick = 0;
  double x = 0.0, y = 0.0, gx = 0.0, gy = 0.0;
  bool replan = false;
};

std::vector<TrajPoint> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("tick,time,x,y,psi", 0) != 0) throw format_error("not a trajectory CSV", 1);
  std::vector<TrajPoint> pts;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 11) throw format_error("trajectory row has " + std::to_string(f.size()) + " fields", lineno);
    TrajPoint p;
    try {
      p.tick = std::stoi(f[0]);
      p.x = std::stod(f[2]);
      p.y = std::stod(f[3]);
      p.gx = std::stod(f[7]);
      p.gy = std::stod(f[8]);
    } catch (const std::exception&) {
      throw format_error("malformed number in trajectory row", lineno);
    }
    p.replan = f.size() > 11 && f[11].find("replan") != std::string::npos;
    pts.push_back(p);
  }
  if (pts.empty()) throw format_error("trajectory has no rows", lineno);
  return pts;
}

render::Image ground_panel(const fs::path& dir, int replan, const TrajPoint& p, int scale) {
  char name[32];
  std::snprintf(name, sizeof name, "replan_%06d", replan);
  const auto grid = render::read_pgm((dir / (std::string(name) + "_obstacle.pgm")).string());
  const int n = grid ? grid->size : kGroundSize;
  render::Image img(n * scale, n * scale, render::kWhite);
  if (!grid) return img;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (grid->at({r, c}))
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) img.set(c * scale + dx, r * scale + dy, render::kBlack);
  std::ifstream side(dir / (std::string(name) + ".json"));
  if (side) {
    const Json j = Json::parse(side);
    const Vec2 origin{j.at("origin")[0].get<double>(), j.at("origin")[1].get<double>()};
    const Cell agent = world_to_cell(origin, {p.x, p.y});
    const Cell goal{j.at("goal")[0].get<int>(), j.at("goal")[1].get<int>()};
    img.disk(goal.col * scale + scale / 2, goal.row * scale + scale / 2, scale + 1, render::kRed);
    img.disk(agent.col * scale + scale / 2, agent.row * scale + scale / 2, scale + 1, render::kBlue);
  }
  return img;
}

int cmd_replay(const fs::path& out, const ReplayFlags& f) {
  if (f.every < 1 || f.size < 64) throw parameter_error("--every must be >= 1 and --size >= 64");
  const WorldMap map = load_map(f.map_path);
  const auto pts = read_trajectory(f.trajectory);
  const render::View view(map.bounds, f.size);
  const bool panel = !f.snapshots.empty();
  constexpr int kPanelScale = 2;
  fs::create_directories(out);

  render::Image base(view.width, view.height);
  for (const auto& s : map.segments) base.line(view.px(s.a.x), view.py(s.a.y), view.px(s.b.x), view.py(s.b.y), render::kBlack);
  for (const auto& r : map.goal_regions) {
    const int x0 = view.px(r.xmin), x1 = view.px(r.xmax), y0 = view.py(r.ymax), y1 = view.py(r.ymin);
    for (int x : {x0, x1}) base.line(x, y0, x, y1, render::kGreen);
    for (int y : {y0, y1}) base.line(x0, y, x1, y, render::kGreen);
  }

  int frames = 0, replan = -1;
  render::Image trail = base;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const TrajPoint& p = pts[i];
    if (p.replan) ++replan;
    if (i > 0) trail.line(view.px(pts[i - 1].x), view.py(pts[i - 1].y), view.px(p.x), view.py(p.y), render::kBlue);
    if (p.tick % f.every != 0 && i + 1 != pts.size()) continue;

    const int panel_side = panel ? kGroundSize * kPanelScale : 0;
    render::Image frame(view.width + panel_side + (panel ? 8 : 0), std::max(view.height, panel_side), render::kGrey);
    frame.blit(trail, 0, 0);
    frame.disk(view.px(p.gx), view.py(p.gy), 3, render::kRed);
    frame.disk(view.px(p.x), view.py(p.y), 3, render::kBlue);
    if (panel) frame.blit(ground_panel(f.snapshots, std::max(replan, 0), p, kPanelScale), view.width + 8, 0);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.ppm", p.tick);
    frame.write_ppm((out / name).string());
    ++frames;
  }
  std::printf("wrote %d frames to %s\n", frames, out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mapless grid-world actor-critic planner: training, evaluation, exploration missions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  Overrides ov;

  auto* train = app.add_subcommand("train", "Curriculum A2C training");
  add_common(train, common, ov);
  ov.add<int>(train, "--episodes", "/train/episodes", "Episode budget");
  std::string curriculum;
  train->add_option("--curriculum", curriculum, "Schedule: default or none")->check(CLI::IsMember({"default", "none"}));
  bool no_curriculum = false;
  train->add_flag("--no-curriculum", no_curriculum, "Fixed 4 m goals from the first episode");
  ov.add<double>(train, "--lr", "/hyper/learning_rate", "Learning rate");
  ov.add<double>(train, "--entropy-coef", "/hyper/entropy_coef", "Entropy bonus coefficient");
  ov.add<double>(train, "--value-coef", "/hyper/value_coef", "Critic loss coefficient");
  ov.add<double>(train, "--gamma", "/hyper/gamma", "Discount");
  ov.add<double>(train, "--grad-clip", "/hyper/grad_clip", "Global gradient-norm clip (<= 0 disables)");
  ov.add<std::uint64_t>(train, "--scenario-seed", "/train/scenario_seed", "Training scenario stream");
  ov.add<int>(train, "--checkpoint-every", "/train/checkpoint_every", "Checkpoint period in episodes");

  std::string weights;
  bool oracle = false;
  int jobs = 1;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation on held-out scenarios");
  add_common(eval, common, ov);
  eval->add_option("--weights", weights, "Weights file")->check(CLI::ExistingFile);
  eval->add_flag("--oracle", oracle, "Use the hand-built goal-seeking weights");
  ov.add<int>(eval, "--episodes", "/eval/episodes", "Scenarios per goal distance");
  ov.add<std::vector<double>>(eval, "--distances", "/eval/distances", "Goal distances in meters");
  ov.add<std::uint64_t>(eval, "--scenario-seed", "/eval/scenario_seed", "Held-out scenario stream");
  ov.add<int>(eval, "--stubs", "/scenario/stubs", "Wall stubs per open-field scene");
  ov.add<double>(eval, "--map-scene-fraction", "/scenario/map_scene_fraction", "Share of corridor-map scenes");
  eval->add_option("--jobs", jobs, "Worker threads")->capture_default_str();

  ExploreFlags ef;
  auto add_map_flags = [&](CLI::App* cmd) {
    cmd->add_option("--map", ef.map_path, "Map JSON")->check(CLI::ExistingFile);
    cmd->add_option("--kind", ef.kind, "Generate a map instead: corridor, l_shape, y_junction, tunnel");
    cmd->add_option("--map-seed", ef.map_seed, "Generator seed (tunnel only)");
    cmd->add_option("--width", ef.width, "Generated map width, m")->capture_default_str();
    cmd->add_option("--length", ef.length, "Generated map length, m (kind-dependent default)");
    cmd->add_option("--weights", ef.weights, "Weights file")->check(CLI::ExistingFile);
    cmd->add_flag("--oracle", ef.oracle, "Use the hand-built goal-seeking weights");
  };
  auto* explore = app.add_subcommand("explore", "Receding-horizon mission on a map");
  add_common(explore, common, ov);
  add_map_flags(explore);
  explore->add_option("--runs", ef.runs, "Missions with seeds seed, seed+1, ...")->capture_default_str();
  explore->add_option("--jobs", ef.jobs, "Worker threads")->capture_default_str();
  explore->add_flag("--snapshots", ef.snapshots, "Write the agent ground of every replan as PGM");
  ov.add<int>(explore, "--max-ticks", "/explore/max_ticks", "Mission step limit");
  ov.add<double>(explore, "--noise", "/explore/noise_sigma", "LiDAR range noise sigma, m");

  auto* compare = app.add_subcommand("compare", "Per-decision cost: DRL vs A*+ESDF");
  add_common(compare, common, ov);
  add_map_flags(compare);
  ov.add<int>(compare, "--probes", "/compare/probes", "Number of probe poses");

  GradcheckFlags gf;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the A2C gradient");
  add_common(gradcheck, common, ov);
  gradcheck->add_option("--batches", gf.batches)->capture_default_str();
  gradcheck->add_option("--params", gf.params, "Parameters per batch")->capture_default_str();
  gradcheck->add_option("--eps", gf.eps)->capture_default_str();
  gradcheck->add_option("--tol", gf.tol)->capture_default_str();
  gradcheck->add_flag("--write", gf.write, "Write gradcheck.csv and config.json to --out");

  ReplayFlags rf;
  auto* replay = app.add_subcommand("replay", "Render a trajectory (and snapshots) to PPM frames");
  replay->add_option("--trajectory", rf.trajectory, "Trajectory CSV from explore")->required()->check(CLI::ExistingFile);
  replay->add_option("--map", rf.map_path, "Map JSON")->required()->check(CLI::ExistingFile);
  replay->add_option("--snapshots", rf.snapshots, "Snapshot directory from explore --snapshots")
      ->check(CLI::ExistingDirectory);
  replay->add_option("--every", rf.every, "Frame period in ticks")->capture_default_str();
  replay->add_option("--size", rf.size, "Longest side of the world view, pixels")->capture_default_str();
  replay->add_option("--out", common.out_dir, "Output directory")->capture_default_str();

  std::string kind, map_out;
  std::uint64_t map_seed = 0;
  MapParams mp;
  auto* genmap = app.add_subcommand("genmap", "Write a generated map as JSON");
  genmap->add_option("--kind", kind, "corridor, l_shape, y_junction, tunnel")->required();
  genmap->add_option("--seed", map_seed)->capture_default_str();
  genmap->add_option("--width", mp.width)->capture_default_str();
  genmap->add_option("--length", mp.length)->capture_default_str();
  genmap->add_option("--out", map_out, "Map file")->required();

  std::string oracle_out;
  auto* oracle_cmd = app.add_subcommand("oracle", "Write the hand-built goal-seeking weights");
  oracle_cmd->add_option("--out", oracle_out, "Weights file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out = common.out_dir;
    auto ensure_parent = [](const std::string& file) {
      const fs::path parent = fs::path(file).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
    };
    if (*genmap) {
      ensure_parent(map_out);
      save_map(generate_map(parse_map_kind(kind), map_seed, mp), map_out);
      return 0;
    }
    if (*oracle_cmd) {
      ensure_parent(oracle_out);
      save_params(goal_seeking_params<float>(), oracle_out);
      return 0;
    }
    if (*replay) return cmd_replay(out, rf);

    Json cfg = resolve(common, ov);
    if (*train) {
      if (no_curriculum) cfg["train"]["schedule"] = "none";
      else if (!curriculum.empty()) cfg["train"]["schedule"] = curriculum;
      return cmd_train(cfg, out);
    }
    if (*eval) return cmd_eval(cfg, out, weights, oracle, jobs);
    if (*explore) return cmd_explore(cfg, out, ef);
    if (*compare) return cmd_compare(cfg, out, ef);
    if (*gradcheck) return cmd_gradcheck(cfg, out, gf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
