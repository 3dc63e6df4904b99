// prmrl command line: maze, train, build, query, execute, bench.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prmrl/common.hpp"
#include "prmrl/connect.hpp"
#include "prmrl/parallel.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/roadmap.hpp"
#include "prmrl/runner.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/train.hpp"
#include "prmrl/workspace.hpp"

namespace fs = std::filesystem;
using namespace prmrl;

namespace {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return "invalid-argument";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::no_free_space: return "no-free-space";
    case ErrorCategory::no_path: return "no-path";
    case ErrorCategory::execution_failed: return "execution-failed";
  }
  return "error";
}

ConfigPoint parse_point(const std::string& text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    v.push_back(parse_double(std::string_view(text).substr(pos, end - pos)));
    pos = end + 1;
  }
  if (v.size() != 2 && v.size() != 3) fail(ErrorCategory::invalid_argument, "point must be x,y or x,y,z: " + text);
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

std::string point_text(const ConfigPoint& p, TaskKind task) {
  std::string s = format_double(p.x()) + "," + format_double(p.y());
  if (task == TaskKind::aerial) s += "," + format_double(p.z());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > pos) out.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) fail(ErrorCategory::io, "cannot create " + parent.string() + ": " + ec.message());
}

// Options shared by every subcommand that touches a map.
struct Common {
  std::string map;
  std::string task = "indoor";
  std::string scenario;
  std::uint64_t seed = 1;

  void add(CLI::App* app, bool need_map = true) {
    auto* opt = app->add_option("--map", map, "map metadata file (key=value, next to its .pgm)");
    if (need_map) opt->required();
    app->add_option("--task", task, "indoor or aerial")->check(CLI::IsMember({"indoor", "aerial"}));
    app->add_option("--scenario", scenario, "scenario key=value file");
    app->add_option("--seed", seed, "random seed");
  }

  Scenario load_scenario_or_default() const { return scenario.empty() ? Scenario{} : load_scenario(scenario); }
  TaskKind kind() const { return parse_task(task); }
};

struct TrainOptions {
  TrainConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--population", cfg.population, "candidates per iteration");
    app->add_option("--iterations", cfg.iterations, "resampling rounds");
    app->add_option("--episodes", cfg.episodes, "episodes per fitness evaluation");
    app->add_option("--elite-fraction", cfg.elite_fraction, "fraction of candidates kept as elites");
    app->add_option("--sigma", cfg.init_sigma, "initial relative search spread");
  }
};

void print_train_log(const TrainResult& result, std::ostream& out) {
  out << "iteration,candidate,success_rate,mean_return\n";
  for (const auto& r : result.log) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", r.iteration, r.candidate, r.fitness.success_rate,
                  r.fitness.mean_return);
    out << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PRM construction with Monte Carlo rollout edges"};
  app.require_subcommand(1);
  std::size_t workers = 0;
  app.add_option("--workers", workers, "worker threads (default: PRMRL_WORKERS or available parallelism)");

  // maze
  auto* maze_cmd = app.add_subcommand("maze", "generate a procedural maze map");
  std::uint64_t maze_seed = 1;
  double maze_w = 20, maze_h = 20, maze_corridor = 3, maze_res = 0.1, maze_inflation = 0.35;
  std::string maze_out;
  maze_cmd->add_option("--seed", maze_seed, "random seed");
  maze_cmd->add_option("--width", maze_w, "width, m");
  maze_cmd->add_option("--height", maze_h, "height, m");
  maze_cmd->add_option("--corridor", maze_corridor, "corridor width, m");
  maze_cmd->add_option("--resolution", maze_res, "m per cell");
  maze_cmd->add_option("--inflation", maze_inflation, "inflation radius, m");
  maze_cmd->add_option("--out", maze_out, "map metadata path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "search for a fit policy on a map");
  Common train_common;
  TrainOptions train_opts;
  std::string train_out, train_log;
  train_common.add(train_cmd);
  train_opts.add(train_cmd);
  train_cmd->add_option("--out", train_out, "policy file")->required();
  train_cmd->add_option("--log", train_log, "fitness log CSV");

  // build
  auto* build_cmd = app.add_subcommand("build", "build a roadmap");
  Common build_common;
  double density = 0.4;
  std::string planner_name = "rl", policy_path, build_out;
  build_common.add(build_cmd);
  build_cmd->add_option("--density", density, "nodes per m^2 of free space");
  build_cmd->add_option("--planner", planner_name, "sl or rl")->check(CLI::IsMember({"sl", "rl"}));
  build_cmd->add_option("--policy", policy_path, "policy file (rl planner)");
  build_cmd->add_option("--out,--roadmap", build_out, "roadmap file")->required();

  // query / execute
  auto* query_cmd = app.add_subcommand("query", "plan a path on a roadmap");
  auto* exec_cmd = app.add_subcommand("execute", "plan and execute a path");
  Common q_common;
  std::string q_roadmap, q_policy, q_start, q_goal, q_weight = "length", q_out, q_format = "csv";
  for (auto* cmd : {query_cmd, exec_cmd}) {
    q_common.add(cmd);
    cmd->add_option("--roadmap", q_roadmap, "roadmap file")->required();
    cmd->add_option("--policy", q_policy, "policy file");
    cmd->add_option("--start", q_start, "x,y[,z]")->required();
    cmd->add_option("--goal", q_goal, "x,y[,z]")->required();
    cmd->add_option("--weight", q_weight, "length or risk")->check(CLI::IsMember({"length", "risk"}));
    cmd->add_option("--format", q_format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  }
  exec_cmd->add_option("--out", q_out, "trajectory CSV");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "build, query and execute over maps, densities and planners");
  Common bench_common;
  TrainOptions bench_train;
  std::vector<std::string> bench_maps;
  std::string bench_densities = "0.1,0.2,0.4", bench_planners = "sl,rl", bench_policy, bench_out = "bench_out",
              bench_format = "csv", bench_weight = "length";
  int bench_queries = 100;
  int bench_mazes = 0;
  double bench_maze_size = 20, bench_maze_corridor = 3;
  bench_common.add(bench_cmd, false);
  bench_train.add(bench_cmd);
  bench_cmd->add_option("--maps", bench_maps, "map metadata files (repeatable)");
  bench_cmd->add_option("--maze", bench_mazes, "also generate this many procedural mazes");
  bench_cmd->add_option("--maze-size", bench_maze_size, "maze side, m");
  bench_cmd->add_option("--maze-corridor", bench_maze_corridor, "maze corridor width, m");
  bench_cmd->add_option("--densities", bench_densities, "comma separated densities");
  bench_cmd->add_option("--planners", bench_planners, "comma separated planners (sl, rl)");
  bench_cmd->add_option("--queries", bench_queries, "queries per roadmap");
  bench_cmd->add_option("--policy", bench_policy, "policy file; trained on the first map when absent");
  bench_cmd->add_option("--weight", bench_weight, "length or risk")->check(CLI::IsMember({"length", "risk"}));
  bench_cmd->add_option("--out-dir", bench_out, "output directory");
  bench_cmd->add_option("--format", bench_format, "csv or text")->check(CLI::IsMember({"csv", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::invalid_argument);
  }

  try {
    if (workers > 0) set_worker_count(workers);

    if (*maze_cmd) {
      MapSpec spec;
      spec.image = generate_maze(maze_seed, maze_w, maze_h, maze_corridor, maze_res);
      spec.resolution = maze_res;
      spec.inflation_radius = maze_inflation;
      ensure_parent(maze_out);
      write_map(maze_out, spec);
      std::cout << "wrote " << maze_out << "\n";
      return 0;
    }

    if (*train_cmd) {
      const Scenario scenario = train_common.load_scenario_or_default();
      const World world = read_map(train_common.map).world(train_common.kind());
      TrainConfig cfg = train_opts.cfg;
      cfg.seed = train_common.seed;
      cfg.goal_tolerance = scenario.edge.goal_tolerance;
      const TrainResult result = train_policy_search(world, scenario, cfg);
      ensure_parent(train_out);
      save_policy(result.policy, train_out);
      if (!train_log.empty()) {
        std::ostringstream log;
        print_train_log(result, log);
        write_text_file(train_log, log.str());
      }
      std::printf("policy %s: success %.3f, return %.4f (%zu candidates)\n", train_out.c_str(),
                  result.policy.fitness_success, result.policy.fitness_return, result.log.size());
      return 0;
    }

    if (*build_cmd) {
      const Scenario scenario = build_common.load_scenario_or_default();
      const World world = read_map(build_common.map).world(build_common.kind());
      std::optional<Policy> policy;
      if (!policy_path.empty()) policy = load_policy(policy_path);
      const auto planner = make_planner(parse_planner(planner_name), world, scenario, policy);
      const Roadmap map = build_roadmap(*planner, density, build_common.seed);
      ensure_parent(build_out);
      save_roadmap(map, build_out);
      std::printf("roadmap %s: %zu nodes, %zu edges, %zu collision checks\n", build_out.c_str(), map.nodes.size(),
                  map.edges.size(), map.info.collision_checks);
      return 0;
    }

    if (*query_cmd || *exec_cmd) {
      const Scenario scenario = q_common.load_scenario_or_default();
      const Roadmap map = load_roadmap(q_roadmap);
      const World world = read_map(q_common.map).world(map.info.task);
      if (world.content_hash() != map.info.map_hash) {
        fail(ErrorCategory::invalid_argument, "roadmap was built on a different map");
      }
      std::optional<Policy> policy;
      if (!q_policy.empty()) policy = load_policy(q_policy);
      Scenario built = scenario;
      built.edge = map.info.params;
      const auto planner = make_planner(map.info.planner, world, built, policy);
      const ConfigPoint start = parse_point(q_start);
      const ConfigPoint goal = parse_point(q_goal);
      const PathWeight weight = q_weight == "risk" ? PathWeight::risk : PathWeight::length;
      const auto plan = query(map, *planner, start, goal, q_common.seed, weight);
      if (!plan) fail(ErrorCategory::no_path, "no path between start and goal");

      if (*query_cmd) {
        if (q_format == "csv") {
          std::cout << "index,waypoint,success_rate,mean_length,mean_steps\n";
          for (std::size_t k = 0; k < plan->waypoints.size(); ++k) {
            const auto& leg = k < plan->legs.size() ? plan->legs[k] : RoadmapEdge{};
            std::cout << k << ",\"" << point_text(plan->waypoints[k], map.info.task) << "\","
                      << format_double(leg.success_rate) << "," << format_double(leg.mean_length) << ","
                      << format_double(leg.mean_steps) << "\n";
          }
        }
        std::printf("%swaypoints %d, expected success %.6f, expected length %.6f, lower bound %.6f\n",
                    q_format == "csv" ? "# " : "", plan->n_w, plan->expected_success, plan->expected_length,
                    success_lower_bound(map.info.params.p_success, plan->n_w));
        return 0;
      }

      if (!policy) fail(ErrorCategory::invalid_argument, "execute needs --policy");
      const TrajectoryRecord rec = execute(*plan, *policy, world, built, map.info.params.max_steps,
                                           mix_seed(q_common.seed, 0xe8));
      if (!q_out.empty()) {
        ensure_parent(q_out);
        export_trajectory(rec, q_out);
      }
      std::printf("%s: %zu steps, length %.6f m, duration %.6f s, waypoints %d\n",
                  std::string(to_string(rec.outcome)).c_str(), rec.steps.size(), rec.length, rec.duration, rec.n_w);
      return rec.success ? 0 : static_cast<int>(ErrorCategory::execution_failed);
    }

    if (*bench_cmd) {
      const Scenario scenario = bench_common.load_scenario_or_default();
      const TaskKind task = bench_common.kind();
      std::vector<MapCase> maps;
      for (const auto& path : bench_maps) {
        const MapSpec spec = read_map(path);
        maps.push_back({spec.name, spec.world(task)});
      }
      for (int k = 0; k < bench_mazes; ++k) {
        MapSpec spec;
        spec.image = generate_maze(mix_seed(bench_common.seed, 0x6d, k), bench_maze_size, bench_maze_size,
                                   bench_maze_corridor, spec.resolution);
        maps.push_back({"maze" + std::to_string(k), spec.world(task)});
      }
      if (maps.empty()) fail(ErrorCategory::invalid_argument, "bench needs --maps or --maze");

      ExperimentConfig cfg;
      cfg.scenario = scenario;
      cfg.seed = bench_common.seed;
      cfg.n_queries = bench_queries;
      cfg.out_dir = bench_out;
      cfg.weight = bench_weight == "risk" ? PathWeight::risk : PathWeight::length;
      cfg.densities.clear();
      for (const auto& d : split_list(bench_densities)) cfg.densities.push_back(parse_double(d));
      cfg.planners.clear();
      for (const auto& p : split_list(bench_planners)) cfg.planners.push_back(parse_planner(p));

      fs::create_directories(bench_out);
      if (!bench_policy.empty()) {
        cfg.policy = load_policy(bench_policy);
      } else {
        TrainConfig tc = bench_train.cfg;
        tc.seed = bench_common.seed;
        tc.goal_tolerance = scenario.edge.goal_tolerance;
        const TrainResult trained = train_policy_search(maps.front().world, scenario, tc);
        cfg.policy = trained.policy;
        save_policy(trained.policy, (fs::path(bench_out) / "policy.txt").string());
      }

      const ExperimentReport report = run_experiment(maps, cfg);
      const std::string csv = report_csv(report);
      write_text_file((fs::path(bench_out) / "report.csv").string(), csv);
      if (bench_format == "csv") {
        std::cout << csv;
      } else {
        for (const auto& r : report.rows) {
          std::printf("%-10s d=%-5g %-2s nodes %5zu edges %6zu checks %10zu | paths %3d/%3d success %3d "
                      "expected %.3f actual %.3f\n",
                      r.map.c_str(), r.density, std::string(to_string(r.planner)).c_str(), r.nodes, r.edges,
                      r.collision_checks, r.paths, r.queries, r.successes, r.expected_success, r.actual_success);
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", category_name(e.category()), e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
