#include "prmrl/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "prmrl/parallel.hpp"

namespace prmrl {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
    case Outcome::constraint: return "constraint";
    case Outcome::no_path: return "no_path";
  }
  return "unknown";
}

TrajectoryRecord execute(const QueryResult& plan, const Policy& policy, const World& world, const Scenario& scenario,
                         int max_steps_per_edge, std::uint64_t seed) {
  const double eps = scenario.edge.goal_tolerance;
  return with_system(world, scenario, policy, [&](const auto& sys) {
    return execute_plan(sys, plan, eps, max_steps_per_edge, seed, scenario.reward);
  });
}

// ------------------------------------------------------------------ CSV files

std::string trajectory_csv(const TrajectoryRecord& record) {
  const bool aerial = record.task == TaskKind::aerial;
  std::string out = "# start " + format_double(record.start.x()) + " " + format_double(record.start.y());
  if (aerial) out += " " + format_double(record.start.z());
  out += aerial ? "\nt,x,y,z,displacement,a_x,a_y,a_z,waypoint\n" : "\nt,x,y,heading,v_l,v_r,waypoint\n";
  for (const auto& s : record.steps) {
    out += format_double(s.t) + "," + format_double(s.position.x()) + "," + format_double(s.position.y()) + ",";
    if (aerial) {
      out += format_double(s.position.z()) + "," + format_double(s.displacement) + "," + format_double(s.action.x()) +
             "," + format_double(s.action.y()) + "," + format_double(s.action.z());
    } else {
      out += format_double(s.heading) + "," + format_double(s.action.x()) + "," + format_double(s.action.y());
    }
    out += "," + std::to_string(s.waypoint) + "\n";
  }
  return out;
}

void export_trajectory(const TrajectoryRecord& record, const std::string& path) {
  write_text_file(path, trajectory_csv(record));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double step_distance(TaskKind task, const ConfigPoint& a, const ConfigPoint& b) {
  // Same arithmetic as the systems' step_length, so totals round-trip exactly.
  if (task == TaskKind::indoor) return std::hypot(b.x() - a.x(), b.y() - a.y());
  return (b - a).norm();
}

}  // namespace

TrajectoryRecord parse_trajectory(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto guard = [&](auto fn) {
    try {
      return fn();
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  };

  TrajectoryRecord rec;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty trajectory file");
  ++line_no;
  {
    std::istringstream ls(line);
    std::string hash, key;
    ls >> hash >> key;
    if (hash != "#" || key != "start") throw ParseError(source, line_no, "expected '# start x y [z]'");
    std::vector<std::string> coords;
    for (std::string t; ls >> t;) coords.push_back(t);
    if (coords.size() != 2 && coords.size() != 3) throw ParseError(source, line_no, "start needs 2 or 3 coordinates");
    rec.task = coords.size() == 3 ? TaskKind::aerial : TaskKind::indoor;
    for (std::size_t k = 0; k < coords.size(); ++k) rec.start[k] = guard([&] { return parse_double(coords[k]); });
  }
  const bool aerial = rec.task == TaskKind::aerial;
  if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "missing header");
  ++line_no;
  const std::string header =
      aerial ? "t,x,y,z,displacement,a_x,a_y,a_z,waypoint" : "t,x,y,heading,v_l,v_r,waypoint";
  if (line != header) throw ParseError(source, line_no, "unexpected header");
  const std::size_t columns = aerial ? 9 : 7;

  ConfigPoint prev = rec.start;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != columns) throw ParseError(source, line_no, "expected " + std::to_string(columns) + " columns");
    auto num = [&](std::size_t k) { return guard([&] { return parse_double(f[k]); }); };
    TrajectoryStep s;
    s.t = num(0);
    s.position = {num(1), num(2), aerial ? num(3) : 0.0};
    if (aerial) {
      s.displacement = num(4);
      s.action = {num(5), num(6), num(7)};
    } else {
      s.heading = num(3);
      s.action = {num(4), num(5), 0.0};
    }
    s.waypoint = static_cast<int>(guard([&] { return parse_int(f[columns - 1]); }));
    rec.length += step_distance(rec.task, prev, s.position);
    rec.max_displacement = std::max(rec.max_displacement, s.displacement);
    prev = s.position;
    rec.steps.push_back(s);
  }
  if (!rec.steps.empty()) {
    rec.duration = rec.steps.back().t;
    rec.dt = rec.steps.front().t;
  }
  return rec;
}

TrajectoryRecord import_trajectory(const std::string& path) { return parse_trajectory(read_text_file(path), path); }

// ---------------------------------------------------------------- experiments

Stat describe(const std::vector<double>& values) {
  Stat s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
  return s;
}

namespace {

struct QueryPair {
  ConfigPoint start;
  ConfigPoint goal;
};

std::vector<QueryPair> query_pairs(const World& world, int n, double min_separation, std::uint64_t seed) {
  std::vector<QueryPair> pairs;
  Rng rng(seed);
  for (int k = 0; k < n; ++k) {
    QueryPair q{world.sample_free(rng), world.sample_free(rng)};
    while ((q.goal - q.start).norm() <= min_separation) q.goal = world.sample_free(rng);
    pairs.push_back(q);
  }
  return pairs;
}

struct QueryRun {
  std::optional<QueryResult> plan;
  TrajectoryRecord record;
};

std::string file_stem(const std::string& map, double density, PlannerKind planner) {
  return map + "_d" + format_double(density) + "_" + std::string(to_string(planner));
}

}  // namespace

ExperimentReport run_experiment(const std::vector<MapCase>& maps, const ExperimentConfig& cfg) {
  if (cfg.n_queries < 0) fail(ErrorCategory::invalid_argument, "n_queries must be >= 0");
  if (!cfg.policy && cfg.n_queries > 0) fail(ErrorCategory::invalid_argument, "executing queries needs a trained policy");
  namespace fs = std::filesystem;
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(fs::path(cfg.out_dir) / "trajectories", ec);
    if (ec) fail(ErrorCategory::io, "cannot create output directory " + cfg.out_dir + ": " + ec.message());
  }

  ExperimentReport report;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const MapCase& mc = maps[m];
    const World& world = mc.world;
    const TaskKind task = world.task();
    if (cfg.policy && cfg.policy->task() != task) {
      fail(ErrorCategory::invalid_argument, "policy task does not match map " + mc.name);
    }
    const std::uint64_t map_seed = mix_seed(cfg.seed, m);
    const auto pairs = query_pairs(world, cfg.n_queries, cfg.scenario.edge.goal_tolerance, mix_seed(map_seed, 0x9a));
    const double dt = cfg.scenario.dt(task);

    for (double density : cfg.densities) {
      for (PlannerKind kind : cfg.planners) {
        const auto planner = make_planner(kind, world, cfg.scenario, cfg.policy);
        const Roadmap roadmap = build_roadmap(*planner, density, map_seed);
        const int cap = planner->params().max_steps;

        std::vector<QueryRun> runs(pairs.size());
        parallel_for(pairs.size(), [&](std::size_t q) {
          QueryRun& run = runs[q];
          run.plan = query(roadmap, *planner, pairs[q].start, pairs[q].goal, mix_seed(map_seed, 0x71, q), cfg.weight);
          if (run.plan) run.record = execute(*run.plan, *cfg.policy, world, cfg.scenario, cap, mix_seed(map_seed, 0xe8, q));
        });

        ReportRow row;
        row.map = mc.name;
        row.task = task;
        row.density = density;
        row.planner = kind;
        row.nodes = roadmap.nodes.size();
        row.edges = roadmap.edges.size();
        row.collision_checks = roadmap.info.collision_checks;
        row.queries = static_cast<int>(pairs.size());
        std::vector<double> exp_success, exp_wp, act_wp, exp_len, act_len, exp_dur, act_dur;
        for (const auto& run : runs) {
          if (!run.plan) {
            ++row.no_path;
            continue;
          }
          ++row.paths;
          exp_success.push_back(run.plan->expected_success);
          exp_wp.push_back(run.plan->n_w);
          exp_len.push_back(run.plan->expected_length);
          exp_dur.push_back(run.plan->expected_steps * dt);
          row.max_displacement = std::max(row.max_displacement, run.record.max_displacement);
          switch (run.record.outcome) {
            case Outcome::success:
              ++row.successes;
              act_wp.push_back(run.record.n_w);
              act_len.push_back(run.record.length);
              act_dur.push_back(run.record.duration);
              break;
            case Outcome::collision: ++row.collisions; break;
            case Outcome::timeout: ++row.timeouts; break;
            case Outcome::constraint: ++row.constraint_violations; break;
            case Outcome::no_path: ++row.no_path; break;
          }
        }
        row.expected_success = describe(exp_success).mean;
        if (row.paths > 0) row.actual_success = double(row.successes) / row.paths;
        if (row.queries > 0) row.query_success = double(row.successes) / row.queries;
        row.expected_waypoints = describe(exp_wp);
        row.actual_waypoints = describe(act_wp);
        row.expected_length = describe(exp_len);
        row.actual_length = describe(act_len);
        row.expected_duration = describe(exp_dur);
        row.actual_duration = describe(act_dur);

        if (!cfg.out_dir.empty()) {
          const std::string stem = file_stem(mc.name, density, kind);
          row.roadmap_file = stem + ".roadmap";
          save_roadmap(roadmap, (fs::path(cfg.out_dir) / row.roadmap_file).string());
          for (std::size_t q = 0; q < runs.size(); ++q) {
            if (!runs[q].plan) continue;
            const auto path = fs::path(cfg.out_dir) / "trajectories" / (stem + "_q" + std::to_string(q) + ".csv");
            export_trajectory(runs[q].record, path.string());
          }
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

namespace {

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
  std::string out =
      "map,task,density,planner,nodes,edges,collision_checks,queries,paths,successes,query_success,"
      "expected_success,actual_success,expected_waypoints_mean,expected_waypoints_sd,actual_waypoints_mean,"
      "actual_waypoints_sd,expected_length_mean,expected_length_sd,actual_length_mean,actual_length_sd,"
      "expected_duration_mean,expected_duration_sd,actual_duration_mean,actual_duration_sd,"
      "collisions,timeouts,constraint_violations,no_path,failures,max_displacement_deg,roadmap\n";
  for (const auto& r : report.rows) {
    const int failures = r.queries - r.successes;
    out += r.map + "," + std::string(to_string(r.task)) + "," + fixed(r.density) + "," +
           std::string(to_string(r.planner)) + "," + std::to_string(r.nodes) + "," + std::to_string(r.edges) + "," +
           std::to_string(r.collision_checks) + "," + std::to_string(r.queries) + "," + std::to_string(r.paths) + "," +
           std::to_string(r.successes) + "," + fixed(r.query_success) + "," + fixed(r.expected_success) + "," +
           fixed(r.actual_success);
    for (const Stat* s : {&r.expected_waypoints, &r.actual_waypoints, &r.expected_length, &r.actual_length,
                          &r.expected_duration, &r.actual_duration}) {
      out += "," + fixed(s->mean) + "," + fixed(s->stddev);
    }
    out += "," + std::to_string(r.collisions) + "," + std::to_string(r.timeouts) + "," +
           std::to_string(r.constraint_violations) + "," + std::to_string(r.no_path) + "," + std::to_string(failures) +
           "," + fixed(rad2deg(r.max_displacement)) + "," + r.roadmap_file + "\n";
  }
  return out;
}

}  // namespace prmrl
