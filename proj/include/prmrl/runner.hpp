#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "prmrl/connect.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/roadmap.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

enum class Outcome { success, collision, timeout, constraint, no_path };

std::string_view to_string(Outcome outcome);

struct TrajectoryStep {
  double t = 0.0;  // time at the end of the step
  ConfigPoint position = ConfigPoint::Zero();
  double heading = 0.0;       // indoor
  double displacement = 0.0;  // aerial load angle
  Eigen::Vector3d action = Eigen::Vector3d::Zero();  // (v_l, v_r, 0) or (a_x, a_y, a_z), applied during the step
  int waypoint = 0;           // active waypoint while the step was taken
};

struct WaypointOutcome {
  bool reached = false;
  int steps = 0;
};

struct TrajectoryRecord {
  TaskKind task = TaskKind::indoor;
  double dt = 0.0;
  ConfigPoint start = ConfigPoint::Zero();
  ConfigPoint goal = ConfigPoint::Zero();
  std::vector<TrajectoryStep> steps;
  std::vector<WaypointOutcome> waypoints;
  bool success = false;
  Outcome outcome = Outcome::timeout;
  double length = 0.0;    // sum of step displacements
  double duration = 0.0;  // steps * dt
  int n_w = 0;
  double max_displacement = 0.0;  // aerial, over the start and every step
};

namespace detail {

inline void record_state(TrajectoryStep& step, const DiffDriveState& s) { step.heading = s.heading; }
inline void record_state(TrajectoryStep& step, const QuadLoadState& s) { step.displacement = load_displacement(s); }
template <class State>
void record_state(TrajectoryStep&, const State&) {}

inline Eigen::Vector3d action_vector(const WheelSpeeds& a) { return {a.left, a.right, 0.0}; }
inline Eigen::Vector3d action_vector(const Eigen::Vector3d& a) { return a; }
template <class Action>
Eigen::Vector3d action_vector(const Action&) {
  return Eigen::Vector3d::Zero();
}

inline Outcome violation(const AerialSystem& sys, const QuadLoadState& s) {
  return sys.space().is_free(s.position) ? Outcome::constraint : Outcome::collision;
}
template <class S, class State>
Outcome violation(const S&, const State&) {
  return Outcome::collision;
}

}  // namespace detail

// Drives the closed loop through the plan's waypoints, switching to the next
// one on arrival. Indoor arrival is the goal range alone, so speed carries
// over; aerial arrival also needs rest. Each leg may take max_steps_per_edge
// steps. The start state is sampled at plan.start from `seed`.
template <ClosedLoopSystem S>
TrajectoryRecord execute_plan(const S& sys, const QueryResult& plan, double eps, int max_steps_per_edge,
                              std::uint64_t seed, const RewardConfig& reward = {}) {
  if (max_steps_per_edge < 1) fail(ErrorCategory::invalid_argument, "max_steps_per_edge must be >= 1");
  if (plan.waypoints.empty() && (plan.start - plan.goal).norm() > eps) {
    fail(ErrorCategory::invalid_argument, "plan has no waypoints and the start is not at the goal");
  }
  TrajectoryRecord rec;
  rec.start = plan.start;
  rec.goal = plan.goal;
  rec.n_w = static_cast<int>(plan.waypoints.size());
  rec.waypoints.resize(plan.waypoints.size());
  if constexpr (std::is_same_v<S, IndoorSystem>) rec.task = TaskKind::indoor;
  if constexpr (std::is_same_v<S, AerialSystem>) rec.task = TaskKind::aerial;
  if constexpr (requires { sys.dt(); }) rec.dt = sys.dt();

  Rng rng(seed);
  auto state = sys.sample_state(plan.start, rng);
  {
    TrajectoryStep probe;
    detail::record_state(probe, state);
    rec.max_displacement = probe.displacement;
  }
  if (!sys.valid(state)) {
    rec.outcome = detail::violation(sys, state);
    return rec;
  }

  int total = 0;
  for (std::size_t w = 0; w < plan.waypoints.size(); ++w) {
    const ConfigPoint& target = plan.waypoints[w];
    int leg_steps = 0;
    while (!sys.arrived(state, target, eps)) {
      if (leg_steps >= max_steps_per_edge) {
        rec.waypoints[w].steps = leg_steps;
        rec.outcome = Outcome::timeout;
        rec.duration = total * rec.dt;
        return rec;
      }
      auto tr = sys.advance(state, target, rng, reward, eps);
      ++leg_steps;
      ++total;
      rec.length += sys.step_length(state, tr.next);
      TrajectoryStep step;
      step.t = total * rec.dt;
      step.position = sys.project(tr.next);
      detail::record_state(step, tr.next);
      step.action = detail::action_vector(tr.action);
      step.waypoint = static_cast<int>(w);
      rec.max_displacement = std::max(rec.max_displacement, step.displacement);
      rec.steps.push_back(step);
      state = std::move(tr.next);
      if (!sys.valid(state)) {
        rec.waypoints[w].steps = leg_steps;
        rec.outcome = detail::violation(sys, state);
        rec.duration = total * rec.dt;
        return rec;
      }
    }
    rec.waypoints[w] = {true, leg_steps};
  }
  rec.success = (sys.project(state) - plan.goal).norm() <= eps;
  rec.outcome = rec.success ? Outcome::success : Outcome::timeout;
  rec.duration = total * rec.dt;
  return rec;
}

// execute_plan with the policy closed around the world's task model.
TrajectoryRecord execute(const QueryResult& plan, const Policy& policy, const World& world, const Scenario& scenario,
                         int max_steps_per_edge, std::uint64_t seed);

// CSV with a leading "# start x y [z]" line, then
//   indoor: t,x,y,heading,v_l,v_r,waypoint
//   aerial: t,x,y,z,displacement,a_x,a_y,a_z,waypoint
// one row per step with the state after the step. Numbers are written in
// shortest round-trip form.
std::string trajectory_csv(const TrajectoryRecord& record);
void export_trajectory(const TrajectoryRecord& record, const std::string& path);

// Rebuilds steps, length and duration from a CSV written by export_trajectory.
// Outcome fields are not stored and come back as defaults.
TrajectoryRecord parse_trajectory(const std::string& text, const std::string& source = "trajectory");
TrajectoryRecord import_trajectory(const std::string& path);

// ----------------------------------------------------------------- experiments

struct MapCase {
  std::string name;
  World world;
};

struct ExperimentConfig {
  std::vector<double> densities{0.4};
  std::vector<PlannerKind> planners{PlannerKind::sl, PlannerKind::rl};
  int n_queries = 100;
  std::uint64_t seed = 1;
  PathWeight weight = PathWeight::length;
  Scenario scenario;
  std::optional<Policy> policy;  // drives every execution; required
  std::string out_dir;           // empty: write nothing
};

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  int count = 0;
};

Stat describe(const std::vector<double>& values);

struct ReportRow {
  std::string map;
  TaskKind task = TaskKind::indoor;
  double density = 0.0;
  PlannerKind planner = PlannerKind::sl;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t collision_checks = 0;
  int queries = 0;
  int paths = 0;      // queries that returned a path
  int successes = 0;  // executions that reached the goal
  double expected_success = std::numeric_limits<double>::quiet_NaN();  // mean over returned paths
  double actual_success = std::numeric_limits<double>::quiet_NaN();    // successes / paths
  double query_success = std::numeric_limits<double>::quiet_NaN();     // successes / queries
  Stat expected_waypoints, actual_waypoints;
  Stat expected_length, actual_length;
  Stat expected_duration, actual_duration;
  int collisions = 0, timeouts = 0, constraint_violations = 0, no_path = 0;
  double max_displacement = 0.0;  // aerial, over every executed step
  std::string roadmap_file;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
};

// Builds one roadmap per (map, density, planner), then runs n_queries seeded
// start/goal pairs through query and execute. Query pairs and execution seeds
// depend only on (seed, map, query index), so every row sees the same pairs.
ExperimentReport run_experiment(const std::vector<MapCase>& maps, const ExperimentConfig& cfg);

// One row per (map, density, planner); fixed six-decimal numbers.
std::string report_csv(const ExperimentReport& report);

}  // namespace prmrl
