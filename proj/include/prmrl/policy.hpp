#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "prmrl/common.hpp"
#include "prmrl/dynamics.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

struct PolicyBounds {
  double v_max = 1.0;
  double track_width = 0.5;
  double a_max = 5.0;
};

// Parameterized reactive controller; the greedy actor of a trained agent.
//
// Indoor (13 parameters) over goal polar coordinates and 8 pooled scan
// sectors of 8 rays each (sector 0 on the right). With proximity
// q_k = clamp((1.5 - min_k) / 1.5, 0, 1) and q_f = max(q_3, q_4):
//   turn  = w_max * tanh(k_b * bearing + sum_k w_k q_k + w_f q_f)
//   speed = v_max * logistic(s_0 - s_b |bearing| - s_f q_f)
//   params = [k_b, w_0..w_7, w_f, s_0, s_b, s_f]
//
// Aerial (6 parameters) over the R^10 state and the goal position:
//   v_des = kp (goal - p), capped at v_cruise
//   a     = kv (v_des - v), capped at a_pos, plus horizontal load feedback
//           k_s * r_h + k_r * d(r_h)/dt with r_h the cable direction's xy part
//   params = [kp, kv, v_cruise, a_pos, k_s, k_r]
class Policy {
 public:
  static constexpr int kIndoorParams = 13;
  static constexpr int kAerialParams = 6;
  static constexpr int kSectors = 8;
  static constexpr double kProximityRange = 1.5;

  using Bounds = PolicyBounds;

  Policy(TaskKind task, Eigen::VectorXd params, Bounds bounds = {});

  static Policy reference(TaskKind task, Bounds bounds = {});
  static int parameter_count(TaskKind task) { return task == TaskKind::indoor ? kIndoorParams : kAerialParams; }

  TaskKind task() const { return task_; }
  const Eigen::VectorXd& params() const { return params_; }
  const Bounds& bounds() const { return bounds_; }

  WheelSpeeds act(const IndoorObservation& obs) const;
  Eigen::Vector3d act(const QuadLoadState& state, const ConfigPoint& goal) const;
  // Flat form: indoor takes the 66-vector, aerial the 10-state followed by the goal (13).
  Eigen::VectorXd act(const Eigen::VectorXd& observation) const;

  // Provenance, written to the policy file.
  std::uint64_t training_seed = 0;
  double fitness_success = std::numeric_limits<double>::quiet_NaN();
  double fitness_return = std::numeric_limits<double>::quiet_NaN();

 private:
  TaskKind task_;
  Eigen::VectorXd params_;
  Bounds bounds_;
};

Policy::Bounds policy_bounds(const Scenario& scenario);

// Versioned text format:
//   prmrl-policy 1
//   task indoor|aerial
//   features sectors=8 proximity_range=1.5 | features state10+goal3
//   bounds v_max=<> track_width=<> a_max=<>
//   params <n> <p0> ... <pn-1>
//   training_seed <u64>
//   fitness <success_rate> <mean_return>
//   end
std::string to_text(const Policy& policy);
Policy parse_policy(const std::string& text, const std::string& source = "policy");
void save_policy(const Policy& policy, const std::string& path);
Policy load_policy(const std::string& path);

// Per-step rewards.
double indoor_reward(const ConfigPoint& position, const IndoorObservation& obs, const ConfigPoint& goal,
                     const RewardConfig& cfg, double goal_tolerance);
double aerial_reward(const QuadLoadState& state, const ConfigPoint& goal, const RewardConfig& cfg,
                     double goal_tolerance, bool at_rest);

// --------------------------------------------------------- closed-loop systems

template <class State, class Action>
struct Transition {
  State next;
  Action action;
  double reward = 0.0;
};

// A policy closed around a generative model: what rollouts, edge evaluation
// and training need. Stub systems in tests satisfy it too.
template <class S>
concept ClosedLoopSystem = requires(const S& sys, const typename S::State& state, const ConfigPoint& c, Rng& rng,
                                    const RewardConfig& reward, double eps) {
  typename S::Action;
  { sys.is_free(c) } -> std::convertible_to<bool>;
  { sys.sample_config(rng) } -> std::convertible_to<ConfigPoint>;
  { sys.sample_state(c, rng) } -> std::convertible_to<typename S::State>;
  { sys.project(state) } -> std::convertible_to<ConfigPoint>;
  { sys.valid(state) } -> std::convertible_to<bool>;
  { sys.arrived(state, c, eps) } -> std::convertible_to<bool>;
  { sys.step_length(state, state) } -> std::convertible_to<double>;
  { sys.advance(state, c, rng, reward, eps) } -> std::convertible_to<Transition<typename S::State, typename S::Action>>;
};

class IndoorSystem {
 public:
  using State = DiffDriveState;
  using Action = WheelSpeeds;
  using Controller = std::function<WheelSpeeds(const IndoorObservation&)>;

  // grid must outlive the system.
  IndoorSystem(const OccupancyGrid& grid, IndoorParams params, Controller controller);
  IndoorSystem(const OccupancyGrid& grid, IndoorParams params, Policy policy);

  const OccupancyGrid& grid() const { return *grid_; }
  const IndoorParams& params() const { return params_; }
  double dt() const { return params_.drive.dt; }

  bool is_free(const ConfigPoint& c) const { return prmrl::is_free(*grid_, c); }
  ConfigPoint sample_config(Rng& rng) const { return sample_free(*grid_, rng); }
  // Pose at c with heading uniform over (-pi, pi].
  State sample_state(const ConfigPoint& c, Rng& rng) const;
  ConfigPoint project(const State& s) const { return s.position(); }
  bool valid(const State& s) const { return task_predicate(s, *grid_); }
  bool arrived(const State& s, const ConfigPoint& goal, double eps) const;
  double step_length(const State& a, const State& b) const { return std::hypot(b.x - a.x, b.y - a.y); }
  Transition<State, Action> advance(const State& s, const ConfigPoint& goal, Rng& rng, const RewardConfig& reward,
                                    double eps) const;

 private:
  const OccupancyGrid* grid_;
  IndoorParams params_;
  Controller controller_;
};

class AerialSystem {
 public:
  using State = QuadLoadState;
  using Action = Eigen::Vector3d;
  using Controller = std::function<Eigen::Vector3d(const QuadLoadState&, const ConfigPoint&)>;

  // space must outlive the system.
  AerialSystem(const AerialWorkspace& space, AerialParams params, Controller controller);
  AerialSystem(const AerialWorkspace& space, AerialParams params, Policy policy);

  const AerialWorkspace& space() const { return *space_; }
  const AerialParams& params() const { return params_; }
  double dt() const { return params_.quad.dt; }

  bool is_free(const ConfigPoint& c) const { return space_->is_free(c); }
  ConfigPoint sample_config(Rng& rng) const { return space_->sample_free(rng); }
  // Hover at c, zero velocity, load angles uniform within +-start_swing.
  State sample_state(const ConfigPoint& c, Rng& rng) const;
  ConfigPoint project(const State& s) const { return s.position; }
  bool valid(const State& s) const { return task_predicate(s, *space_, params_.displacement_bound); }
  // Within eps and at rest.
  bool arrived(const State& s, const ConfigPoint& goal, double eps) const;
  double step_length(const State& a, const State& b) const { return (b.position - a.position).norm(); }
  Transition<State, Action> advance(const State& s, const ConfigPoint& goal, Rng& rng, const RewardConfig& reward,
                                    double eps) const;

 private:
  const AerialWorkspace* space_;
  AerialParams params_;
  Controller controller_;
};

// Builds the closed-loop system for world's task and hands it to f.
template <class F>
auto with_system(const World& world, const Scenario& scenario, const Policy& policy, F&& f) {
  if (world.task() == TaskKind::indoor) {
    const IndoorSystem sys(world.grid(), scenario.indoor, policy);
    return f(sys);
  }
  const AerialSystem sys(world.airspace(), scenario.aerial, policy);
  return f(sys);
}

// ------------------------------------------------------------------ rollouts

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  double length = 0.0;  // sum of step displacements, m
  double discounted_return = 0.0;
};

// Runs the closed loop from start toward goal until arrival, a predicate
// violation, or max_steps. Throws if start violates the task predicate.
template <ClosedLoopSystem S>
EpisodeResult rollout_episode(const S& sys, const typename S::State& start, const ConfigPoint& goal, int max_steps,
                              double eps, const RewardConfig& reward, Rng& rng) {
  if (!sys.valid(start)) fail(ErrorCategory::invalid_argument, "episode start violates the task predicate");
  EpisodeResult out;
  auto state = start;
  double discount = 1.0;
  while (!sys.arrived(state, goal, eps) && out.steps < max_steps) {
    const auto tr = sys.advance(state, goal, rng, reward, eps);
    out.length += sys.step_length(state, tr.next);
    out.discounted_return += discount * tr.reward;
    discount *= reward.discount;
    state = tr.next;
    ++out.steps;
    if (!sys.valid(state)) return out;
  }
  out.success = sys.arrived(state, goal, eps);
  return out;
}

struct EpisodeSampling {
  int max_steps = 200;
  double goal_tolerance = 0.5;
  double min_goal_distance = 1.0;
  double max_goal_distance = 8.0;
};

struct PolicyEvaluation {
  double success_rate = 0.0;
  double mean_length = std::numeric_limits<double>::quiet_NaN();  // successful episodes
  double mean_steps = std::numeric_limits<double>::quiet_NaN();   // successful episodes
  double mean_return = 0.0;                                       // all episodes
  int episodes = 0;
};

// Start/goal pair for episode k of a seeded evaluation; identical for every
// policy evaluated under the same seed.
template <ClosedLoopSystem S>
std::pair<ConfigPoint, ConfigPoint> sample_episode_endpoints(const S& sys, const EpisodeSampling& sampling, Rng& rng) {
  const ConfigPoint start = sys.sample_config(rng);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const ConfigPoint goal = sys.sample_config(rng);
    const double d = (goal - start).norm();
    if (d >= sampling.min_goal_distance && d <= sampling.max_goal_distance) return {start, goal};
  }
  return {start, start};
}

template <ClosedLoopSystem S>
EpisodeResult run_seeded_episode(const S& sys, const EpisodeSampling& sampling, const RewardConfig& reward,
                                 std::uint64_t episode_seed) {
  Rng rng(episode_seed);
  const auto [start, goal] = sample_episode_endpoints(sys, sampling, rng);
  const auto state = sys.sample_state(start, rng);
  return rollout_episode(sys, state, goal, sampling.max_steps, sampling.goal_tolerance, reward, rng);
}

PolicyEvaluation summarize_episodes(const std::vector<EpisodeResult>& episodes);

// Monte Carlo statistics over `episodes` seeded episodes; deterministic in seed.
template <ClosedLoopSystem S>
PolicyEvaluation evaluate_policy(const S& sys, int episodes, std::uint64_t seed, const EpisodeSampling& sampling,
                                 const RewardConfig& reward = {}) {
  if (episodes < 1) fail(ErrorCategory::invalid_argument, "episodes must be >= 1");
  std::vector<EpisodeResult> results;
  results.reserve(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) results.push_back(run_seeded_episode(sys, sampling, reward, mix_seed(seed, k)));
  return summarize_episodes(results);
}

}  // namespace prmrl
