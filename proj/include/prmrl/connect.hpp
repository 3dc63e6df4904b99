#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>

#include "prmrl/common.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

struct EdgeEvalResult {
  bool accepted = false;
  double success_rate = 0.0;
  double mean_length = 0.0;  // over successful trials; NaN when a completed call has none
  double mean_steps = 0.0;   // over successful trials
  std::size_t collision_checks = 0;
  int trials = 0;  // trials actually run
  int successes = 0;
  bool early_terminated = false;
};

// Straight-line baseline: one trial, accepted iff the interpolated segment is
// free. collision_checks counts interpolation points tested (the check stops
// at the first hit). mean_steps is length / nominal_step when nominal_step > 0.
EdgeEvalResult sl_connect(const World& world, const ConfigPoint& s, const ConfigPoint& g, const EdgeEvalParams& params,
                          double nominal_step = 0.0);

// State-space sample projecting exactly onto c.
template <ClosedLoopSystem S>
typename S::State sample_state_space(const S& sys, const ConfigPoint& c, Rng& rng) {
  if (!sys.is_free(c)) fail(ErrorCategory::invalid_argument, "cannot sample a state at a non-free configuration");
  return sys.sample_state(c, rng);
}

// Monte Carlo edge check. Trials run in index order, trial i seeded with
// mix_seed(seed, i), and each simulated step counts as one collision check.
// An edge is accepted iff successes / num_attempts > p_success. Once trial
// index i exceeds needed = p_success * num_attempts and even a clean sweep of
// the remaining trials could not lift successes above needed, the call stops
// and reports (false, 0, 0) with early_terminated set.
template <ClosedLoopSystem S>
EdgeEvalResult rl_add_edge(const S& sys, const ConfigPoint& s, const ConfigPoint& g, const EdgeEvalParams& params,
                           std::uint64_t seed, const RewardConfig& reward = {}) {
  params.validate();
  if (!sys.is_free(s) || !sys.is_free(g)) fail(ErrorCategory::invalid_argument, "edge endpoints must be free");

  const double needed = params.p_success * params.num_attempts;
  const double eps = params.goal_tolerance;
  EdgeEvalResult out;
  double length = 0.0;
  double steps_sum = 0.0;
  for (int i = 1; i <= params.num_attempts; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    auto state = sample_state_space(sys, s, rng);
    const auto goal_state = sample_state_space(sys, g, rng);
    const ConfigPoint goal = sys.project(goal_state);

    int steps = 0;
    double trial_length = 0.0;
    while (sys.valid(state) && steps < params.max_steps && !sys.arrived(state, goal, eps)) {
      auto tr = sys.advance(state, goal, rng, reward, eps);
      ++steps;
      trial_length += sys.step_length(state, tr.next);
      state = std::move(tr.next);
    }
    out.collision_checks += static_cast<std::size_t>(steps);
    out.trials = i;
    const bool success = sys.valid(state) && sys.arrived(state, goal, eps);
    if (success) {
      ++out.successes;
      length += trial_length + (sys.project(state) - goal).norm();
      steps_sum += steps;
    }
    const int remaining = params.num_attempts - i;
    if (needed >= out.successes + remaining && i > needed) {
      out.early_terminated = true;
      return out;
    }
  }
  out.success_rate = static_cast<double>(out.successes) / params.num_attempts;
  out.accepted = out.success_rate > params.p_success;
  if (out.successes > 0) {
    out.mean_length = length / out.successes;
    out.mean_steps = steps_sum / out.successes;
  } else {
    out.mean_length = std::numeric_limits<double>::quiet_NaN();
    out.mean_steps = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

enum class PlannerKind { sl, rl };

std::string_view to_string(PlannerKind kind);
PlannerKind parse_planner(std::string_view text);

class LocalPlanner {
 public:
  virtual ~LocalPlanner() = default;

  virtual PlannerKind kind() const = 0;
  // Whether connect(s, g) == connect(g, s), letting a build evaluate each pair once.
  virtual bool symmetric() const = 0;
  virtual EdgeEvalResult connect(const ConfigPoint& s, const ConfigPoint& g, std::uint64_t seed) const = 0;

  const World& world() const { return *world_; }
  const EdgeEvalParams& params() const { return params_; }

 protected:
  LocalPlanner(const World& world, EdgeEvalParams params);

 private:
  const World* world_;
  EdgeEvalParams params_;
};

class SlPlanner final : public LocalPlanner {
 public:
  SlPlanner(const World& world, EdgeEvalParams params, double nominal_step = 0.0);

  PlannerKind kind() const override { return PlannerKind::sl; }
  bool symmetric() const override { return true; }
  EdgeEvalResult connect(const ConfigPoint& s, const ConfigPoint& g, std::uint64_t seed) const override;

 private:
  double nominal_step_;
};

class RlPlanner final : public LocalPlanner {
 public:
  using System = std::variant<IndoorSystem, AerialSystem>;

  // The system's workspace must be world's.
  RlPlanner(const World& world, System system, EdgeEvalParams params, RewardConfig reward = {});

  PlannerKind kind() const override { return PlannerKind::rl; }
  bool symmetric() const override { return false; }
  EdgeEvalResult connect(const ConfigPoint& s, const ConfigPoint& g, std::uint64_t seed) const override;

  const System& system() const { return system_; }

 private:
  System system_;
  RewardConfig reward_;
};

// Planner with the scenario's edge parameters resolved for the world's task.
// RL needs a policy for the same task.
std::unique_ptr<LocalPlanner> make_planner(PlannerKind kind, const World& world, const Scenario& scenario,
                                           const std::optional<Policy>& policy = std::nullopt);

}  // namespace prmrl
