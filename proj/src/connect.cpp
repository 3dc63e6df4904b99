#include "prmrl/connect.hpp"

#include <cmath>
#include <string>

namespace prmrl {

EdgeEvalResult sl_connect(const World& world, const ConfigPoint& s, const ConfigPoint& g, const EdgeEvalParams& params,
                          double nominal_step) {
  params.validate();
  if (!world.is_free(s) || !world.is_free(g)) fail(ErrorCategory::invalid_argument, "edge endpoints must be free");
  const SegmentCheck check = world.check_segment(s, g, world.collision_step());
  EdgeEvalResult out;
  out.trials = 1;
  out.collision_checks = check.checks;
  out.accepted = check.free;
  if (check.free) {
    out.successes = 1;
    out.success_rate = 1.0;
    out.mean_length = (g - s).norm();
    out.mean_steps = nominal_step > 0.0 ? out.mean_length / nominal_step : 0.0;
  }
  return out;
}

std::string_view to_string(PlannerKind kind) { return kind == PlannerKind::sl ? "sl" : "rl"; }

PlannerKind parse_planner(std::string_view text) {
  if (text == "sl") return PlannerKind::sl;
  if (text == "rl") return PlannerKind::rl;
  fail(ErrorCategory::invalid_argument, "unknown planner '" + std::string(text) + "' (expected sl or rl)");
}

LocalPlanner::LocalPlanner(const World& world, EdgeEvalParams params) : world_(&world), params_(params) {
  params_.validate();
}

SlPlanner::SlPlanner(const World& world, EdgeEvalParams params, double nominal_step)
    : LocalPlanner(world, params), nominal_step_(nominal_step) {}

EdgeEvalResult SlPlanner::connect(const ConfigPoint& s, const ConfigPoint& g, std::uint64_t) const {
  return sl_connect(world(), s, g, params(), nominal_step_);
}

RlPlanner::RlPlanner(const World& world, System system, EdgeEvalParams params, RewardConfig reward)
    : LocalPlanner(world, params), system_(std::move(system)), reward_(reward) {
  const bool indoor = std::holds_alternative<IndoorSystem>(system_);
  if (indoor != (world.task() == TaskKind::indoor)) {
    fail(ErrorCategory::invalid_argument, "planner system does not match the world's task");
  }
}

EdgeEvalResult RlPlanner::connect(const ConfigPoint& s, const ConfigPoint& g, std::uint64_t seed) const {
  return std::visit([&](const auto& sys) { return rl_add_edge(sys, s, g, params(), seed, reward_); }, system_);
}

std::unique_ptr<LocalPlanner> make_planner(PlannerKind kind, const World& world, const Scenario& scenario,
                                           const std::optional<Policy>& policy) {
  const TaskKind task = world.task();
  const EdgeEvalParams params = scenario.edge_params(task);
  if (kind == PlannerKind::sl) {
    const double nominal = task == TaskKind::indoor ? scenario.indoor.drive.v_max * scenario.indoor.drive.dt
                                                    : scenario.aerial.cruise_speed * scenario.aerial.quad.dt;
    return std::make_unique<SlPlanner>(world, params, nominal);
  }
  if (!policy) fail(ErrorCategory::invalid_argument, "the rl planner needs a trained policy");
  if (policy->task() != task) fail(ErrorCategory::invalid_argument, "policy task does not match the map task");
  if (task == TaskKind::indoor) {
    return std::make_unique<RlPlanner>(world, IndoorSystem(world.grid(), scenario.indoor, *policy), params,
                                       scenario.reward);
  }
  return std::make_unique<RlPlanner>(world, AerialSystem(world.airspace(), scenario.aerial, *policy), params,
                                     scenario.reward);
}

}  // namespace prmrl
