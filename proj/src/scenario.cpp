#include "prmrl/scenario.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace prmrl {

void EdgeEvalParams::validate() const {
  if (!(p_success >= 0.0 && p_success <= 1.0)) fail(ErrorCategory::invalid_argument, "p_success must be in [0, 1]");
  if (num_attempts < 1) fail(ErrorCategory::invalid_argument, "num_attempts must be >= 1");
  if (!(goal_tolerance > 0.0)) fail(ErrorCategory::invalid_argument, "goal tolerance must be positive");
  if (max_steps < 1) fail(ErrorCategory::invalid_argument, "max_steps must be >= 1");
  if (!(connection_radius > 0.0)) fail(ErrorCategory::invalid_argument, "connection radius must be positive");
}

void RewardConfig::validate() const {
  if (!(discount > 0.0 && discount <= 1.0)) fail(ErrorCategory::invalid_argument, "discount must be in (0, 1]");
}

int Scenario::max_steps(TaskKind task) const {
  if (edge.max_steps > 0) return edge.max_steps;
  const double speed = task == TaskKind::indoor ? indoor.drive.v_max : aerial.cruise_speed;
  return static_cast<int>(std::ceil(4.0 * edge.connection_radius / (speed * dt(task)) - 1e-9));
}

EdgeEvalParams Scenario::edge_params(TaskKind task) const {
  EdgeEvalParams p = edge;
  p.max_steps = max_steps(task);
  return p;
}

namespace {

struct Field {
  const char* key;
  std::function<double&(Scenario&)> ref;
  bool degrees = false;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"indoor.dt", [](Scenario& s) -> double& { return s.indoor.drive.dt; }},
      {"indoor.track_width", [](Scenario& s) -> double& { return s.indoor.drive.track_width; }},
      {"indoor.v_max", [](Scenario& s) -> double& { return s.indoor.drive.v_max; }},
      {"indoor.sensor_sigma", [](Scenario& s) -> double& { return s.indoor.noise.sensor_sigma; }},
      {"aerial.dt", [](Scenario& s) -> double& { return s.aerial.quad.dt; }},
      {"aerial.a_max", [](Scenario& s) -> double& { return s.aerial.quad.a_max; }},
      {"aerial.pendulum_length", [](Scenario& s) -> double& { return s.aerial.quad.pendulum_length; }},
      {"aerial.gravity", [](Scenario& s) -> double& { return s.aerial.quad.gravity; }},
      {"aerial.displacement_bound_deg", [](Scenario& s) -> double& { return s.aerial.displacement_bound; }, true},
      {"aerial.rest_speed", [](Scenario& s) -> double& { return s.aerial.rest_speed; }},
      {"aerial.rest_displacement_deg", [](Scenario& s) -> double& { return s.aerial.rest_displacement; }, true},
      {"aerial.start_swing_deg", [](Scenario& s) -> double& { return s.aerial.start_swing; }, true},
      {"aerial.cruise_speed", [](Scenario& s) -> double& { return s.aerial.cruise_speed; }},
      {"edge.p_success", [](Scenario& s) -> double& { return s.edge.p_success; }},
      {"edge.goal_tolerance", [](Scenario& s) -> double& { return s.edge.goal_tolerance; }},
      {"edge.connection_radius", [](Scenario& s) -> double& { return s.edge.connection_radius; }},
      {"reward.goal", [](Scenario& s) -> double& { return s.reward.goal_reward; }},
      {"reward.step_penalty", [](Scenario& s) -> double& { return s.reward.step_penalty; }},
      {"reward.clearance_weight", [](Scenario& s) -> double& { return s.reward.clearance_weight; }},
      {"reward.displacement_weight", [](Scenario& s) -> double& { return s.reward.displacement_weight; }},
      {"reward.discount", [](Scenario& s) -> double& { return s.reward.discount; }},
  };
  return table;
}

}  // namespace

Scenario parse_scenario(const KeyValues& kv, const std::string& source) {
  Scenario s;
  for (const auto& [key, value] : kv) {
    if (key == "edge.num_attempts") {
      s.edge.num_attempts = static_cast<int>(parse_int(value));
      continue;
    }
    if (key == "edge.max_steps") {
      s.edge.max_steps = static_cast<int>(parse_int(value));
      continue;
    }
    bool known = false;
    for (const auto& f : fields()) {
      if (key != f.key) continue;
      const double v = parse_double(value);
      f.ref(s) = f.degrees ? deg2rad(v) : v;
      known = true;
      break;
    }
    if (!known) fail(ErrorCategory::parse, source + ": unknown key '" + key + "'");
  }
  if (!(s.indoor.drive.dt > 0.0) || !(s.aerial.quad.dt > 0.0)) fail(ErrorCategory::invalid_argument, "dt must be positive");
  if (!(s.indoor.noise.sensor_sigma >= 0.0)) fail(ErrorCategory::invalid_argument, "sensor sigma must be >= 0");
  if (s.edge.max_steps < 0) fail(ErrorCategory::invalid_argument, "edge.max_steps must be >= 0");
  s.reward.validate();
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_key_values(path), path); }

std::string to_text(const Scenario& scenario) {
  Scenario copy = scenario;
  std::string out;
  for (const auto& f : fields()) {
    const double v = f.ref(copy);
    out += std::string(f.key) + "=" + format_double(f.degrees ? rad2deg(v) : v) + "\n";
  }
  out += "edge.num_attempts=" + std::to_string(scenario.edge.num_attempts) + "\n";
  out += "edge.max_steps=" + std::to_string(scenario.edge.max_steps) + "\n";
  return out;
}

}  // namespace prmrl
