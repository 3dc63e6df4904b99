#include "prmrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prmrl {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd reference_params(TaskKind task) {
  Eigen::VectorXd p(Policy::parameter_count(task));
  if (task == TaskKind::indoor) {
    p << 1.5,                                      // bearing gain
        1.0, 2.0, 3.0, 4.0, -4.0, -3.0, -2.0, -1.0,  // sector repulsion, right to left
        1.0,                                       // blocked-front turn bias
        3.0, 1.5, 4.0;                             // speed bias, bearing slowdown, front slowdown
  } else {
    p << 0.8, 2.0, 1.0, 1.0, 0.0, 3.0;
  }
  return p;
}

Eigen::Vector3d cap_norm(const Eigen::Vector3d& v, double limit) {
  const double n = v.norm();
  return n > limit && n > 0.0 ? Eigen::Vector3d(v * (limit / n)) : v;
}

Policy require_task(Policy policy, TaskKind task) {
  if (policy.task() != task) {
    fail(ErrorCategory::invalid_argument, std::string(to_string(task)) + " system needs a matching policy");
  }
  return policy;
}

}  // namespace

Policy::Policy(TaskKind task, Eigen::VectorXd params, Bounds bounds)
    : task_(task), params_(std::move(params)), bounds_(bounds) {
  if (params_.size() != parameter_count(task)) {
    fail(ErrorCategory::invalid_argument, std::string(to_string(task)) + " policy needs " +
                                              std::to_string(parameter_count(task)) + " parameters");
  }
  if (!params_.allFinite()) fail(ErrorCategory::invalid_argument, "policy parameters must be finite");
}

Policy Policy::reference(TaskKind task, Bounds bounds) { return Policy(task, reference_params(task), bounds); }

WheelSpeeds Policy::act(const IndoorObservation& obs) const {
  if (task_ != TaskKind::indoor) fail(ErrorCategory::invalid_argument, "aerial policy given an indoor observation");
  const auto& p = params_;
  constexpr int per_sector = Lidar::kRays / kSectors;
  double q[kSectors];
  for (int k = 0; k < kSectors; ++k) {
    const auto first = obs.scan.begin() + k * per_sector;
    const double nearest = *std::min_element(first, first + per_sector);
    q[k] = std::clamp((kProximityRange - nearest) / kProximityRange, 0.0, 1.0);
  }
  const double q_front = std::max(q[kSectors / 2 - 1], q[kSectors / 2]);
  const double bearing = obs.goal_bearing;

  double u = p[0] * bearing + p[9] * q_front;
  for (int k = 0; k < kSectors; ++k) u += p[1 + k] * q[k];
  const double w_max = 2.0 * bounds_.v_max / bounds_.track_width;
  const double turn = w_max * std::tanh(u);
  const double speed = bounds_.v_max * logistic(p[10] - p[11] * std::abs(bearing) - p[12] * q_front);

  const double half = 0.5 * turn * bounds_.track_width;
  return {std::clamp(speed - half, -bounds_.v_max, bounds_.v_max),
          std::clamp(speed + half, -bounds_.v_max, bounds_.v_max)};
}

Eigen::Vector3d Policy::act(const QuadLoadState& state, const ConfigPoint& goal) const {
  if (task_ != TaskKind::aerial) fail(ErrorCategory::invalid_argument, "indoor policy given an aerial state");
  const auto& p = params_;
  const Eigen::Vector3d v_des = cap_norm(std::abs(p[0]) * (goal - state.position), std::abs(p[2]));
  Eigen::Vector3d a = cap_norm(std::abs(p[1]) * (v_des - state.velocity), std::abs(p[3]));
  const Eigen::Vector3d r = load_direction(state.eta);
  const Eigen::Vector3d r_dot = load_direction_rate(state.eta, state.eta_rate);
  a.x() += p[4] * r.x() + p[5] * r_dot.x();
  a.y() += p[4] * r.y() + p[5] * r_dot.y();
  return a.cwiseMax(-bounds_.a_max).cwiseMin(bounds_.a_max);
}

Eigen::VectorXd Policy::act(const Eigen::VectorXd& observation) const {
  if (task_ == TaskKind::indoor) {
    const WheelSpeeds w = act(IndoorObservation::from_vector(observation));
    return Eigen::Vector2d(w.left, w.right);
  }
  if (observation.size() != QuadLoadState::kDim + 3) {
    fail(ErrorCategory::invalid_argument, "aerial observation must have 13 entries, got " +
                                              std::to_string(observation.size()));
  }
  const auto state = QuadLoadState::from_vector(observation.head<10>());
  return act(state, ConfigPoint(observation.tail<3>()));
}

Policy::Bounds policy_bounds(const Scenario& scenario) {
  return {scenario.indoor.drive.v_max, scenario.indoor.drive.track_width, scenario.aerial.quad.a_max};
}

// ------------------------------------------------------------------ file format

std::string to_text(const Policy& policy) {
  std::string out = "prmrl-policy 1\n";
  out += "task " + std::string(to_string(policy.task())) + "\n";
  if (policy.task() == TaskKind::indoor) {
    out += "features sectors=" + std::to_string(Policy::kSectors) +
           " proximity_range=" + format_double(Policy::kProximityRange) + "\n";
  } else {
    out += "features state10+goal3\n";
  }
  const auto& b = policy.bounds();
  out += "bounds v_max=" + format_double(b.v_max) + " track_width=" + format_double(b.track_width) +
         " a_max=" + format_double(b.a_max) + "\n";
  out += "params " + std::to_string(policy.params().size());
  for (double v : policy.params()) out += " " + format_double(v);
  out += "\ntraining_seed " + std::to_string(policy.training_seed) + "\n";
  out += "fitness " + format_double(policy.fitness_success) + " " + format_double(policy.fitness_return) + "\n";
  out += "end\n";
  return out;
}

Policy parse_policy(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next_line = [&](const char* expected) {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, std::string("expected '") + expected + "'");
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expected) throw ParseError(source, line_no, std::string("expected '") + expected + "'");
    std::vector<std::string> rest;
    for (std::string tok; ls >> tok;) rest.push_back(tok);
    return rest;
  };
  auto parse_at = [&](auto fn) {
    try {
      return fn();
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  };

  const auto header = next_line("prmrl-policy");
  if (header.size() != 1 || header[0] != "1") throw ParseError(source, line_no, "unsupported policy version");
  const auto task_tok = next_line("task");
  if (task_tok.size() != 1) throw ParseError(source, line_no, "expected one task tag");
  const TaskKind task = parse_at([&] { return parse_task(task_tok[0]); });
  next_line("features");
  const auto bounds_tok = next_line("bounds");
  Policy::Bounds bounds;
  for (const auto& tok : bounds_tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value in bounds");
    const std::string key = tok.substr(0, eq);
    const double v = parse_at([&] { return parse_double(tok.substr(eq + 1)); });
    if (key == "v_max") bounds.v_max = v;
    else if (key == "track_width") bounds.track_width = v;
    else if (key == "a_max") bounds.a_max = v;
    else throw ParseError(source, line_no, "unknown bound '" + key + "'");
  }
  const auto params_tok = next_line("params");
  if (params_tok.empty()) throw ParseError(source, line_no, "missing parameter count");
  const auto n = parse_at([&] { return parse_int(params_tok[0]); });
  if (n != static_cast<long long>(params_tok.size()) - 1) throw ParseError(source, line_no, "parameter count mismatch");
  Eigen::VectorXd params(n);
  for (long long k = 0; k < n; ++k) params[k] = parse_at([&] { return parse_double(params_tok[k + 1]); });
  const auto seed_tok = next_line("training_seed");
  const auto fit_tok = next_line("fitness");
  if (seed_tok.size() != 1 || fit_tok.size() != 2) throw ParseError(source, line_no, "malformed provenance");
  Policy policy = parse_at([&] { return Policy(task, params, bounds); });
  policy.training_seed = std::stoull(seed_tok[0]);
  policy.fitness_success = parse_at([&] { return parse_double(fit_tok[0]); });
  policy.fitness_return = parse_at([&] { return parse_double(fit_tok[1]); });
  next_line("end");
  return policy;
}

void save_policy(const Policy& policy, const std::string& path) { write_text_file(path, to_text(policy)); }

Policy load_policy(const std::string& path) { return parse_policy(read_text_file(path), path); }

// ---------------------------------------------------------------------- rewards

double indoor_reward(const ConfigPoint& position, const IndoorObservation& obs, const ConfigPoint& goal,
                     const RewardConfig& cfg, double goal_tolerance) {
  const double d = (position.head<2>() - goal.head<2>()).norm();
  const double clearance = *std::min_element(obs.scan.begin(), obs.scan.end());
  return (d <= goal_tolerance ? cfg.goal_reward : 0.0) - cfg.step_penalty + cfg.clearance_weight * clearance;
}

double aerial_reward(const QuadLoadState& state, const ConfigPoint& goal, const RewardConfig& cfg,
                     double goal_tolerance, bool at_rest) {
  const bool reached = (state.position - goal).norm() <= goal_tolerance && at_rest;
  return (reached ? cfg.goal_reward : 0.0) - cfg.displacement_weight * load_displacement(state) - cfg.step_penalty;
}

// ---------------------------------------------------------------------- systems

IndoorSystem::IndoorSystem(const OccupancyGrid& grid, IndoorParams params, Controller controller)
    : grid_(&grid), params_(params), controller_(std::move(controller)) {}

IndoorSystem::IndoorSystem(const OccupancyGrid& grid, IndoorParams params, Policy policy)
    : IndoorSystem(grid, params, [p = require_task(std::move(policy), TaskKind::indoor)](const IndoorObservation& obs) {
        return p.act(obs);
      }) {}

IndoorSystem::State IndoorSystem::sample_state(const ConfigPoint& c, Rng& rng) const {
  if (!is_free(c)) fail(ErrorCategory::invalid_argument, "configuration is not free");
  return {c.x(), c.y(), angle_wrap(uniform(rng, -kPi, kPi))};
}

bool IndoorSystem::arrived(const State& s, const ConfigPoint& goal, double eps) const {
  return std::hypot(s.x - goal.x(), s.y - goal.y()) <= eps;
}

Transition<IndoorSystem::State, IndoorSystem::Action> IndoorSystem::advance(const State& s, const ConfigPoint& goal,
                                                                            Rng& rng, const RewardConfig& reward,
                                                                            double eps) const {
  const IndoorObservation obs = observe_indoor(*grid_, s, goal, params_.noise, rng);
  const WheelSpeeds action = controller_(obs);
  Transition<State, Action> tr{diffdrive_step(s, action, params_.drive.dt, params_.drive), action, 0.0};
  tr.reward = indoor_reward(tr.next.position(), obs, goal, reward, eps);
  return tr;
}

AerialSystem::AerialSystem(const AerialWorkspace& space, AerialParams params, Controller controller)
    : space_(&space), params_(params), controller_(std::move(controller)) {}

AerialSystem::AerialSystem(const AerialWorkspace& space, AerialParams params, Policy policy)
    : AerialSystem(space, params,
                   [p = require_task(std::move(policy), TaskKind::aerial)](const QuadLoadState& s,
                                                                           const ConfigPoint& goal) {
                     return p.act(s, goal);
                   }) {}

AerialSystem::State AerialSystem::sample_state(const ConfigPoint& c, Rng& rng) const {
  if (!is_free(c)) fail(ErrorCategory::invalid_argument, "configuration is not free");
  State s;
  s.position = c;
  s.eta = {uniform(rng, -params_.start_swing, params_.start_swing), uniform(rng, -params_.start_swing, params_.start_swing)};
  return s;
}

bool AerialSystem::arrived(const State& s, const ConfigPoint& goal, double eps) const {
  return (s.position - goal).norm() <= eps && s.velocity.norm() <= params_.rest_speed &&
         load_displacement(s) <= params_.rest_displacement;
}

Transition<AerialSystem::State, AerialSystem::Action> AerialSystem::advance(const State& s, const ConfigPoint& goal,
                                                                            Rng&, const RewardConfig& reward,
                                                                            double eps) const {
  const Eigen::Vector3d a = controller_(s, goal);
  Transition<State, Action> tr{quadload_step(s, a, params_.quad.dt, params_.quad), a, 0.0};
  const bool at_rest = tr.next.velocity.norm() <= params_.rest_speed;
  tr.reward = aerial_reward(tr.next, goal, reward, eps, at_rest);
  return tr;
}

// ----------------------------------------------------------------- evaluation

PolicyEvaluation summarize_episodes(const std::vector<EpisodeResult>& episodes) {
  PolicyEvaluation out;
  out.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return out;
  int successes = 0;
  double length = 0.0;
  double steps = 0.0;
  double ret = 0.0;
  for (const auto& e : episodes) {
    ret += e.discounted_return;
    if (!e.success) continue;
    ++successes;
    length += e.length;
    steps += e.steps;
  }
  out.success_rate = double(successes) / episodes.size();
  out.mean_return = ret / episodes.size();
  if (successes > 0) {
    out.mean_length = length / successes;
    out.mean_steps = steps / successes;
  }
  return out;
}

}  // namespace prmrl
