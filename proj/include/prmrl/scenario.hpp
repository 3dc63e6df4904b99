#pragma once

#include <string>

#include "prmrl/common.hpp"
#include "prmrl/dynamics.hpp"

namespace prmrl {

struct IndoorParams {
  DiffDriveParams drive;
  NoiseModel noise;
};

struct AerialParams {
  QuadLoadParams quad;
  double displacement_bound = deg2rad(45.0);  // task predicate; 10 deg for the hardware-scale scenario
  double rest_speed = 0.1;                    // m/s, arrival requires coming to rest
  double rest_displacement = deg2rad(5.0);
  double start_swing = deg2rad(5.0);          // load angles sampled within +-start_swing
  double cruise_speed = 1.0;                  // m/s, sizes the default step cap
};

// Edge evaluation settings shared by both local planners.
struct EdgeEvalParams {
  double p_success = 0.85;
  int num_attempts = 20;
  double goal_tolerance = 0.5;  // epsilon, m
  int max_steps = 0;            // 0: derive from connection radius, speed and dt
  double connection_radius = 10.0;

  void validate() const;
};

struct RewardConfig {
  double goal_reward = 1.0;
  double step_penalty = 0.01;
  double clearance_weight = 0.01;     // indoor
  double displacement_weight = 0.1;   // aerial, per radian
  double discount = 0.99;

  void validate() const;
};

// Everything about a run except the map and the policy. Read from a
// key=value file; unknown keys are rejected.
//
//   indoor.dt  indoor.track_width  indoor.v_max  indoor.sensor_sigma
//   aerial.dt  aerial.a_max  aerial.pendulum_length  aerial.gravity
//   aerial.displacement_bound_deg  aerial.rest_speed  aerial.rest_displacement_deg
//   aerial.start_swing_deg  aerial.cruise_speed
//   edge.p_success  edge.num_attempts  edge.goal_tolerance  edge.max_steps
//   edge.connection_radius
//   reward.goal  reward.step_penalty  reward.clearance_weight
//   reward.displacement_weight  reward.discount
struct Scenario {
  IndoorParams indoor;
  AerialParams aerial;
  EdgeEvalParams edge;
  RewardConfig reward;

  double dt(TaskKind task) const { return task == TaskKind::indoor ? indoor.drive.dt : aerial.quad.dt; }
  // ceil(4 * connection_radius / (speed * dt)) unless edge.max_steps is set.
  int max_steps(TaskKind task) const;
  // edge with max_steps resolved for the task.
  EdgeEvalParams edge_params(TaskKind task) const;
};

Scenario parse_scenario(const KeyValues& kv, const std::string& source = "scenario");
Scenario load_scenario(const std::string& path);
std::string to_text(const Scenario& scenario);

}  // namespace prmrl
