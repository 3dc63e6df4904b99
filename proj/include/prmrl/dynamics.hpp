#pragma once

#include <array>

#include <Eigen/Core>

#include "prmrl/common.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

// ----------------------------------------------------------------- indoor

struct DiffDriveState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  ConfigPoint position() const { return {x, y, 0.0}; }
};

struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
};

struct DiffDriveParams {
  double dt = 0.2;           // 5 Hz
  double track_width = 0.5;  // m
  double v_max = 1.0;        // m/s per wheel
};

// Unicycle with v = (l + r)/2, w = (r - l)/track, integrated exactly along the arc.
// Wheel speeds are clamped to [-v_max, v_max].
DiffDriveState diffdrive_step(const DiffDriveState& state, WheelSpeeds action, double dt,
                              const DiffDriveParams& params = {});

struct Lidar {
  static constexpr int kRays = 64;
  static constexpr double kFieldOfView = 220.0 * kPi / 180.0;
  static constexpr double kMaxRange = 5.0;

  // Bearing of ray k relative to the heading; ray 0 is the rightmost.
  static double ray_offset(int k) { return -kFieldOfView / 2 + kFieldOfView * k / (kRays - 1); }
};

struct IndoorObservation {
  static constexpr int kDim = 2 + Lidar::kRays;

  double goal_range = 0.0;
  double goal_bearing = 0.0;  // robot frame, (-pi, pi]
  std::array<double, Lidar::kRays> scan{};

  // [goal_range, goal_bearing, scan...]
  Eigen::VectorXd to_vector() const;
  static IndoorObservation from_vector(const Eigen::VectorXd& v);
};

struct NoiseModel {
  double sensor_sigma = 0.1;  // m, added to each LIDAR range
};

// 64 rays over 220 degrees centered on the heading, each perturbed by
// N(0, sigma) then clamped to [0, 5]. sigma == 0 draws nothing from rng.
IndoorObservation observe_indoor(const OccupancyGrid& grid, const DiffDriveState& state, const ConfigPoint& goal,
                                 const NoiseModel& noise, Rng& rng);

bool task_predicate(const DiffDriveState& state, const OccupancyGrid& grid);

// ----------------------------------------------------------------- aerial

// Quadrotor center of mass plus a suspended load on a rigid cable.
// Load direction from the quad: (sin phi cos psi, sin psi, -cos phi cos psi),
// so eta = 0 hangs straight down.
struct QuadLoadState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector2d eta = Eigen::Vector2d::Zero();       // (psi, phi)
  Eigen::Vector2d eta_rate = Eigen::Vector2d::Zero();  // (psi_dot, phi_dot)

  static constexpr int kDim = 10;

  Eigen::Matrix<double, 10, 1> to_vector() const;
  static QuadLoadState from_vector(const Eigen::Matrix<double, 10, 1>& v);
};

struct QuadLoadParams {
  double dt = 0.02;              // 50 Hz
  double pendulum_length = 0.62; // m
  double gravity = 9.81;
  double a_max = 5.0;            // per-axis commanded acceleration bound
};

// Quad is a kinematic double integrator under zero-order-hold acceleration;
// the load is a spherical pendulum driven by that acceleration (RK4).
QuadLoadState quadload_step(const QuadLoadState& state, const Eigen::Vector3d& accel, double dt,
                            const QuadLoadParams& params = {});

Eigen::Vector3d load_direction(const Eigen::Vector2d& eta);
// d/dt of load_direction.
Eigen::Vector3d load_direction_rate(const Eigen::Vector2d& eta, const Eigen::Vector2d& eta_rate);

// Angle between the cable and straight down, in [0, pi].
double load_displacement(const QuadLoadState& state);

// Pendulum energy per unit mass in the quad frame with zero commanded
// acceleration (zero at the bottom).
double pendulum_energy(const QuadLoadState& state, const QuadLoadParams& params = {});

bool task_predicate(const QuadLoadState& state, const AerialWorkspace& space, double displacement_bound);

}  // namespace prmrl
