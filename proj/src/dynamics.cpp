#include "prmrl/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace prmrl {

DiffDriveState diffdrive_step(const DiffDriveState& state, WheelSpeeds action, double dt,
                              const DiffDriveParams& params) {
  if (!(dt > 0.0)) fail(ErrorCategory::invalid_argument, "dt must be positive");
  const double l = std::clamp(action.left, -params.v_max, params.v_max);
  const double r = std::clamp(action.right, -params.v_max, params.v_max);
  const double v = 0.5 * (l + r);
  const double w = (r - l) / params.track_width;
  DiffDriveState next = state;
  if (std::abs(w) < 1e-12) {
    next.x += v * dt * std::cos(state.heading);
    next.y += v * dt * std::sin(state.heading);
  } else {
    const double h1 = state.heading + w * dt;
    next.x += v / w * (std::sin(h1) - std::sin(state.heading));
    next.y -= v / w * (std::cos(h1) - std::cos(state.heading));
    next.heading = h1;
  }
  next.heading = angle_wrap(next.heading);
  return next;
}

Eigen::VectorXd IndoorObservation::to_vector() const {
  Eigen::VectorXd v(kDim);
  v[0] = goal_range;
  v[1] = goal_bearing;
  for (int k = 0; k < Lidar::kRays; ++k) v[2 + k] = scan[k];
  return v;
}

IndoorObservation IndoorObservation::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kDim) {
    fail(ErrorCategory::invalid_argument,
         "indoor observation must have " + std::to_string(kDim) + " entries, got " + std::to_string(v.size()));
  }
  IndoorObservation obs;
  obs.goal_range = v[0];
  obs.goal_bearing = v[1];
  for (int k = 0; k < Lidar::kRays; ++k) obs.scan[k] = v[2 + k];
  return obs;
}

IndoorObservation observe_indoor(const OccupancyGrid& grid, const DiffDriveState& state, const ConfigPoint& goal,
                                 const NoiseModel& noise, Rng& rng) {
  const ConfigPoint p = state.position();
  if (!grid.cell_of(p.x(), p.y())) fail(ErrorCategory::invalid_argument, "robot position outside grid");
  IndoorObservation obs;
  const double dx = goal.x() - p.x();
  const double dy = goal.y() - p.y();
  obs.goal_range = std::hypot(dx, dy);
  obs.goal_bearing = angle_wrap(std::atan2(dy, dx) - state.heading);
  static_assert(Lidar::kRays % 2 == 0);
  for (int k = 0; k < Lidar::kRays; k += 2) {
    double a = raycast(grid, p, state.heading + Lidar::ray_offset(k), Lidar::kMaxRange);
    double b = raycast(grid, p, state.heading + Lidar::ray_offset(k + 1), Lidar::kMaxRange);
    if (noise.sensor_sigma > 0.0) {
      const auto [za, zb] = normal_pair(rng);
      a += noise.sensor_sigma * za;
      b += noise.sensor_sigma * zb;
    }
    obs.scan[k] = std::clamp(a, 0.0, Lidar::kMaxRange);
    obs.scan[k + 1] = std::clamp(b, 0.0, Lidar::kMaxRange);
  }
  return obs;
}

bool task_predicate(const DiffDriveState& state, const OccupancyGrid& grid) {
  return is_free(grid, state.position());
}

// -------------------------------------------------------------------------

Eigen::Matrix<double, 10, 1> QuadLoadState::to_vector() const {
  Eigen::Matrix<double, 10, 1> v;
  v << position, velocity, eta, eta_rate;
  return v;
}

QuadLoadState QuadLoadState::from_vector(const Eigen::Matrix<double, 10, 1>& v) {
  QuadLoadState s;
  s.position = v.segment<3>(0);
  s.velocity = v.segment<3>(3);
  s.eta = v.segment<2>(6);
  s.eta_rate = v.segment<2>(8);
  return s;
}

Eigen::Vector3d load_direction(const Eigen::Vector2d& eta) {
  const double cpsi = std::cos(eta[0]);
  const double spsi = std::sin(eta[0]);
  const double cphi = std::cos(eta[1]);
  const double sphi = std::sin(eta[1]);
  return {sphi * cpsi, spsi, -cphi * cpsi};
}

Eigen::Vector3d load_direction_rate(const Eigen::Vector2d& eta, const Eigen::Vector2d& eta_rate) {
  const double cpsi = std::cos(eta[0]);
  const double spsi = std::sin(eta[0]);
  const double cphi = std::cos(eta[1]);
  const double sphi = std::sin(eta[1]);
  const Eigen::Vector3d d_psi(-sphi * spsi, cpsi, cphi * spsi);
  const Eigen::Vector3d d_phi(cphi * cpsi, 0.0, sphi * cpsi);
  return d_psi * eta_rate[0] + d_phi * eta_rate[1];
}

double load_displacement(const QuadLoadState& state) {
  const double c = std::cos(state.eta[0]) * std::cos(state.eta[1]);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double pendulum_energy(const QuadLoadState& state, const QuadLoadParams& params) {
  const double L = params.pendulum_length;
  const double cpsi = std::cos(state.eta[0]);
  const double kinetic =
      0.5 * L * L * (state.eta_rate[0] * state.eta_rate[0] + cpsi * cpsi * state.eta_rate[1] * state.eta_rate[1]);
  const double potential = params.gravity * L * (1.0 - std::cos(state.eta[1]) * cpsi);
  return kinetic + potential;
}

namespace {

// Cable direction n and its rate; integrating these instead of (psi, phi)
// avoids the chart singularity at psi = +-pi/2.
using PendulumState = Eigen::Matrix<double, 6, 1>;

// Unit point mass on a sphere of radius L in the pivot frame, with
// effective gravity g_eff = (0, 0, -g) - pivot acceleration.
PendulumState pendulum_derivative(const PendulumState& s, const Eigen::Vector3d& g_eff, double L) {
  const Eigen::Vector3d n = s.head<3>();
  const Eigen::Vector3d n_dot = s.tail<3>();
  const Eigen::Vector3d f = g_eff / L;
  PendulumState out;
  out << n_dot, f - (f.dot(n) + n_dot.squaredNorm()) * n;
  return out;
}

}  // namespace

QuadLoadState quadload_step(const QuadLoadState& state, const Eigen::Vector3d& accel, double dt,
                            const QuadLoadParams& params) {
  if (!(dt > 0.0)) fail(ErrorCategory::invalid_argument, "dt must be positive");
  const Eigen::Vector3d a = accel.cwiseMax(-params.a_max).cwiseMin(params.a_max);
  QuadLoadState next;
  next.position = state.position + state.velocity * dt + 0.5 * a * dt * dt;
  next.velocity = state.velocity + a * dt;

  const Eigen::Vector3d g_eff(-a.x(), -a.y(), -params.gravity - a.z());
  const double L = params.pendulum_length;
  PendulumState s;
  s << load_direction(state.eta), load_direction_rate(state.eta, state.eta_rate);
  const PendulumState k1 = pendulum_derivative(s, g_eff, L);
  const PendulumState k2 = pendulum_derivative(s + 0.5 * dt * k1, g_eff, L);
  const PendulumState k3 = pendulum_derivative(s + 0.5 * dt * k2, g_eff, L);
  const PendulumState k4 = pendulum_derivative(s + dt * k3, g_eff, L);
  s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const Eigen::Vector3d n = s.head<3>().normalized();
  Eigen::Vector3d n_dot = s.tail<3>();
  n_dot -= n_dot.dot(n) * n;
  const double psi = std::asin(std::clamp(n.y(), -1.0, 1.0));
  const double phi = std::atan2(n.x(), -n.z());
  const double cpsi = std::cos(psi);
  const Eigen::Vector3d d_psi(-std::sin(phi) * std::sin(psi), cpsi, std::cos(phi) * std::sin(psi));
  const Eigen::Vector3d d_phi_unit(std::cos(phi), 0.0, std::sin(phi));
  next.eta = {psi, phi};
  next.eta_rate = {n_dot.dot(d_psi), cpsi > 1e-9 ? n_dot.dot(d_phi_unit) / cpsi : 0.0};
  return next;
}

bool task_predicate(const QuadLoadState& state, const AerialWorkspace& space, double displacement_bound) {
  return space.is_free(state.position) && load_displacement(state) < displacement_bound;
}

}  // namespace prmrl
