#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "prmrl/common.hpp"
#include "prmrl/connect.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/workspace.hpp"

namespace fixtures {

using prmrl::ConfigPoint;
using prmrl::GrayImage;

inline GrayImage blank(int width, int height, std::uint8_t value = 255) {
  return {width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value)};
}

// Paints the world-frame box [x0, x1) x [y0, y1) black (origin at 0, y up).
inline void wall(GrayImage& img, double res, double x0, double y0, double x1, double y1) {
  const int c0 = std::max(0, static_cast<int>(std::floor(x0 / res + 1e-9)));
  const int c1 = std::min(img.width, static_cast<int>(std::ceil(x1 / res - 1e-9)));
  const int j0 = std::max(0, static_cast<int>(std::floor(y0 / res + 1e-9)));
  const int j1 = std::min(img.height, static_cast<int>(std::ceil(y1 / res - 1e-9)));
  for (int j = j0; j < j1; ++j) {
    for (int c = c0; c < c1; ++c) img.pixels[static_cast<std::size_t>(img.height - 1 - j) * img.width + c] = 0;
  }
}

inline void border(GrayImage& img, double res, double thickness) {
  const double w = img.width * res;
  const double h = img.height * res;
  wall(img, res, 0, 0, w, thickness);
  wall(img, res, 0, h - thickness, w, h);
  wall(img, res, 0, 0, thickness, h);
  wall(img, res, w - thickness, 0, w, h);
}

// 20 x 14 m room with a U-shaped wall opening to +x. Node A faces the U's
// closed back, node B sits past the arm tips, so the straight line between
// them crosses the back wall and a robot has to go around a corner.
struct CornerMap {
  static constexpr double kRes = 0.1;
  GrayImage image;
  ConfigPoint a{3.0, 7.0, 0.0};
  ConfigPoint b{11.0, 7.0, 0.0};

  CornerMap() : image(blank(200, 140)) {
    border(image, kRes, 0.2);
    wall(image, kRes, 5.8, 4.5, 6.2, 9.5);  // back of the U
    wall(image, kRes, 5.8, 4.5, 9.0, 4.9);  // lower arm
    wall(image, kRes, 5.8, 9.1, 9.0, 9.5);  // upper arm
  }
};

// Stub local-planner system: each trial's outcome is drawn when the start
// state is sampled. Successful trials reach the goal after a few steps,
// failures either hit the task predicate or run out the step budget.
struct BernoulliSystem {
  struct State {
    ConfigPoint p = ConfigPoint::Zero();
    int outcome = 0;  // 0 success, 1 violation, 2 stall
    int delay = 0;
    bool valid = true;
  };
  using Action = int;

  double p_success = 0.5;
  int max_delay = 5;

  bool is_free(const ConfigPoint&) const { return true; }
  ConfigPoint sample_config(prmrl::Rng& rng) const { return {prmrl::uniform(rng, 0, 10), prmrl::uniform(rng, 0, 10), 0}; }
  State sample_state(const ConfigPoint& c, prmrl::Rng& rng) const {
    State s;
    s.p = c;
    const double u = prmrl::uniform01(rng);
    s.outcome = u < p_success ? 0 : (prmrl::uniform01(rng) < 0.5 ? 1 : 2);
    s.delay = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_delay));
    return s;
  }
  ConfigPoint project(const State& s) const { return s.p; }
  bool valid(const State& s) const { return s.valid; }
  bool arrived(const State& s, const ConfigPoint& goal, double eps) const { return (s.p - goal).norm() <= eps; }
  double step_length(const State& a, const State& b) const { return (b.p - a.p).norm(); }
  prmrl::Transition<State, Action> advance(const State& s, const ConfigPoint& goal, prmrl::Rng&,
                                           const prmrl::RewardConfig&, double) const {
    State n = s;
    if (n.delay > 0) --n.delay;
    if (n.delay == 0) {
      if (s.outcome == 0) n.p = goal;
      if (s.outcome == 1) n.valid = false;
    }
    return {n, 0, 0.0};
  }
};

static_assert(prmrl::ClosedLoopSystem<BernoulliSystem>);

// Trial outcomes replayed from a script, in call order. rl_add_edge samples
// a start then a goal state per trial, so every second sample_state call
// starts a new trial.
struct ScriptedSystem : BernoulliSystem {
  std::vector<int> script;  // per trial: 0 success, 1 violation, 2 stall
  std::shared_ptr<int> calls = std::make_shared<int>(0);

  explicit ScriptedSystem(std::vector<int> outcomes) : script(std::move(outcomes)) { max_delay = 3; }

  State sample_state(const ConfigPoint& c, prmrl::Rng& rng) const {
    State s = BernoulliSystem::sample_state(c, rng);
    const int trial = (*calls)++ / 2;
    s.outcome = script.at(static_cast<std::size_t>(trial));
    return s;
  }
};

static_assert(prmrl::ClosedLoopSystem<ScriptedSystem>);

// P(Binomial(n, p) >= k) by direct summation over the pmf.
inline double binomial_tail(int n, double p, int k) {
  double total = 0.0;
  for (int j = k; j <= n; ++j) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    total += std::exp(log_c + j * std::log(p) + (n - j) * std::log1p(-p));
  }
  return total;
}

}  // namespace fixtures
