#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "prmrl/connect.hpp"

using namespace prmrl;
using fixtures::blank;
using fixtures::wall;

namespace {

EdgeEvalParams stub_params() {
  EdgeEvalParams p;
  p.max_steps = 10;
  return p;
}

std::vector<int> script_with(int successes, int n, Rng& rng) {
  std::vector<int> s(static_cast<std::size_t>(n), 1);
  for (int k = 0; k < successes; ++k) s[static_cast<std::size_t>(k)] = 0;
  for (int k = n - 1; k > 0; --k) std::swap(s[static_cast<std::size_t>(k)], s[rng() % static_cast<std::uint64_t>(k + 1)]);
  for (auto& o : s) {
    if (o == 1 && rng() % 2) o = 2;
  }
  return s;
}

}  // namespace

TEST_CASE("acceptance needs strictly more than 17 of 20") {
  const ConfigPoint s{1, 1, 0}, g{5, 1, 0};
  std::vector<int> script(20, 0);
  script[0] = script[1] = 1;  // 18 successes, two early failures
  auto r = rl_add_edge(fixtures::ScriptedSystem(script), s, g, stub_params(), 1);
  CHECK(r.accepted);
  CHECK(r.successes == 18);
  CHECK(r.success_rate == doctest::Approx(0.9));
  CHECK_FALSE(r.early_terminated);

  script[2] = 2;  // 17 successes
  r = rl_add_edge(fixtures::ScriptedSystem(script), s, g, stub_params(), 1);
  CHECK_FALSE(r.accepted);

  // Failures at the end: the third failure at trial 20 is when acceptance becomes impossible.
  std::vector<int> late(20, 0);
  late[17] = late[18] = late[19] = 1;
  r = rl_add_edge(fixtures::ScriptedSystem(late), s, g, stub_params(), 1);
  CHECK_FALSE(r.accepted);
  CHECK(r.trials == 20);
  CHECK(r.early_terminated);
  CHECK(r.success_rate == 0.0);
  CHECK(r.mean_length == 0.0);
}

TEST_CASE("three failures in the first trials end the call at trial 18") {
  const ConfigPoint s{1, 1, 0}, g{5, 1, 0};
  std::vector<int> script(20, 0);
  script[0] = script[1] = script[2] = 1;
  const auto r = rl_add_edge(fixtures::ScriptedSystem(script), s, g, stub_params(), 1);
  CHECK(r.early_terminated);
  CHECK(r.trials == 18);
  CHECK_FALSE(r.accepted);
}

TEST_CASE("edge outcome semantics over random scripts") {
  Rng rng(2);
  const ConfigPoint s{1, 1, 0}, g{5, 1, 0};
  const auto params = stub_params();
  for (int k = 0; k < 2000; ++k) {
    const int successes = static_cast<int>(rng() % 21);
    const auto script = script_with(successes, 20, rng);
    const auto r = rl_add_edge(fixtures::ScriptedSystem(script), s, g, params, rng());
    CHECK(r.accepted == (successes >= 18));
    CHECK(r.collision_checks <= static_cast<std::size_t>(params.max_steps * params.num_attempts));
    if (r.early_terminated) {
      CHECK(r.trials >= 18);
      CHECK_FALSE(r.accepted);
    } else {
      CHECK(r.trials == 20);
      CHECK(r.successes == successes);
      CHECK(std::isfinite(r.mean_length) == (successes > 0));
    }
  }
}

TEST_CASE("raising p_success never turns a rejection into an acceptance") {
  Rng rng(3);
  const ConfigPoint s{1, 1, 0}, g{4, 1, 0};
  for (int k = 0; k < 500; ++k) {
    fixtures::BernoulliSystem sys{uniform01(rng), 4};
    const std::uint64_t seed = rng();
    EdgeEvalParams lo = stub_params(), hi = stub_params();
    lo.p_success = uniform(rng, 0.0, 0.9);
    hi.p_success = uniform(rng, lo.p_success, 1.0);
    const auto a = rl_add_edge(sys, s, g, lo, seed);
    const auto b = rl_add_edge(sys, s, g, hi, seed);
    if (!a.accepted) CHECK_FALSE(b.accepted);
  }
}

TEST_CASE("fair-coin acceptance frequency matches the binomial tail") {
  const fixtures::BernoulliSystem sys{0.5, 4};
  const ConfigPoint s{1, 1, 0}, g{4, 1, 0};
  const int edges = 2000;
  int accepted = 0, rejected = 0;
  long rejected_trials = 0;
  for (int k = 0; k < edges; ++k) {
    const auto r = rl_add_edge(sys, s, g, stub_params(), mix_seed(11, k));
    if (r.accepted) {
      ++accepted;
    } else {
      ++rejected;
      rejected_trials += r.trials;
    }
  }
  const double p = fixtures::binomial_tail(20, 0.5, 18);
  CHECK(p == doctest::Approx(211.0 / 1048576.0));
  CHECK(std::abs(accepted - edges * p) <= 3.0 * std::sqrt(edges * p * (1 - p)));
  CHECK(static_cast<double>(rejected_trials) / rejected < 20.0);
}

TEST_CASE("endpoints within tolerance succeed in zero steps") {
  const auto grid = load_grid(blank(60, 60), 0.1, 0.0);
  const IndoorSystem sys(grid, {}, Policy::reference(TaskKind::indoor));
  const ConfigPoint s{2.0, 2.0, 0}, g{2.3, 2.2, 0};
  EdgeEvalParams params;
  params.max_steps = 100;
  const auto r = rl_add_edge(sys, s, g, params, 5);
  CHECK(r.accepted);
  CHECK(r.success_rate == 1.0);
  CHECK(r.collision_checks == 0);
  CHECK(r.mean_steps == 0.0);
  CHECK(r.mean_length == doctest::Approx((g - s).norm()));
}

TEST_CASE("edge evaluation is deterministic in the seed") {
  const auto grid = load_grid(generate_maze(4, 10, 10, 2.5, 0.1), 0.1, 0.35);
  const IndoorSystem sys(grid, {}, Policy::reference(TaskKind::indoor));
  Rng rng(9);
  EdgeEvalParams params;
  params.max_steps = 100;
  for (int k = 0; k < 5; ++k) {
    const ConfigPoint a = sample_free(grid, rng), b = sample_free(grid, rng);
    const auto x = rl_add_edge(sys, a, b, params, 77);
    const auto y = rl_add_edge(sys, a, b, params, 77);
    CHECK(x.accepted == y.accepted);
    CHECK(x.successes == y.successes);
    CHECK(x.collision_checks == y.collision_checks);
    CHECK((x.mean_length == y.mean_length || (std::isnan(x.mean_length) && std::isnan(y.mean_length))));
  }
}

TEST_CASE("non-free endpoints and invalid parameters are rejected") {
  GrayImage img = blank(50, 50);
  wall(img, 0.1, 2.0, 0.0, 2.5, 5.0);
  const World world(load_grid(img, 0.1, 0.2));
  const IndoorSystem sys(world.grid(), {}, Policy::reference(TaskKind::indoor));
  EdgeEvalParams params;
  params.max_steps = 10;
  CHECK_THROWS_AS(rl_add_edge(sys, {2.2, 1, 0}, {4, 1, 0}, params, 1), Error);
  CHECK_THROWS_AS(sl_connect(world, {1, 1, 0}, {2.2, 1, 0}, params), Error);
  params.num_attempts = 0;
  CHECK_THROWS_AS(rl_add_edge(sys, {1, 1, 0}, {4, 1, 0}, params, 1), Error);
  params = {};
  params.goal_tolerance = 0.0;
  CHECK_THROWS_AS(params.validate(), Error);
  params = {};
  params.p_success = 1.5;
  CHECK_THROWS_AS(params.validate(), Error);
}

TEST_CASE("sampled states project exactly onto the configuration") {
  const auto grid = load_grid(blank(60, 60), 0.1, 0.0);
  const IndoorSystem sys(grid, {}, Policy::reference(TaskKind::indoor));
  Rng rng(12);
  int bins[8] = {};
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const ConfigPoint c = sample_free(grid, rng);
    const auto s = sample_state_space(sys, c, rng);
    CHECK(sys.project(s) == c);
    CHECK(s.heading > -kPi);
    CHECK(s.heading <= kPi);
    bins[std::min(7, static_cast<int>((s.heading + kPi) / (2 * kPi) * 8))]++;
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 8.0) * (b - n / 8.0) / (n / 8.0);
  CHECK(chi2 < 18.475);  // chi-square, 7 dof, alpha = 0.01
}

TEST_CASE("straight-line connector") {
  GrayImage img = blank(100, 60);
  wall(img, 0.1, 6.0, 0.0, 6.5, 6.0);
  const World world(load_grid(img, 0.1, 0.0));
  const EdgeEvalParams params = Scenario{}.edge_params(TaskKind::indoor);

  auto r = sl_connect(world, {1, 1, 0}, {4, 1, 0}, params, 0.2);
  CHECK(r.accepted);
  CHECK(r.trials == 1);
  CHECK(r.success_rate == 1.0);
  CHECK(r.mean_length == doctest::Approx(3.0));
  CHECK(r.mean_steps == doctest::Approx(15.0));
  CHECK(r.collision_checks == static_cast<std::size_t>(std::ceil(3.0 / world.collision_step())) + 1);

  r = sl_connect(world, {5, 1, 0}, {8, 1, 0}, params);
  CHECK_FALSE(r.accepted);
  CHECK(r.success_rate == 0.0);
  CHECK(r.collision_checks < static_cast<std::size_t>(std::ceil(3.0 / world.collision_step())) + 1);

  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const ConfigPoint a{uniform(rng, 0.1, 5.9), uniform(rng, 0.1, 5.9), 0};
    const ConfigPoint b{uniform(rng, 0.1, 5.9), uniform(rng, 0.1, 5.9), 0};
    const double d = (b - a).norm();
    const auto e = sl_connect(world, a, b, params);
    CHECK(e.accepted);
    const auto expected = d == 0.0 ? 1 : static_cast<std::size_t>(std::ceil(d / world.collision_step())) + 1;
    CHECK(e.collision_checks == expected);
  }
}

TEST_CASE("planner factory") {
  const World world(load_grid(blank(60, 60), 0.1, 0.0));
  const Scenario scenario;
  const auto sl = make_planner(PlannerKind::sl, world, scenario);
  CHECK(sl->kind() == PlannerKind::sl);
  CHECK(sl->symmetric());
  CHECK(sl->params().max_steps == scenario.max_steps(TaskKind::indoor));
  CHECK_THROWS_AS(make_planner(PlannerKind::rl, world, scenario), Error);
  CHECK_THROWS_AS(make_planner(PlannerKind::rl, world, scenario, Policy::reference(TaskKind::aerial)), Error);
  const auto rl = make_planner(PlannerKind::rl, world, scenario, Policy::reference(TaskKind::indoor));
  CHECK(rl->kind() == PlannerKind::rl);
  CHECK_FALSE(rl->symmetric());
  const auto r = rl->connect({1, 1, 0}, {3, 1, 0}, 4);
  CHECK(r.trials >= 18);
  CHECK(parse_planner("rl") == PlannerKind::rl);
  CHECK(to_string(PlannerKind::sl) == "sl");
  CHECK_THROWS_AS(parse_planner("rrt"), Error);
}

TEST_CASE("aerial edges") {
  const AerialWorkspace space(load_grid(blank(60, 60), 0.1, 0.3), 2.0, 0.3, 0.5, 3.0);
  const World world(space);
  const Scenario scenario;
  const auto rl = make_planner(PlannerKind::rl, world, scenario, Policy::reference(TaskKind::aerial));
  const auto r = rl->connect({1, 1, 1.5}, {3, 2, 1.5}, 2);
  CHECK(r.accepted);
  CHECK(r.mean_length >= std::sqrt(5.0) - 0.5);
  CHECK(r.collision_checks <= static_cast<std::size_t>(rl->params().max_steps * 20));
}
