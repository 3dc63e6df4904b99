#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "prmrl/train.hpp"

using namespace prmrl;

namespace {

World empty_room() {
  GrayImage img = fixtures::blank(100, 100);
  fixtures::border(img, 0.1, 0.2);
  return World(load_grid(img, 0.1, 0.35));
}

World small_maze() { return World(load_grid(generate_maze(99, 10, 10, 2.5, 0.1), 0.1, 0.35)); }

TrainConfig quick() {
  TrainConfig cfg;
  cfg.population = 6;
  cfg.iterations = 2;
  cfg.episodes = 8;
  cfg.seed = 7;
  return cfg;
}

bool same_fitness(const Fitness& a, const Fitness& b) {
  return a.success_rate == b.success_rate && a.mean_return == b.mean_return;
}

}  // namespace

TEST_CASE("fitness ordering") {
  CHECK(fitter({0.9, -1.0}, {0.8, 5.0}));
  CHECK(fitter({0.8, 1.0}, {0.8, 0.5}));
  CHECK_FALSE(fitter({0.8, 1.0}, {0.8, 1.0}));
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.population = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.elite_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.goal_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("zero iterations returns the best initial candidate") {
  const World world = small_maze();
  TrainConfig cfg = quick();
  cfg.iterations = 0;
  const auto result = train_policy_search(world, Scenario{}, cfg);
  REQUIRE(result.log.size() == static_cast<std::size_t>(cfg.population));
  for (const auto& rec : result.log) CHECK(rec.iteration == 0);
  std::size_t best = 0;
  for (std::size_t k = 1; k < result.log.size(); ++k) {
    if (fitter(result.log[k].fitness, result.log[best].fitness)) best = k;
  }
  CHECK(result.best_index == best);
  CHECK(result.policy.params() == result.log[best].params);
}

TEST_CASE("returned policy is the exact argmax over the log and re-measures identically") {
  const World world = small_maze();
  const TrainConfig cfg = quick();
  const auto result = train_policy_search(world, Scenario{}, cfg);
  CHECK(result.log.size() == static_cast<std::size_t>(cfg.population * (cfg.iterations + 1)));
  const auto& best = result.log[result.best_index];
  for (const auto& rec : result.log) CHECK_FALSE(fitter(rec.fitness, best.fitness));
  CHECK(result.policy.params() == best.params);
  CHECK(result.policy.fitness_success == best.fitness.success_rate);
  CHECK(result.policy.fitness_return == best.fitness.mean_return);
  CHECK(result.policy.training_seed == cfg.seed);
  CHECK(same_fitness(measure_fitness(world, Scenario{}, result.policy, cfg), best.fitness));
  // Candidate 0 of generation 0 is the starting point.
  CHECK(result.log[0].params == Policy::reference(TaskKind::indoor).params());
}

TEST_CASE("training is reproducible from the seed") {
  const World world = small_maze();
  const TrainConfig cfg = quick();
  const auto a = train_policy_search(world, Scenario{}, cfg);
  const auto b = train_policy_search(world, Scenario{}, cfg);
  CHECK(a.policy.params() == b.policy.params());
  CHECK(a.best_index == b.best_index);
  TrainConfig other = cfg;
  other.seed = 8;
  const auto c = train_policy_search(world, Scenario{}, other);
  CHECK(c.log.back().params != a.log.back().params);
}

TEST_CASE("training on a map without free space fails") {
  const World world(load_grid(fixtures::blank(20, 20, 0), 0.1, 0.35));
  CHECK_THROWS_AS(train_policy_search(world, Scenario{}, quick()), Error);
}

TEST_CASE("aerial training runs and keeps the argmax property") {
  GrayImage img = fixtures::blank(60, 60);
  const World world(AerialWorkspace(load_grid(img, 0.1, 0.3), 2.0, 0.3, 0.5, 3.0));
  TrainConfig cfg = quick();
  cfg.population = 4;
  cfg.iterations = 1;
  cfg.episodes = 4;
  cfg.max_goal_distance = 3.0;
  const auto result = train_policy_search(world, Scenario{}, cfg);
  CHECK(result.policy.task() == TaskKind::aerial);
  for (const auto& rec : result.log) CHECK_FALSE(fitter(rec.fitness, result.log[result.best_index].fitness));
}

TEST_CASE("trained policy on an empty 10 m room succeeds on held-out episodes") {
  const World world = empty_room();
  const Scenario scenario;
  TrainConfig cfg;
  cfg.seed = 3;
  const auto result = train_policy_search(world, scenario, cfg);
  const IndoorSystem sys(world.grid(), scenario.indoor, result.policy);
  const auto sampling = training_sampling(scenario, TaskKind::indoor, cfg);
  CHECK(sampling.max_goal_distance == 8.0);
  // Held-out: a seed family the training episodes never use.
  const auto eval = evaluate_policy(sys, 100, mix_seed(12345, 1), sampling, scenario.reward);
  MESSAGE("held-out success " << eval.success_rate);
  CHECK(eval.success_rate >= 0.9);
}
