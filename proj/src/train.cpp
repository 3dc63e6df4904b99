#include "prmrl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prmrl/parallel.hpp"

namespace prmrl {

void TrainConfig::validate() const {
  if (population < 1) fail(ErrorCategory::invalid_argument, "population must be >= 1");
  if (iterations < 0) fail(ErrorCategory::invalid_argument, "iterations must be >= 0");
  if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) {
    fail(ErrorCategory::invalid_argument, "elite fraction must be in (0, 1)");
  }
  if (episodes < 1) fail(ErrorCategory::invalid_argument, "episodes must be >= 1");
  if (max_steps < 0) fail(ErrorCategory::invalid_argument, "max_steps must be >= 0");
  if (!(goal_tolerance > 0.0)) fail(ErrorCategory::invalid_argument, "goal tolerance must be positive");
  if (!(min_goal_distance >= 0.0 && max_goal_distance >= min_goal_distance)) {
    fail(ErrorCategory::invalid_argument, "goal distance range is empty");
  }
  if (!(init_sigma >= 0.0)) fail(ErrorCategory::invalid_argument, "init_sigma must be >= 0");
}

EpisodeSampling training_sampling(const Scenario& scenario, TaskKind task, const TrainConfig& cfg) {
  return {cfg.max_steps > 0 ? cfg.max_steps : scenario.max_steps(task), cfg.goal_tolerance, cfg.min_goal_distance,
          cfg.max_goal_distance};
}

Fitness measure_fitness(const World& world, const Scenario& scenario, const Policy& policy, const TrainConfig& cfg) {
  const EpisodeSampling sampling = training_sampling(scenario, world.task(), cfg);
  const auto eval = with_system(world, scenario, policy, [&](const auto& sys) {
    return evaluate_policy(sys, cfg.episodes, mix_seed(cfg.seed, 0x7e57), sampling, scenario.reward);
  });
  return {eval.success_rate, eval.mean_return};
}

TrainResult train_policy_search(const World& world, const Scenario& scenario, const TrainConfig& cfg,
                                const Policy* initial) {
  cfg.validate();
  scenario.reward.validate();
  if (world.free_area() <= 0.0) fail(ErrorCategory::no_free_space, "map has no free space to train in");

  const TaskKind task = world.task();
  const Policy start = initial ? *initial : Policy::reference(task, policy_bounds(scenario));
  if (start.task() != task) fail(ErrorCategory::invalid_argument, "initial policy task does not match the map");

  Eigen::VectorXd mean = start.params();
  Eigen::VectorXd sigma = cfg.init_sigma * (mean.cwiseAbs().array() + 0.5).matrix();
  const int n_elite = std::max(1, static_cast<int>(std::lround(cfg.elite_fraction * cfg.population)));

  TrainResult result{start, {}, 0};
  for (int iter = 0; iter <= cfg.iterations; ++iter) {
    Rng rng(mix_seed(cfg.seed, 0xce, static_cast<std::uint64_t>(iter)));
    std::vector<Eigen::VectorXd> candidates(static_cast<std::size_t>(cfg.population));
    candidates[0] = mean;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      Eigen::VectorXd x(mean.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = mean[k] + sigma[k] * normal(rng);
      candidates[c] = x;
    }

    std::vector<Fitness> scores(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t c) {
      scores[c] = measure_fitness(world, scenario, Policy(task, candidates[c], start.bounds()), cfg);
    });

    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fitter(scores[a], scores[b]); });

    for (std::size_t c = 0; c < candidates.size(); ++c) {
      result.log.push_back({iter, static_cast<int>(c), scores[c], candidates[c]});
      if (fitter(scores[c], result.log[result.best_index].fitness)) result.best_index = result.log.size() - 1;
    }

    Eigen::VectorXd next_mean = Eigen::VectorXd::Zero(mean.size());
    for (int e = 0; e < n_elite; ++e) next_mean += candidates[order[e]];
    next_mean /= n_elite;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(mean.size());
    for (int e = 0; e < n_elite; ++e) var += (candidates[order[e]] - next_mean).cwiseAbs2();
    var /= n_elite;
    // Keep a little exploration so the search does not collapse onto one elite.
    sigma = (var.cwiseSqrt().array().max(0.02 * sigma.array())).matrix();
    mean = next_mean;
  }

  const FitnessRecord& best = result.log[result.best_index];
  result.policy = Policy(task, best.params, start.bounds());
  result.policy.training_seed = cfg.seed;
  result.policy.fitness_success = best.fitness.success_rate;
  result.policy.fitness_return = best.fitness.mean_return;
  return result;
}

}  // namespace prmrl
