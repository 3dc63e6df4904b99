#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "prmrl/policy.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

struct TrainConfig {
  int population = 16;
  int iterations = 8;  // resampling rounds after the initial population
  double elite_fraction = 0.25;
  int episodes = 24;  // per fitness evaluation
  int max_steps = 0;  // 0: the scenario's step cap for the task
  double goal_tolerance = 0.5;
  double min_goal_distance = 1.0;
  double max_goal_distance = 8.0;
  double init_sigma = 0.3;  // relative to |parameter| + 0.5
  std::uint64_t seed = 1;

  void validate() const;
};

struct Fitness {
  double success_rate = 0.0;
  double mean_return = 0.0;
};

// Success rate first, then return. Exact ties go to the earlier candidate.
inline bool fitter(const Fitness& a, const Fitness& b) {
  if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
  return a.mean_return > b.mean_return;
}

struct FitnessRecord {
  int iteration = 0;
  int candidate = 0;
  Fitness fitness;
  Eigen::VectorXd params;
};

struct TrainResult {
  Policy policy;
  std::vector<FitnessRecord> log;  // every evaluated candidate, in evaluation order
  std::size_t best_index = 0;      // into log
};

// Cross-entropy search around `initial` (the reference controller when
// empty). Every candidate is scored on the same episode seeds, so the
// returned policy is the exact argmax over the log.
TrainResult train_policy_search(const World& world, const Scenario& scenario, const TrainConfig& cfg,
                                const Policy* initial = nullptr);

EpisodeSampling training_sampling(const Scenario& scenario, TaskKind task, const TrainConfig& cfg);

// Fitness of one policy under cfg's episode seeds.
Fitness measure_fitness(const World& world, const Scenario& scenario, const Policy& policy, const TrainConfig& cfg);

}  // namespace prmrl
