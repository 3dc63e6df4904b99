#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prmrl/common.hpp"
#include "prmrl/connect.hpp"
#include "prmrl/scenario.hpp"
#include "prmrl/workspace.hpp"

namespace prmrl {

struct RoadmapEdge {
  int from = 0;
  int to = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_steps = 0.0;

  bool operator==(const RoadmapEdge&) const = default;
};

struct BuildInfo {
  TaskKind task = TaskKind::indoor;
  PlannerKind planner = PlannerKind::sl;
  double density = 0.0;  // nodes per m^2 of free footprint area
  std::uint64_t seed = 0;
  EdgeEvalParams params;
  std::uint64_t map_hash = 0;
  double free_area = 0.0;
  std::size_t candidates = 0;  // planner calls made
  std::size_t collision_checks = 0;

  bool operator==(const BuildInfo& o) const;
};

struct Roadmap {
  std::vector<ConfigPoint> nodes;
  std::vector<RoadmapEdge> edges;  // sorted by (from, to)
  BuildInfo info;

  bool operator==(const Roadmap&) const = default;
};

// One planner call made during a build.
struct CandidateRecord {
  int from = 0;
  int to = 0;
  EdgeEvalResult result;
};

// round(density * free area) nodes drawn from C-free with a generator seeded
// from `seed` alone, so every planner sees the same nodes. Every pair within
// the connection radius is a candidate: symmetric planners are called once
// per pair and store both directions, the others once per direction. Edge
// (i, j) is evaluated with seed mix_seed(seed, i, j).
Roadmap build_roadmap(const LocalPlanner& planner, double density, std::uint64_t seed,
                      std::vector<CandidateRecord>* trace = nullptr);

std::vector<ConfigPoint> sample_nodes(const World& world, double density, std::uint64_t seed);

enum class PathWeight { length, risk };  // risk: -log(success_rate)

double edge_weight(const RoadmapEdge& e, PathWeight weight);

// Dijkstra over nonnegative edge weights. Returns edge indices along the
// cheapest path, or nothing when dst is unreachable. Ties resolve to the
// lower node index.
std::optional<std::vector<std::size_t>> shortest_path(std::size_t node_count, const std::vector<RoadmapEdge>& edges,
                                                      int src, int dst, PathWeight weight);

struct QueryResult {
  std::vector<ConfigPoint> waypoints;  // targets to drive to, ending with the goal
  std::vector<int> nodes;              // roadmap nodes visited, in order
  std::vector<RoadmapEdge> legs;       // one per waypoint; -1 marks the start or goal
  double expected_success = 1.0;       // product of leg success rates
  double expected_length = 0.0;
  double expected_steps = 0.0;
  int n_w = 0;
  ConfigPoint start = ConfigPoint::Zero();
  ConfigPoint goal = ConfigPoint::Zero();
};

// Start and goal snap to a node within goal tolerance, otherwise they are
// joined to the 5 nearest nodes inside the connection radius through the
// planner (plus a direct start-goal attempt when in range). Returns nothing
// when no path exists.
std::optional<QueryResult> query(const Roadmap& roadmap, const LocalPlanner& planner, const ConfigPoint& start,
                                 const ConfigPoint& goal, std::uint64_t seed, PathWeight weight = PathWeight::length);

// p^n_w, n_w may be fractional (a mean waypoint count).
double success_lower_bound(double p_success, double n_w);

// Versioned text format:
//   prmrl-roadmap 1
//   map_hash <16 hex digits>
//   task indoor|aerial
//   planner sl|rl
//   density <d>
//   node_rule round(density*free_area)
//   free_area <m^2>
//   seed <u64>
//   params p_success=.. num_attempts=.. goal_tolerance=.. max_steps=.. connection_radius=..
//   candidates <count>
//   collision_checks <count>
//   nodes <count>
//   N <idx> <x> <y> [<z>]        (z for aerial)
//   edges <count>
//   E <from> <to> <success_rate> <mean_length> <mean_steps>
//   end
std::string to_text(const Roadmap& roadmap);
Roadmap parse_roadmap(const std::string& text, const std::string& source = "roadmap");
void save_roadmap(const Roadmap& roadmap, const std::string& path);
Roadmap load_roadmap(const std::string& path);

}  // namespace prmrl
