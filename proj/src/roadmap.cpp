#include "prmrl/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "prmrl/parallel.hpp"

namespace prmrl {

bool BuildInfo::operator==(const BuildInfo& o) const {
  const auto& a = params;
  const auto& b = o.params;
  return task == o.task && planner == o.planner && density == o.density && seed == o.seed &&
         map_hash == o.map_hash && free_area == o.free_area && candidates == o.candidates &&
         collision_checks == o.collision_checks && a.p_success == b.p_success && a.num_attempts == b.num_attempts &&
         a.goal_tolerance == b.goal_tolerance && a.max_steps == b.max_steps &&
         a.connection_radius == b.connection_radius;
}

std::vector<ConfigPoint> sample_nodes(const World& world, double density, std::uint64_t seed) {
  if (!(density > 0.0)) fail(ErrorCategory::invalid_argument, "density must be positive");
  const double area = world.free_area();
  if (area <= 0.0) fail(ErrorCategory::no_free_space, "map has no free space");
  const auto n = static_cast<std::size_t>(std::llround(density * area));
  Rng rng(mix_seed(seed, 0x6e6f646573));
  std::vector<ConfigPoint> nodes;
  nodes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) nodes.push_back(world.sample_free(rng));
  return nodes;
}

Roadmap build_roadmap(const LocalPlanner& planner, double density, std::uint64_t seed,
                      std::vector<CandidateRecord>* trace) {
  const World& world = planner.world();
  const EdgeEvalParams& params = planner.params();
  Roadmap map;
  map.nodes = sample_nodes(world, density, seed);
  map.info.task = world.task();
  map.info.planner = planner.kind();
  map.info.density = density;
  map.info.seed = seed;
  map.info.params = params;
  map.info.map_hash = world.content_hash();
  map.info.free_area = world.free_area();

  const bool symmetric = planner.symmetric();
  const double r2 = params.connection_radius * params.connection_radius;
  std::vector<CandidateRecord> candidates;
  const int n = static_cast<int>(map.nodes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j || (map.nodes[i] - map.nodes[j]).squaredNorm() > r2) continue;
      candidates.push_back({i, j, {}});
    }
  }
  parallel_for(candidates.size(), [&](std::size_t k) {
    auto& c = candidates[k];
    c.result = planner.connect(map.nodes[c.from], map.nodes[c.to],
                               mix_seed(seed, static_cast<std::uint64_t>(c.from), static_cast<std::uint64_t>(c.to)));
  });

  for (const auto& c : candidates) {
    map.info.collision_checks += c.result.collision_checks;
    if (!c.result.accepted) continue;
    const auto& r = c.result;
    map.edges.push_back({c.from, c.to, r.success_rate, r.mean_length, r.mean_steps});
    if (symmetric) map.edges.push_back({c.to, c.from, r.success_rate, r.mean_length, r.mean_steps});
  }
  map.info.candidates = candidates.size();
  std::sort(map.edges.begin(), map.edges.end(),
            [](const RoadmapEdge& a, const RoadmapEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  if (trace) *trace = std::move(candidates);
  return map;
}

double edge_weight(const RoadmapEdge& e, PathWeight weight) {
  return weight == PathWeight::length ? e.mean_length : -std::log(e.success_rate);
}

std::optional<std::vector<std::size_t>> shortest_path(std::size_t node_count, const std::vector<RoadmapEdge>& edges,
                                                      int src, int dst, PathWeight weight) {
  const auto in_range = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < node_count; };
  if (!in_range(src) || !in_range(dst)) fail(ErrorCategory::invalid_argument, "path endpoint is not a node");
  std::vector<std::vector<std::size_t>> out(node_count);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!in_range(edges[k].from) || !in_range(edges[k].to)) fail(ErrorCategory::invalid_argument, "edge endpoint is not a node");
    out[edges[k].from].push_back(k);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(node_count, kInf);
  std::vector<std::size_t> via(node_count, edges.size());
  std::vector<char> done(node_count, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[src] = 0.0;
  open.push({0.0, src});
  while (!open.empty()) {
    const auto [d, v] = open.top();
    open.pop();
    if (done[v]) continue;
    done[v] = 1;
    if (v == dst) break;
    for (std::size_t k : out[v]) {
      const double w = edge_weight(edges[k], weight);
      if (!(w >= 0.0)) fail(ErrorCategory::invalid_argument, "negative or undefined edge weight");
      const int u = edges[k].to;
      if (d + w < dist[u]) {
        dist[u] = d + w;
        via[u] = k;
        open.push({dist[u], u});
      }
    }
  }
  if (!done[dst]) return std::nullopt;
  std::vector<std::size_t> path;
  for (int v = dst; v != src; v = edges[via[v]].from) path.push_back(via[v]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

// Nearest node within eps, if any.
std::optional<int> snap(const Roadmap& map, const ConfigPoint& p, double eps) {
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(map.nodes.size()); ++k) {
    const double d = (map.nodes[k] - p).norm();
    if (d <= eps && d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

std::vector<int> nearest_within(const Roadmap& map, const ConfigPoint& p, double radius, std::size_t k) {
  std::vector<std::pair<double, int>> near;
  for (int v = 0; v < static_cast<int>(map.nodes.size()); ++v) {
    const double d = (map.nodes[v] - p).norm();
    if (d <= radius) near.push_back({d, v});
  }
  std::sort(near.begin(), near.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < near.size() && i < k; ++i) out.push_back(near[i].second);
  return out;
}

constexpr std::size_t kAttachNeighbors = 5;

}  // namespace

std::optional<QueryResult> query(const Roadmap& roadmap, const LocalPlanner& planner, const ConfigPoint& start,
                                 const ConfigPoint& goal, std::uint64_t seed, PathWeight weight) {
  const World& world = planner.world();
  if (!world.is_free(start)) fail(ErrorCategory::invalid_argument, "query start is not free");
  if (!world.is_free(goal)) fail(ErrorCategory::invalid_argument, "query goal is not free");
  const EdgeEvalParams& params = planner.params();
  const double eps = params.goal_tolerance;

  QueryResult result;
  result.start = start;
  result.goal = goal;
  if ((start - goal).norm() <= eps) return result;

  const int n = static_cast<int>(roadmap.nodes.size());
  const int s_node = n;
  const int g_node = n + 1;
  std::vector<RoadmapEdge> edges = roadmap.edges;
  const std::optional<int> s_snap = snap(roadmap, start, eps);
  std::optional<int> g_snap = snap(roadmap, goal, eps);
  // Both ends near one node: the goal still needs a leg of its own.
  if (s_snap && g_snap == s_snap) g_snap.reset();

  // Attachment calls use seeds disjoint from the build's (node, node) pairs.
  const std::uint64_t qseed = mix_seed(seed, 0x71756572);
  auto attach = [&](int from, int to, const ConfigPoint& a, const ConfigPoint& b) {
    const EdgeEvalResult r = planner.connect(a, b, mix_seed(qseed, static_cast<std::uint64_t>(from),
                                                            static_cast<std::uint64_t>(to)));
    if (r.accepted) edges.push_back({from, to, r.success_rate, r.mean_length, r.mean_steps});
  };
  const double radius = params.connection_radius;
  if (!s_snap) {
    for (int v : nearest_within(roadmap, start, radius, kAttachNeighbors)) attach(s_node, v, start, roadmap.nodes[v]);
  }
  if (!g_snap) {
    for (int v : nearest_within(roadmap, goal, radius, kAttachNeighbors)) attach(v, g_node, roadmap.nodes[v], goal);
  }
  if (!s_snap && !g_snap && (goal - start).norm() <= radius) attach(s_node, g_node, start, goal);

  const int src = s_snap ? *s_snap : s_node;
  const int dst = g_snap ? *g_snap : g_node;
  const auto path = shortest_path(static_cast<std::size_t>(n) + 2, edges, src, dst, weight);
  if (!path) return std::nullopt;

  auto position = [&](int v) { return v == s_node ? start : v == g_node ? goal : roadmap.nodes[v]; };
  if (s_snap) result.nodes.push_back(*s_snap);
  for (std::size_t k : *path) {
    RoadmapEdge leg = edges[k];
    result.waypoints.push_back(position(leg.to));
    if (leg.to < n) result.nodes.push_back(leg.to);
    if (leg.from >= n) leg.from = -1;
    if (leg.to >= n) leg.to = -1;
    result.legs.push_back(leg);
    result.expected_success *= leg.success_rate;
    result.expected_length += leg.mean_length;
    result.expected_steps += leg.mean_steps;
  }
  // A goal that snapped to a node is still the final target.
  if (result.waypoints.empty() || g_snap) {
    if (result.waypoints.empty()) result.waypoints.push_back(goal);
    result.waypoints.back() = goal;
  }
  result.n_w = static_cast<int>(result.waypoints.size());
  return result;
}

double success_lower_bound(double p_success, double n_w) {
  if (!(p_success >= 0.0 && p_success <= 1.0)) fail(ErrorCategory::invalid_argument, "p_success must be in [0, 1]");
  if (!(n_w >= 0.0)) fail(ErrorCategory::invalid_argument, "waypoint count must be >= 0");
  return std::pow(p_success, n_w);
}

// ---------------------------------------------------------------- persistence

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string to_text(const Roadmap& roadmap) {
  const BuildInfo& info = roadmap.info;
  const auto& p = info.params;
  const bool aerial = info.task == TaskKind::aerial;
  std::string out;
  out.reserve(64 * (roadmap.nodes.size() + roadmap.edges.size()) + 512);
  out += "prmrl-roadmap 1\n";
  out += "map_hash " + hex64(info.map_hash) + "\n";
  out += "task " + std::string(to_string(info.task)) + "\n";
  out += "planner " + std::string(to_string(info.planner)) + "\n";
  out += "density " + format_double(info.density) + "\n";
  out += "node_rule round(density*free_area)\n";
  out += "free_area " + format_double(info.free_area) + "\n";
  out += "seed " + std::to_string(info.seed) + "\n";
  out += "params p_success=" + format_double(p.p_success) + " num_attempts=" + std::to_string(p.num_attempts) +
         " goal_tolerance=" + format_double(p.goal_tolerance) + " max_steps=" + std::to_string(p.max_steps) +
         " connection_radius=" + format_double(p.connection_radius) + "\n";
  out += "candidates " + std::to_string(info.candidates) + "\n";
  out += "collision_checks " + std::to_string(info.collision_checks) + "\n";
  out += "nodes " + std::to_string(roadmap.nodes.size()) + "\n";
  for (std::size_t k = 0; k < roadmap.nodes.size(); ++k) {
    const auto& c = roadmap.nodes[k];
    out += "N " + std::to_string(k) + " " + format_double(c.x()) + " " + format_double(c.y());
    if (aerial) out += " " + format_double(c.z());
    out += "\n";
  }
  out += "edges " + std::to_string(roadmap.edges.size()) + "\n";
  for (const auto& e : roadmap.edges) {
    out += "E " + std::to_string(e.from) + " " + std::to_string(e.to) + " " + format_double(e.success_rate) + " " +
           format_double(e.mean_length) + " " + format_double(e.mean_steps) + "\n";
  }
  out += "end\n";
  return out;
}

namespace {

class LineReader {
 public:
  LineReader(const std::string& text, std::string source) : in_(text), source_(std::move(source)) {}

  // Next line split into tokens; the first must be `key`.
  std::vector<std::string> expect(const std::string& key) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(source_, line_ + 1, "unexpected end of file, expected '" + key + "'");
    ++line_;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0] != key) throw ParseError(source_, line_, "expected '" + key + "'");
    tok.erase(tok.begin());
    return tok;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t count) {
    auto tok = expect(key);
    if (tok.size() != count) {
      throw ParseError(source_, line_, "'" + key + "' takes " + std::to_string(count) + " fields");
    }
    return tok;
  }

  template <class F>
  auto guard(F fn) {
    try {
      return fn();
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source_, line_, e.what());
    }
  }

  double number(const std::string& s) { return guard([&] { return parse_double(s); }); }
  long long integer(const std::string& s) { return guard([&] { return parse_int(s); }); }
  std::uint64_t u64(const std::string& s, int base = 10) {
    return guard([&] {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used, base);
      if (used != s.size() || s.empty() || s[0] == '-') fail(ErrorCategory::parse, "bad unsigned integer '" + s + "'");
      return static_cast<std::uint64_t>(v);
    });
  }

  [[noreturn]] void error(const std::string& what) { throw ParseError(source_, line_, what); }

 private:
  std::istringstream in_;
  std::string source_;
  int line_ = 0;
};

}  // namespace

Roadmap parse_roadmap(const std::string& text, const std::string& source) {
  LineReader r(text, source);
  Roadmap map;
  BuildInfo& info = map.info;
  if (r.expect("prmrl-roadmap", 1)[0] != "1") r.error("unsupported roadmap version");
  info.map_hash = r.u64(r.expect("map_hash", 1)[0], 16);
  info.task = r.guard([&] { return parse_task(r.expect("task", 1)[0]); });
  info.planner = r.guard([&] { return parse_planner(r.expect("planner", 1)[0]); });
  info.density = r.number(r.expect("density", 1)[0]);
  r.expect("node_rule", 1);
  info.free_area = r.number(r.expect("free_area", 1)[0]);
  info.seed = r.u64(r.expect("seed", 1)[0]);
  for (const auto& tok : r.expect("params", 5)) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) r.error("expected key=value in params");
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    auto& p = info.params;
    if (key == "p_success") p.p_success = r.number(value);
    else if (key == "num_attempts") p.num_attempts = static_cast<int>(r.integer(value));
    else if (key == "goal_tolerance") p.goal_tolerance = r.number(value);
    else if (key == "max_steps") p.max_steps = static_cast<int>(r.integer(value));
    else if (key == "connection_radius") p.connection_radius = r.number(value);
    else r.error("unknown parameter '" + key + "'");
  }
  info.candidates = r.u64(r.expect("candidates", 1)[0]);
  info.collision_checks = r.u64(r.expect("collision_checks", 1)[0]);

  const bool aerial = info.task == TaskKind::aerial;
  const auto n_nodes = r.u64(r.expect("nodes", 1)[0]);
  map.nodes.reserve(n_nodes);
  for (std::uint64_t k = 0; k < n_nodes; ++k) {
    const auto tok = r.expect("N", aerial ? 4 : 3);
    if (r.u64(tok[0]) != k) r.error("node index out of order");
    map.nodes.push_back({r.number(tok[1]), r.number(tok[2]), aerial ? r.number(tok[3]) : 0.0});
  }
  const auto n_edges = r.u64(r.expect("edges", 1)[0]);
  map.edges.reserve(n_edges);
  for (std::uint64_t k = 0; k < n_edges; ++k) {
    const auto tok = r.expect("E", 5);
    RoadmapEdge e{static_cast<int>(r.integer(tok[0])), static_cast<int>(r.integer(tok[1])), r.number(tok[2]),
                  r.number(tok[3]), r.number(tok[4])};
    if (e.from < 0 || e.to < 0 || static_cast<std::uint64_t>(e.from) >= n_nodes ||
        static_cast<std::uint64_t>(e.to) >= n_nodes) {
      r.error("edge endpoint is not a node");
    }
    map.edges.push_back(e);
  }
  r.expect("end", 0);
  return map;
}

void save_roadmap(const Roadmap& roadmap, const std::string& path) { write_text_file(path, to_text(roadmap)); }

Roadmap load_roadmap(const std::string& path) { return parse_roadmap(read_text_file(path), path); }

}  // namespace prmrl
