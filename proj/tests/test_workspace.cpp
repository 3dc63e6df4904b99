#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <queue>

#include "fixtures.hpp"
#include "prmrl/workspace.hpp"

using namespace prmrl;
using fixtures::blank;
using fixtures::wall;

namespace {

int count(const OccupancyGrid& g, Cell c) {
  return static_cast<int>(std::count(g.cells().begin(), g.cells().end(), c));
}

// Brute force: every non-obstacle cell center within r of an obstacle cell center.
std::vector<Cell> brute_force_labels(const GrayImage& img, double res, double r) {
  const int w = img.width, h = img.height;
  std::vector<Cell> out(static_cast<std::size_t>(w) * h, Cell::free);
  std::vector<std::pair<int, int>> obstacles;
  for (int row = 0; row < h; ++row) {
    for (int c = 0; c < w; ++c) {
      if (img.at(c, row) < 128) obstacles.push_back({c, h - 1 - row});
    }
  }
  for (auto [i, j] : obstacles) out[static_cast<std::size_t>(j) * w + i] = Cell::obstacle;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      auto& cell = out[static_cast<std::size_t>(j) * w + i];
      if (cell == Cell::obstacle) continue;
      for (auto [oi, oj] : obstacles) {
        if (std::hypot((i - oi) * res, (j - oj) * res) <= r + 1e-12) {
          cell = Cell::inflated;
          break;
        }
      }
    }
  }
  return out;
}

GrayImage random_raster(int w, int h, double density, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img = blank(w, h);
  for (auto& px : img.pixels) px = uniform01(rng) < density ? 0 : 255;
  return img;
}

// Marches in tiny increments; agrees with the exact walk to within the increment.
double marched_range(const OccupancyGrid& g, const ConfigPoint& o, double bearing, double max_range, double inc) {
  const Eigen::Vector2d d(std::cos(bearing), std::sin(bearing));
  for (double t = 0.0; t <= max_range; t += inc) {
    const auto cell = g.cell_of(o.x() + t * d.x(), o.y() + t * d.y());
    if (!cell || g.at(cell->x(), cell->y()) == Cell::obstacle) return t;
  }
  return max_range;
}

}  // namespace

TEST_CASE("white raster without inflation is all free") {
  const auto g = load_grid(blank(10, 10), 0.1, 0.0);
  CHECK(count(g, Cell::free) == 100);
  CHECK(g.free_area() == doctest::Approx(1.0));
}

TEST_CASE("single obstacle inflation matches the per-cell distance scan") {
  GrayImage img = blank(11, 11);
  img.pixels[5 * 11 + 5] = 0;
  const auto g = load_grid(img, 1.0, 1.5);
  int expected = 0;
  for (int j = 0; j < 11; ++j) {
    for (int i = 0; i < 11; ++i) {
      const double d = std::hypot(i - 5.0, j - 5.0);
      if (d > 0.0 && d <= 1.5) ++expected;
    }
  }
  CHECK(expected == 8);
  CHECK(count(g, Cell::inflated) == 8);
  CHECK(count(g, Cell::obstacle) == 1);
  CHECK(g.at(5, 5) == Cell::obstacle);
  CHECK(g.at(6, 6) == Cell::inflated);
  CHECK(g.at(7, 5) == Cell::free);
}

TEST_CASE("inflation agrees with brute force on random rasters") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GrayImage img = random_raster(40, 30, 0.03, seed);
    for (double r : {0.0, 0.1, 0.25, 0.35}) {
      const auto g = load_grid(img, 0.1, r);
      CHECK(g.cells() == brute_force_labels(img, 0.1, r));
    }
  }
}

TEST_CASE("inflation is monotone in the radius") {
  const GrayImage img = random_raster(40, 40, 0.02, 9);
  const auto small = load_grid(img, 0.1, 0.2);
  const auto large = load_grid(img, 0.1, 0.5);
  for (std::size_t k = 0; k < small.cells().size(); ++k) {
    if (small.cells()[k] != Cell::free) CHECK(large.cells()[k] != Cell::free);
  }
}

TEST_CASE("all-black raster has no free space") {
  const auto g = load_grid(blank(8, 8, 0), 0.1, 0.2);
  CHECK(count(g, Cell::free) == 0);
  Rng rng(1);
  CHECK_THROWS_AS(sample_free(g, rng), Error);
  try {
    sample_free(g, rng);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::no_free_space);
  }
}

TEST_CASE("load_grid rejects bad input") {
  CHECK_THROWS_AS(load_grid(blank(4, 4), 0.0, 0.1), Error);
  CHECK_THROWS_AS(load_grid(blank(4, 4), -1.0, 0.1), Error);
  CHECK_THROWS_AS(load_grid(GrayImage{}, 0.1, 0.1), Error);
}

TEST_CASE("luminance threshold is at half scale") {
  GrayImage img = blank(2, 1);
  img.pixels = {127, 128};
  const auto g = load_grid(img, 1.0, 0.0);
  CHECK(g.at(0, 0) == Cell::obstacle);
  CHECK(g.at(1, 0) == Cell::free);
}

TEST_CASE("is_free on free, inflated and out-of-bounds points") {
  GrayImage img = blank(20, 20);
  wall(img, 0.1, 1.0, 1.0, 1.1, 1.1);
  const auto g = load_grid(img, 0.1, 0.3, Eigen::Vector2d(-1.0, 2.0));
  CHECK(is_free(g, {-1.0 + 0.05, 2.0 + 0.05, 0}));
  CHECK_FALSE(is_free(g, {-1.0 + 1.25, 2.0 + 1.05, 0}));  // inflated band
  CHECK_FALSE(is_free(g, {-1.0 + 1.05, 2.0 + 1.05, 0}));  // obstacle
  CHECK_FALSE(is_free(g, {-1.01, 2.5, 0}));
  CHECK_FALSE(is_free(g, {0.5, 4.0, 0}));  // x + width edge is outside
}

TEST_CASE("world/cell conversion round-trips inside cells") {
  const auto g = load_grid(blank(13, 7), 0.25, 0.0, Eigen::Vector2d(3.0, -2.0));
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const int i = static_cast<int>(rng() % 13), j = static_cast<int>(rng() % 7);
    const Eigen::Vector2d c = g.cell_center(i, j);
    const Eigen::Vector2d p = c + Eigen::Vector2d(uniform(rng, -0.12, 0.12), uniform(rng, -0.12, 0.12));
    const auto cell = g.cell_of(p.x(), p.y());
    REQUIRE(cell);
    CHECK(cell->x() == i);
    CHECK(cell->y() == j);
  }
}

TEST_CASE("segment checks") {
  GrayImage img = blank(50, 50);
  wall(img, 0.1, 2.4, 0.0, 2.6, 3.0);
  const auto g = load_grid(img, 0.1, 0.0);
  const ConfigPoint a{1.0, 1.0, 0}, b{4.0, 1.0, 0}, c{1.0, 4.0, 0};
  CHECK(segment_free(g, a, a, 0.05));
  CHECK_FALSE(segment_free(g, a, b, 0.05));
  CHECK(segment_free(g, a, c, 0.05));
  CHECK_THROWS_AS(segment_free(g, a, c, 0.0), Error);
  CHECK_THROWS_AS(segment_free(g, a, c, -0.1), Error);

  // n = ceil(3 / 0.05) = 60 intervals, 61 points
  const auto check = check_segment(g, a, c, 0.05);
  CHECK(check.free);
  CHECK(check.checks == 61);
}

TEST_CASE("segment_free agrees with step/16 supersampling and is symmetric") {
  const GrayImage img = random_raster(60, 60, 0.01, 21);
  const auto g = load_grid(img, 0.1, 0.2);
  const double step = 0.05;
  Rng rng(77);
  int agree = 0;
  for (int k = 0; k < 100; ++k) {
    ConfigPoint a, b;
    do {
      a = {uniform(rng, 0, 6), uniform(rng, 0, 6), 0};
      b = a + ConfigPoint(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5), 0);
    } while (!is_free(g, a) || !is_free(g, b));
    const ConfigPoint lo = (a.x() < b.x() || (a.x() == b.x() && a.y() <= b.y())) ? a : b;
    const ConfigPoint hi = lo == a ? b : a;
    const auto n = static_cast<int>(std::ceil((hi - lo).norm() / step)) * 16;
    bool oracle = true;
    for (int s = 0; s <= n && oracle; ++s) oracle = is_free(g, ConfigPoint(lo + (hi - lo) * (double(s) / n)));
    agree += segment_free(g, a, b, step) == oracle;
    CHECK(segment_free(g, a, b, step) == segment_free(g, b, a, step));
  }
  CHECK(agree == 100);
}

TEST_CASE("raycast on an empty map returns the max range") {
  const auto g = load_grid(blank(200, 200), 0.1, 0.0);
  for (int k = 0; k < 64; ++k) CHECK(raycast(g, {10.0, 10.0, 0}, k * 0.1, 5.0) == 5.0);
}

TEST_CASE("raycast against a straight wall matches the line intersection") {
  GrayImage img = blank(100, 100);
  wall(img, 0.1, 6.0, 0.0, 7.0, 10.0);
  const auto g = load_grid(img, 0.1, 0.35);
  const ConfigPoint o{5.0, 5.03, 0};
  CHECK(raycast(g, o, 0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double bearing : {-1.0, -0.5, -0.1, 0.2, 0.7, 1.2}) {
    const double expected = 1.0 / std::cos(bearing);
    CHECK(raycast(g, o, bearing, 5.0) == doctest::Approx(std::min(expected, 5.0)).epsilon(1e-9));
  }
  // Pointing away from the wall: clear to max range.
  CHECK(raycast(g, o, kPi, 4.0) == 4.0);
  // Inflated cells do not stop rays; origin inside the band still sees the wall.
  CHECK(raycast(g, {5.8, 5.0, 0}, 0.0, 5.0) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("raycast from outside the grid is an error") {
  const auto g = load_grid(blank(10, 10), 0.1, 0.0);
  CHECK_THROWS_AS(raycast(g, {-0.5, 0.5, 0}, 0.0, 5.0), Error);
}

TEST_CASE("raycast agrees with fine marching and is monotone in max range") {
  const auto g = load_grid(generate_maze(3, 20, 20, 2.5, 0.1), 0.1, 0.35);
  Rng rng(5);
  for (int k = 0; k < 2000; ++k) {
    const ConfigPoint o = sample_free(g, rng);
    const double bearing = uniform(rng, -kPi, kPi);
    const double r = raycast(g, o, bearing, 5.0);
    const double marched = marched_range(g, o, bearing, 5.0, 1e-4);
    CHECK(std::abs(r - marched) <= 1.1e-4);
    const double r1 = raycast(g, o, bearing, 2.0);
    CHECK(r1 <= r);
    if (r < 2.0) CHECK(r1 == r);
    if (r >= 2.0) CHECK(r1 == 2.0);
  }
}

TEST_CASE("map border stops rays") {
  const auto g = load_grid(blank(30, 30), 0.1, 0.0);
  CHECK(raycast(g, {1.0, 1.5, 0}, 0.0, 5.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sample_free is uniform over quadrants") {
  const auto g = load_grid(blank(40, 40), 0.1, 0.0);
  Rng rng(2024);
  int q[4] = {0, 0, 0, 0};
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const ConfigPoint p = sample_free(g, rng);
    REQUIRE(is_free(g, p));
    q[(p.x() >= 2.0 ? 1 : 0) + (p.y() >= 2.0 ? 2 : 0)]++;
  }
  double chi2 = 0.0;
  for (int c : q) chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  CHECK(chi2 < 11.345);  // chi-square, 3 dof, alpha = 0.01
}

TEST_CASE("single free cell sampling stays in that cell") {
  GrayImage img = blank(5, 5, 0);
  img.pixels[2 * 5 + 3] = 255;  // row 2, column 3 -> cell (3, 2)
  const auto g = load_grid(img, 0.5, 0.0);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const ConfigPoint p = sample_free(g, rng);
    CHECK(p.x() > 1.5);
    CHECK(p.x() < 2.0);
    CHECK(p.y() > 1.0);
    CHECK(p.y() < 1.5);
  }
}

TEST_CASE("aerial workspace extrudes footprints") {
  GrayImage img = blank(40, 40);
  wall(img, 0.1, 1.5, 1.5, 2.5, 2.5);
  const AerialWorkspace space(load_grid(img, 0.1, 0.3), 2.0, 0.3, 0.5, 3.0);
  CHECK(space.is_free({0.5, 0.5, 1.0}));
  CHECK_FALSE(space.is_free({0.5, 0.5, 0.4}));  // below z_min
  CHECK_FALSE(space.is_free({0.5, 0.5, 3.1}));  // above z_max
  CHECK_FALSE(space.is_free({2.0, 2.0, 1.0}));  // inside the block
  CHECK_FALSE(space.is_free({2.0, 2.0, 2.2}));  // within clearance of the top
  CHECK(space.is_free({2.0, 2.0, 2.4}));        // above it
  CHECK_FALSE(space.is_free({1.3, 2.0, 2.2}));  // inflated ring inherits the top
  CHECK(space.is_free({1.3, 2.0, 2.5}));
  Rng rng(1);
  for (int k = 0; k < 500; ++k) CHECK(space.is_free(space.sample_free(rng)));
  CHECK(space.check_segment({0.5, 2.0, 1.0}, {3.5, 2.0, 1.0}, 0.05).free == false);
  CHECK(space.check_segment({0.5, 2.0, 2.6}, {3.5, 2.0, 2.6}, 0.05).free == true);
}

TEST_CASE("world hashes differ by content") {
  GrayImage img = blank(20, 20);
  const World a(load_grid(img, 0.1, 0.2));
  wall(img, 0.1, 1.0, 1.0, 1.1, 1.1);
  const World b(load_grid(img, 0.1, 0.2));
  CHECK(a.content_hash() != b.content_hash());
  CHECK(a.content_hash() == World(load_grid(blank(20, 20), 0.1, 0.2)).content_hash());
  CHECK(a.task() == TaskKind::indoor);
  CHECK(a.collision_step() == doctest::Approx(0.05));
}

TEST_CASE("map files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "prmrl_test_map";
  std::filesystem::create_directories(dir);
  MapSpec spec;
  spec.image = generate_maze(4, 8, 6, 2.0, 0.1);
  spec.resolution = 0.1;
  spec.inflation_radius = 0.25;
  spec.origin = {1.5, -2.0};
  spec.z_max = 4.0;
  const std::string meta = (dir / "small.map").string();
  write_map(meta, spec);
  const MapSpec back = read_map(meta);
  CHECK(back.name == "small");
  CHECK(back.image.pixels == spec.image.pixels);
  CHECK(back.image.width == spec.image.width);
  CHECK(back.resolution == spec.resolution);
  CHECK(back.inflation_radius == spec.inflation_radius);
  CHECK(back.origin == spec.origin);
  CHECK(back.z_max == 4.0);
  CHECK(back.grid().content_hash() == spec.grid().content_hash());

  write_text_file((dir / "bad.map").string(), "resolution=0.1\n");
  CHECK_THROWS_AS(read_map((dir / "bad.map").string()), Error);
  write_text_file((dir / "broken.pgm").string(), "P5\n4 4\n255\nxx");
  CHECK_THROWS_AS(read_pgm((dir / "broken.pgm").string()), Error);
  CHECK_THROWS_AS(read_pgm((dir / "missing.pgm").string()), Error);
}

TEST_CASE("mazes are deterministic, walled and connected") {
  const GrayImage a = generate_maze(11, 20, 20, 3.0, 0.1);
  const GrayImage b = generate_maze(11, 20, 20, 3.0, 0.1);
  const GrayImage c = generate_maze(12, 20, 20, 3.0, 0.1);
  CHECK(a.pixels == b.pixels);
  CHECK(a.pixels != c.pixels);
  CHECK(a.width == 200);
  CHECK(a.height == 200);
  for (int k = 0; k < 200; ++k) {
    CHECK(a.at(k, 0) == 0);
    CHECK(a.at(0, k) == 0);
  }
  const auto g = load_grid(a, 0.1, 0.35);
  // Flood fill over FREE cells reaches every FREE cell.
  const auto& free = g.free_cells();
  REQUIRE(!free.empty());
  std::vector<char> seen(g.cells().size(), 0);
  std::queue<std::uint32_t> open;
  open.push(free.front());
  seen[free.front()] = 1;
  std::size_t reached = 0;
  while (!open.empty()) {
    const auto k = open.front();
    open.pop();
    ++reached;
    const int i = static_cast<int>(k % g.width()), j = static_cast<int>(k / g.width());
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      if (!g.in_bounds(i + di, j + dj) || g.at(i + di, j + dj) != Cell::free) continue;
      const auto nk = g.index(i + di, j + dj);
      if (!seen[nk]) {
        seen[nk] = 1;
        open.push(static_cast<std::uint32_t>(nk));
      }
    }
  }
  CHECK(reached == free.size());
}
