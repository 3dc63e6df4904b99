#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "prmrl/common.hpp"

namespace prmrl {

enum class Cell : std::uint8_t { free = 0, obstacle = 1, inflated = 2 };

// 8-bit grayscale raster. Row 0 is the top of the image (PGM order).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& image);

// Rasterized workspace. Cell (i, j) covers
// [origin.x + i*res, origin.x + (i+1)*res) x [origin.y + j*res, origin.y + (j+1)*res);
// j grows with world y, so image row r maps to j = height - 1 - r.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, Eigen::Vector2d origin, std::vector<Cell> cells);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  const std::vector<Cell>& cells() const { return cells_; }

  Cell at(int i, int j) const { return cells_[index(i, j)]; }
  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }

  std::optional<Eigen::Vector2i> cell_of(double x, double y) const;
  Eigen::Vector2d cell_center(int i, int j) const;

  // Indices (j*width + i) of FREE cells, ascending.
  const std::vector<std::uint32_t>& free_cells() const { return free_cells_; }
  double free_area() const;
  Eigen::Vector2d extent() const { return {width_ * resolution_, height_ * resolution_}; }

  // FNV-1a over dimensions, resolution, origin and labels.
  std::uint64_t content_hash() const;

  // Lower bound, in cells, on the distance from any point of cell (i, j) to
  // the nearest OBSTACLE cell or the grid border; negative on OBSTACLE cells.
  // Lets rays skip open space.
  float open_radius(int i, int j) const { return open_radius_[index(i, j)]; }

 private:
  int width_;
  int height_;
  double resolution_;
  Eigen::Vector2d origin_;
  std::vector<Cell> cells_;
  std::vector<std::uint32_t> free_cells_;
  std::vector<float> open_radius_;
};

// Luminance < 0.5 (pixel < 128) is OBSTACLE; cells whose center lies within
// inflation_radius of an OBSTACLE cell center become INFLATED.
OccupancyGrid load_grid(const GrayImage& raster, double resolution, double inflation_radius,
                        Eigen::Vector2d origin = Eigen::Vector2d::Zero());

bool is_free(const OccupancyGrid& grid, const ConfigPoint& p);

struct SegmentCheck {
  bool free = false;
  std::size_t checks = 0;
};

// Samples ceil(|b-a|/step) + 1 evenly spaced points including both ends.
// Endpoints are put in canonical order first so the result is symmetric.
SegmentCheck check_segment(const OccupancyGrid& grid, const ConfigPoint& a, const ConfigPoint& b, double step);
bool segment_free(const OccupancyGrid& grid, const ConfigPoint& a, const ConfigPoint& b, double step);

// Distance to the first OBSTACLE cell (or the map border) along bearing,
// clamped to max_range. INFLATED cells do not block rays.
double raycast(const OccupancyGrid& grid, const ConfigPoint& origin, double bearing, double max_range);

// Uniform over the FREE area.
ConfigPoint sample_free(const OccupancyGrid& grid, Rng& rng);

// Obstacles extruded from the grid footprint. A point is free when it is
// inside [z_min, z_max] and either over a FREE cell or above the cell's top
// (height + clearance). INFLATED cells inherit the tallest obstacle within
// the inflation radius.
class AerialWorkspace {
 public:
  AerialWorkspace(OccupancyGrid footprint, std::vector<double> obstacle_heights, double inflation_radius,
                  double z_min, double z_max);
  AerialWorkspace(OccupancyGrid footprint, double obstacle_height, double inflation_radius, double z_min,
                  double z_max);

  const OccupancyGrid& footprint() const { return footprint_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  double top(int i, int j) const { return tops_[footprint_.index(i, j)]; }

  bool is_free(const ConfigPoint& p) const;
  SegmentCheck check_segment(const ConfigPoint& a, const ConfigPoint& b, double step) const;
  // Rejection sampling over the free volume; throws when nothing is free.
  ConfigPoint sample_free(Rng& rng) const;

 private:
  OccupancyGrid footprint_;
  std::vector<double> tops_;  // per cell; -inf for FREE cells
  double z_min_;
  double z_max_;
};

// The planning space of one task: a plain grid for indoor navigation, an
// extruded airspace for aerial delivery.
class World {
 public:
  explicit World(OccupancyGrid grid) : space_(std::move(grid)) {}
  explicit World(AerialWorkspace airspace) : space_(std::move(airspace)) {}

  TaskKind task() const { return std::holds_alternative<OccupancyGrid>(space_) ? TaskKind::indoor : TaskKind::aerial; }
  // Footprint grid for the aerial task.
  const OccupancyGrid& grid() const;
  const AerialWorkspace& airspace() const;

  bool is_free(const ConfigPoint& p) const;
  ConfigPoint sample_free(Rng& rng) const;
  SegmentCheck check_segment(const ConfigPoint& a, const ConfigPoint& b, double step) const;
  // Straight-line interpolation spacing: half a cell.
  double collision_step() const { return grid().resolution() / 2; }
  // Free footprint area, m^2.
  double free_area() const { return grid().free_area(); }
  std::uint64_t content_hash() const;

 private:
  std::variant<OccupancyGrid, AerialWorkspace> space_;
};

// Sidecar map metadata (key=value):
//   image=<pgm path, relative to the metadata file>
//   resolution=<m/cell>  inflation_radius=<m>  origin_x=<m>  origin_y=<m>
//   obstacle_height=<m>  z_min=<m>  z_max=<m>      (aerial only)
struct MapSpec {
  std::string name;
  GrayImage image;
  double resolution = 0.1;
  double inflation_radius = 0.35;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double obstacle_height = 2.0;
  double z_min = 0.5;
  double z_max = 3.0;

  OccupancyGrid grid() const { return load_grid(image, resolution, inflation_radius, origin); }
  AerialWorkspace airspace() const;
  World world(TaskKind task) const;
};

MapSpec read_map(const std::string& meta_path);
void write_map(const std::string& meta_path, const MapSpec& spec);

// Perfect maze (recursive backtracker) over a width x height meter area.
// Corridors are corridor_width wide, walls wall_thickness thick; the outer
// border is wall. Deterministic in (seed, width, height, corridor_width).
GrayImage generate_maze(std::uint64_t seed, double width, double height, double corridor_width,
                        double resolution, double wall_thickness = 0.2);

}  // namespace prmrl
