#include "prmrl/workspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace prmrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D squared distance transform (lower envelope of parabolas).
constexpr double kFar = 1e20;

void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  auto intersect = [&f](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
  };
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (double(q) - v[k]) * (double(q) - v[k]) + f[v[k]];
  }
}

// Squared distance (in cells) from each cell center to the nearest obstacle cell center.
std::vector<double> squared_distance_field(int width, int height, const std::vector<Cell>& cells) {
  std::vector<double> field(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) field[k] = cells[k] == Cell::obstacle ? 0.0 : kFar;
  const int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  f.resize(height);
  d.resize(height);
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < height; ++j) f[j] = field[static_cast<std::size_t>(j) * width + i];
    distance_transform_1d(f, d, v, z);
    for (int j = 0; j < height; ++j) field[static_cast<std::size_t>(j) * width + i] = d[j];
  }
  f.resize(width);
  d.resize(width);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) f[i] = field[static_cast<std::size_t>(j) * width + i];
    distance_transform_1d(f, d, v, z);
    for (int i = 0; i < width; ++i) field[static_cast<std::size_t>(j) * width + i] = d[i];
  }
  return field;
}

bool lexicographically_less(const ConfigPoint& a, const ConfigPoint& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

template <class FreeFn>
SegmentCheck sample_segment(const ConfigPoint& a_in, const ConfigPoint& b_in, double step, FreeFn&& free_at) {
  if (!(step > 0.0)) fail(ErrorCategory::invalid_argument, "segment step must be positive");
  const bool swap = lexicographically_less(b_in, a_in);
  const ConfigPoint& a = swap ? b_in : a_in;
  const ConfigPoint& b = swap ? a_in : b_in;
  const double length = (b - a).norm();
  const auto n = static_cast<std::size_t>(std::ceil(length / step));
  SegmentCheck out;
  for (std::size_t k = 0; k <= n; ++k) {
    const ConfigPoint p = n == 0 ? a : ConfigPoint(a + (b - a) * (double(k) / double(n)));
    ++out.checks;
    if (!free_at(p)) return out;
  }
  out.free = true;
  return out;
}

std::string next_pgm_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

// ---------------------------------------------------------------------------

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Eigen::Vector2d origin,
                             std::vector<Cell> cells)
    : width_(width), height_(height), resolution_(resolution), origin_(std::move(origin)), cells_(std::move(cells)) {
  if (!(resolution > 0.0)) fail(ErrorCategory::invalid_argument, "grid resolution must be positive");
  if (width < 1 || height < 1) fail(ErrorCategory::invalid_argument, "grid must have at least one cell");
  if (cells_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCategory::invalid_argument, "cell count does not match grid dimensions");
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (cells_[k] == Cell::free) free_cells_.push_back(static_cast<std::uint32_t>(k));
  }
  // A point in a cell is within sqrt(2)/2 of its center, and so is the nearest
  // point of an obstacle cell from that cell's center.
  const auto field = squared_distance_field(width_, height_, cells_);
  open_radius_.resize(cells_.size());
  for (int j = 0; j < height_; ++j) {
    for (int i = 0; i < width_; ++i) {
      const double border = std::min({i + 0.5, j + 0.5, width_ - i - 0.5, height_ - j - 0.5}) - M_SQRT1_2;
      const double obstacle = std::sqrt(field[index(i, j)]) - M_SQRT2;
      // float rounding must not overstate the radius
      open_radius_[index(i, j)] = at(i, j) == Cell::obstacle
                                      ? -1.0f
                                      : std::max(0.0f, static_cast<float>(std::min(border, obstacle)) * 0.999f - 1e-3f);
    }
  }
}

std::optional<Eigen::Vector2i> OccupancyGrid::cell_of(double x, double y) const {
  const double gx = (x - origin_.x()) / resolution_;
  const double gy = (y - origin_.y()) / resolution_;
  if (!(gx >= 0.0 && gy >= 0.0 && gx < width_ && gy < height_)) return std::nullopt;
  const int i = std::min(static_cast<int>(gx), width_ - 1);
  const int j = std::min(static_cast<int>(gy), height_ - 1);
  return Eigen::Vector2i(i, j);
}

Eigen::Vector2d OccupancyGrid::cell_center(int i, int j) const {
  return origin_ + Eigen::Vector2d((i + 0.5) * resolution_, (j + 0.5) * resolution_);
}

double OccupancyGrid::free_area() const {
  return static_cast<double>(free_cells_.size()) * resolution_ * resolution_;
}

std::uint64_t OccupancyGrid::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= bytes[k];
      h *= 0x100000001b3ULL;
    }
  };
  mix(&width_, sizeof width_);
  mix(&height_, sizeof height_);
  mix(&resolution_, sizeof resolution_);
  mix(origin_.data(), 2 * sizeof(double));
  mix(cells_.data(), cells_.size());
  return h;
}

OccupancyGrid load_grid(const GrayImage& raster, double resolution, double inflation_radius, Eigen::Vector2d origin) {
  if (!(resolution > 0.0)) fail(ErrorCategory::invalid_argument, "resolution must be positive");
  if (raster.width < 1 || raster.height < 1 ||
      raster.pixels.size() != static_cast<std::size_t>(raster.width) * raster.height) {
    fail(ErrorCategory::invalid_argument, "raster is empty or malformed");
  }
  if (!(inflation_radius >= 0.0)) fail(ErrorCategory::invalid_argument, "inflation radius must be >= 0");
  const int w = raster.width;
  const int h = raster.height;
  std::vector<Cell> cells(static_cast<std::size_t>(w) * h, Cell::free);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (raster.at(c, r) < 128) cells[static_cast<std::size_t>(h - 1 - r) * w + c] = Cell::obstacle;
    }
  }
  if (inflation_radius > 0.0) {
    const auto field = squared_distance_field(w, h, cells);
    const double r_cells = inflation_radius / resolution;
    const double limit = r_cells * r_cells * (1.0 + 1e-12);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k] == Cell::free && field[k] <= limit) cells[k] = Cell::inflated;
    }
  }
  return OccupancyGrid(w, h, resolution, std::move(origin), std::move(cells));
}

bool is_free(const OccupancyGrid& grid, const ConfigPoint& p) {
  const auto cell = grid.cell_of(p.x(), p.y());
  return cell && grid.at(cell->x(), cell->y()) == Cell::free;
}

SegmentCheck check_segment(const OccupancyGrid& grid, const ConfigPoint& a, const ConfigPoint& b, double step) {
  return sample_segment(a, b, step, [&grid](const ConfigPoint& p) { return is_free(grid, p); });
}

bool segment_free(const OccupancyGrid& grid, const ConfigPoint& a, const ConfigPoint& b, double step) {
  return check_segment(grid, a, b, step).free;
}

double raycast(const OccupancyGrid& grid, const ConfigPoint& origin, double bearing, double max_range) {
  const auto start = grid.cell_of(origin.x(), origin.y());
  if (!start) fail(ErrorCategory::invalid_argument, "raycast origin outside grid");
  int i = start->x();
  int j = start->y();
  if (grid.at(i, j) == Cell::obstacle) return 0.0;

  const double res = grid.resolution();
  const double gx = (origin.x() - grid.origin().x()) / res;
  const double gy = (origin.y() - grid.origin().y()) / res;
  const double dx = std::cos(bearing);
  const double dy = std::sin(bearing);
  const int step_i = dx > 0.0 ? 1 : -1;
  const int step_j = dy > 0.0 ? 1 : -1;
  const double t_delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : kInf;
  const double t_delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : kInf;
  // Ray parameters are in cell units; multiply by res for meters.
  const double t_limit = max_range / res;

  // Cell-boundary walk (Amanatides-Woo), restarted after each skip through
  // open space.
  double t0 = 0.0;
  for (;;) {
    const double px = gx + t0 * dx;
    const double py = gy + t0 * dy;
    double t_max_x = dx > 0.0 ? t0 + (i + 1 - px) / dx : dx < 0.0 ? t0 + (i - px) / dx : kInf;
    double t_max_y = dy > 0.0 ? t0 + (j + 1 - py) / dy : dy < 0.0 ? t0 + (j - py) / dy : kInf;
    for (;;) {
      double t = 0.0;
      if (t_max_x < t_max_y) {
        t = t_max_x;
        t_max_x += t_delta_x;
        i += step_i;
      } else {
        t = t_max_y;
        t_max_y += t_delta_y;
        j += step_j;
      }
      if (t >= t_limit) return max_range;
      if (!grid.in_bounds(i, j)) return std::min(t * res, max_range);
      const double skip = grid.open_radius(i, j);
      if (skip < 0.0) return std::min(t * res, max_range);
      if (skip > 2.0) {
        // Jump from the boundary point just crossed; nothing solid lies within skip.
        t0 = t + skip;
        if (t0 >= t_limit) return max_range;
        i = static_cast<int>(std::floor(gx + t0 * dx));
        j = static_cast<int>(std::floor(gy + t0 * dy));
        break;
      }
    }
  }
}

ConfigPoint sample_free(const OccupancyGrid& grid, Rng& rng) {
  const auto& free = grid.free_cells();
  if (free.empty()) fail(ErrorCategory::no_free_space, "grid has no free cells");
  const auto pick = std::min(static_cast<std::size_t>(uniform01(rng) * free.size()), free.size() - 1);
  const std::uint32_t k = free[pick];
  const int i = static_cast<int>(k % grid.width());
  const int j = static_cast<int>(k / grid.width());
  // Keep away from the far cell edge so rounding cannot push the point into the neighbor.
  const double u = uniform(rng, 1e-9, 1.0 - 1e-9);
  const double v = uniform(rng, 1e-9, 1.0 - 1e-9);
  const double res = grid.resolution();
  return {grid.origin().x() + (i + u) * res, grid.origin().y() + (j + v) * res, 0.0};
}

// ---------------------------------------------------------------------------

AerialWorkspace::AerialWorkspace(OccupancyGrid footprint, std::vector<double> obstacle_heights,
                                 double inflation_radius, double z_min, double z_max)
    : footprint_(std::move(footprint)), z_min_(z_min), z_max_(z_max) {
  if (!(z_max > z_min)) fail(ErrorCategory::invalid_argument, "aerial workspace needs z_max > z_min");
  if (obstacle_heights.size() != footprint_.cells().size()) {
    fail(ErrorCategory::invalid_argument, "height field size does not match footprint");
  }
  const int w = footprint_.width();
  const int h = footprint_.height();
  tops_.assign(footprint_.cells().size(), -kInf);
  const int reach = static_cast<int>(std::ceil(inflation_radius / footprint_.resolution()));
  const double limit = std::pow(inflation_radius / footprint_.resolution(), 2) * (1.0 + 1e-12);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t k = footprint_.index(i, j);
      if (footprint_.at(i, j) != Cell::obstacle) continue;
      const double top = obstacle_heights[k] + inflation_radius;
      tops_[k] = std::max(tops_[k], top);
      for (int dj = -reach; dj <= reach; ++dj) {
        for (int di = -reach; di <= reach; ++di) {
          const int ni = i + di;
          const int nj = j + dj;
          if (!footprint_.in_bounds(ni, nj) || double(di) * di + double(dj) * dj > limit) continue;
          const std::size_t nk = footprint_.index(ni, nj);
          if (footprint_.at(ni, nj) == Cell::inflated) tops_[nk] = std::max(tops_[nk], top);
        }
      }
    }
  }
}

AerialWorkspace::AerialWorkspace(OccupancyGrid footprint, double obstacle_height, double inflation_radius,
                                 double z_min, double z_max)
    : AerialWorkspace(footprint, std::vector<double>(footprint.cells().size(), obstacle_height), inflation_radius,
                      z_min, z_max) {}

bool AerialWorkspace::is_free(const ConfigPoint& p) const {
  if (!(p.z() >= z_min_ && p.z() <= z_max_)) return false;
  const auto cell = footprint_.cell_of(p.x(), p.y());
  if (!cell) return false;
  if (footprint_.at(cell->x(), cell->y()) == Cell::free) return true;
  return p.z() > tops_[footprint_.index(cell->x(), cell->y())];
}

SegmentCheck AerialWorkspace::check_segment(const ConfigPoint& a, const ConfigPoint& b, double step) const {
  return sample_segment(a, b, step, [this](const ConfigPoint& p) { return is_free(p); });
}

ConfigPoint AerialWorkspace::sample_free(Rng& rng) const {
  const Eigen::Vector2d ext = footprint_.extent();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const ConfigPoint p(footprint_.origin().x() + uniform01(rng) * ext.x(),
                        footprint_.origin().y() + uniform01(rng) * ext.y(), uniform(rng, z_min_, z_max_));
    if (is_free(p)) return p;
  }
  fail(ErrorCategory::no_free_space, "aerial workspace has no free volume");
}

// ---------------------------------------------------------------------------

const OccupancyGrid& World::grid() const {
  if (const auto* g = std::get_if<OccupancyGrid>(&space_)) return *g;
  return std::get<AerialWorkspace>(space_).footprint();
}

const AerialWorkspace& World::airspace() const {
  if (const auto* a = std::get_if<AerialWorkspace>(&space_)) return *a;
  fail(ErrorCategory::invalid_argument, "indoor world has no airspace");
}

bool World::is_free(const ConfigPoint& p) const {
  if (const auto* g = std::get_if<OccupancyGrid>(&space_)) return prmrl::is_free(*g, p);
  return std::get<AerialWorkspace>(space_).is_free(p);
}

ConfigPoint World::sample_free(Rng& rng) const {
  if (const auto* g = std::get_if<OccupancyGrid>(&space_)) return prmrl::sample_free(*g, rng);
  return std::get<AerialWorkspace>(space_).sample_free(rng);
}

SegmentCheck World::check_segment(const ConfigPoint& a, const ConfigPoint& b, double step) const {
  if (const auto* g = std::get_if<OccupancyGrid>(&space_)) return prmrl::check_segment(*g, a, b, step);
  return std::get<AerialWorkspace>(space_).check_segment(a, b, step);
}

std::uint64_t World::content_hash() const {
  std::uint64_t h = grid().content_hash();
  if (const auto* a = std::get_if<AerialWorkspace>(&space_)) {
    h = mix_seed(h, std::bit_cast<std::uint64_t>(a->z_min()), std::bit_cast<std::uint64_t>(a->z_max()));
  }
  return h;
}

GrayImage read_pgm(const std::string& path) {
  std::istringstream in(read_text_file(path));
  const std::string magic = next_pgm_token(in);
  if (magic != "P5" && magic != "P2") fail(ErrorCategory::parse, path + ": not a PGM file");
  GrayImage img;
  try {
    img.width = std::stoi(next_pgm_token(in));
    img.height = std::stoi(next_pgm_token(in));
    const int maxval = std::stoi(next_pgm_token(in));
    if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 255) {
      fail(ErrorCategory::parse, path + ": unsupported PGM header");
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(n);
    if (magic == "P5") {
      in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
      if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorCategory::parse, path + ": truncated PGM data");
    } else {
      for (std::size_t k = 0; k < n; ++k) img.pixels[k] = static_cast<std::uint8_t>(std::stoi(next_pgm_token(in)));
    }
    if (maxval != 255) {
      for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(255.0 * p / maxval));
    }
  } catch (const std::invalid_argument&) {
    fail(ErrorCategory::parse, path + ": malformed PGM");
  }
  return img;
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  write_text_file(path, out);
}

AerialWorkspace MapSpec::airspace() const {
  return AerialWorkspace(grid(), obstacle_height, inflation_radius, z_min, z_max);
}

World MapSpec::world(TaskKind task) const {
  return task == TaskKind::indoor ? World(grid()) : World(airspace());
}

MapSpec read_map(const std::string& meta_path) {
  const KeyValues kv = read_key_values(meta_path);
  MapSpec spec;
  spec.name = std::filesystem::path(meta_path).stem().string();
  auto get = [&](const char* key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_double(it->second);
  };
  const auto image = kv.find("image");
  if (image == kv.end()) fail(ErrorCategory::parse, meta_path + ": missing 'image'");
  const auto dir = std::filesystem::path(meta_path).parent_path();
  spec.image = read_pgm((dir / image->second).string());
  spec.resolution = get("resolution", spec.resolution);
  spec.inflation_radius = get("inflation_radius", spec.inflation_radius);
  spec.origin = {get("origin_x", 0.0), get("origin_y", 0.0)};
  spec.obstacle_height = get("obstacle_height", spec.obstacle_height);
  spec.z_min = get("z_min", spec.z_min);
  spec.z_max = get("z_max", spec.z_max);
  if (!(spec.resolution > 0.0)) fail(ErrorCategory::invalid_argument, meta_path + ": resolution must be positive");
  return spec;
}

void write_map(const std::string& meta_path, const MapSpec& spec) {
  const auto path = std::filesystem::path(meta_path);
  const std::string image_name = path.stem().string() + ".pgm";
  write_pgm((path.parent_path() / image_name).string(), spec.image);
  std::string meta = "# prmrl map\nimage=" + image_name + "\n";
  meta += "resolution=" + format_double(spec.resolution) + "\n";
  meta += "inflation_radius=" + format_double(spec.inflation_radius) + "\n";
  meta += "origin_x=" + format_double(spec.origin.x()) + "\n";
  meta += "origin_y=" + format_double(spec.origin.y()) + "\n";
  meta += "obstacle_height=" + format_double(spec.obstacle_height) + "\n";
  meta += "z_min=" + format_double(spec.z_min) + "\n";
  meta += "z_max=" + format_double(spec.z_max) + "\n";
  write_text_file(meta_path, meta);
}

}  // namespace prmrl
