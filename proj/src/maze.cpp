#include <algorithm>
#include <cmath>
#include <vector>

#include "prmrl/workspace.hpp"

namespace prmrl {

GrayImage generate_maze(std::uint64_t seed, double width, double height, double corridor_width, double resolution,
                        double wall_thickness) {
  if (!(resolution > 0.0) || !(corridor_width > 0.0) || !(wall_thickness > 0.0)) {
    fail(ErrorCategory::invalid_argument, "maze dimensions must be positive");
  }
  const double pitch = corridor_width + wall_thickness;
  const int nx = static_cast<int>(std::floor((width - wall_thickness) / pitch + 1e-9));
  const int ny = static_cast<int>(std::floor((height - wall_thickness) / pitch + 1e-9));
  if (nx < 1 || ny < 1) fail(ErrorCategory::invalid_argument, "maze area too small for one corridor cell");

  GrayImage img;
  img.width = static_cast<int>(std::lround(width / resolution));
  img.height = static_cast<int>(std::lround(height / resolution));
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);

  // Carve an axis-aligned world rectangle [x0,x1) x [y0,y1); world y grows upward.
  auto carve = [&](double x0, double y0, double x1, double y1) {
    const int c0 = std::max(0, static_cast<int>(std::lround(x0 / resolution)));
    const int c1 = std::min(img.width, static_cast<int>(std::lround(x1 / resolution)));
    const int j0 = std::max(0, static_cast<int>(std::lround(y0 / resolution)));
    const int j1 = std::min(img.height, static_cast<int>(std::lround(y1 / resolution)));
    for (int j = j0; j < j1; ++j) {
      for (int c = c0; c < c1; ++c) img.pixels[static_cast<std::size_t>(img.height - 1 - j) * img.width + c] = 255;
    }
  };
  auto cell_x = [&](int cx) { return wall_thickness + cx * pitch; };
  auto cell_y = [&](int cy) { return wall_thickness + cy * pitch; };

  Rng rng(seed);
  std::vector<char> visited(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<int> stack{0};
  visited[0] = 1;
  carve(cell_x(0), cell_y(0), cell_x(0) + corridor_width, cell_y(0) + corridor_width);
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const int cur = stack.back();
    const int cx = cur % nx;
    const int cy = cur / nx;
    int options[4];
    int count = 0;
    for (int d = 0; d < 4; ++d) {
      const int ax = cx + dx[d];
      const int ay = cy + dy[d];
      if (ax >= 0 && ay >= 0 && ax < nx && ay < ny && !visited[static_cast<std::size_t>(ay) * nx + ax]) {
        options[count++] = d;
      }
    }
    if (count == 0) {
      stack.pop_back();
      continue;
    }
    const int d = options[rng() % static_cast<std::uint64_t>(count)];
    const int ax = cx + dx[d];
    const int ay = cy + dy[d];
    visited[static_cast<std::size_t>(ay) * nx + ax] = 1;
    carve(cell_x(ax), cell_y(ay), cell_x(ax) + corridor_width, cell_y(ay) + corridor_width);
    // Opening between the two cells.
    const double ox0 = cell_x(std::min(cx, ax));
    const double oy0 = cell_y(std::min(cy, ay));
    carve(ox0, oy0, cell_x(std::max(cx, ax)) + corridor_width, cell_y(std::max(cy, ay)) + corridor_width);
    stack.push_back(ay * nx + ax);
  }
  return img;
}

}  // namespace prmrl
