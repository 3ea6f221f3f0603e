#include "t2sim/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace t2sim {

Terrain Terrain::from_grid(int width_cells, int height_cells,
                           double cell_size_m, std::vector<double> elevation) {
  if (width_cells <= 0 || height_cells <= 0) {
    throw std::invalid_argument("terrain grid dimensions must be positive");
  }
  if (cell_size_m <= 0.0) {
    throw std::invalid_argument("terrain cell size must be positive");
  }
  if (elevation.size() !=
      static_cast<size_t>(width_cells) * static_cast<size_t>(height_cells)) {
    throw std::invalid_argument(
        "terrain elevation length must equal width_cells * height_cells");
  }
  Terrain t;
  t.width_cells_ = width_cells;
  t.height_cells_ = height_cells;
  t.cell_size_m_ = cell_size_m;
  t.elevation_ = std::move(elevation);
  return t;
}

double Terrain::elevation_at(double x, double y) const {
  if (!bounded()) {
    return 0.0;
  }
  int i = static_cast<int>(std::floor(x / cell_size_m_));
  int j = static_cast<int>(std::floor(y / cell_size_m_));
  i = std::clamp(i, 0, width_cells_ - 1);
  j = std::clamp(j, 0, height_cells_ - 1);
  return elevation_[static_cast<size_t>(j) * width_cells_ + i];
}

bool Terrain::contains(double x, double y) const {
  if (!bounded()) {
    return true;
  }
  return x >= 0.0 && x <= width_m() && y >= 0.0 && y <= height_m();
}

double absolute_altitude_m(const Terrain& terrain, const Position& p) {
  return terrain.elevation_at(p.x, p.y) + p.z_agl;
}

double horizontal_distance_m(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double distance3d_m(const Terrain& terrain, const Position& a,
                    const Position& b) {
  double dz = absolute_altitude_m(terrain, a) - absolute_altitude_m(terrain, b);
  return std::hypot(a.x - b.x, a.y - b.y, dz);
}

}  // namespace t2sim
