#pragma once

#include <vector>

namespace t2sim {

/// Location in terrain coordinates. z_agl is height above local ground; the
/// absolute altitude of a node is ground elevation at (x, y) plus z_agl.
struct Position {
  double x = 0.0;
  double y = 0.0;
  double z_agl = 0.0;

  bool operator==(const Position&) const = default;
};

/// Heightmap over a rectangular cell grid. Elevation is piecewise-constant
/// per cell. A default-constructed Terrain is the unbounded flat plane at
/// elevation zero (scenarios without a heightmap).
class Terrain {
 public:
  Terrain() = default;

  static Terrain flat() { return Terrain(); }

  /// elevation is row-major, length width_cells * height_cells.
  static Terrain from_grid(int width_cells, int height_cells,
                           double cell_size_m, std::vector<double> elevation);

  bool bounded() const { return width_cells_ > 0; }
  int width_cells() const { return width_cells_; }
  int height_cells() const { return height_cells_; }
  double cell_size_m() const { return cell_size_m_; }
  double width_m() const { return width_cells_ * cell_size_m_; }
  double height_m() const { return height_cells_ * cell_size_m_; }
  const std::vector<double>& elevation() const { return elevation_; }

  /// Ground elevation at a point; indices clamp at the boundary so queries
  /// on the exact upper edge are valid.
  double elevation_at(double x, double y) const;

  bool contains(double x, double y) const;

  bool operator==(const Terrain&) const = default;

 private:
  int width_cells_ = 0;  // 0 = unbounded flat plane
  int height_cells_ = 0;
  double cell_size_m_ = 1.0;
  std::vector<double> elevation_;
};

double absolute_altitude_m(const Terrain& terrain, const Position& p);
double horizontal_distance_m(const Position& a, const Position& b);
/// Straight-line distance between absolute (x, y, altitude) points.
double distance3d_m(const Terrain& terrain, const Position& a,
                    const Position& b);

}  // namespace t2sim
