#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace escnav {

inline constexpr double kPi = 3.14159265358979323846;

// Integer grid cell. x is the column, y the row; y grows "north".
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

struct CellHash {
  size_t operator()(const Cell& c) const {
    return std::hash<int64_t>()((static_cast<int64_t>(c.y) << 32) ^ static_cast<uint32_t>(c.x));
  }
};

// Continuous map point in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Normalize an angle in degrees to [-180, 180).
inline double wrap_deg(double d) {
  d = std::fmod(d + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline Cell point_to_cell(const Point& p, double resolution) {
  return {static_cast<int>(std::floor(p.x / resolution)),
          static_cast<int>(std::floor(p.y / resolution))};
}

inline Point cell_center(const Cell& c, double resolution) {
  return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
}

// Cells whose interior the segment a->b passes through, in order, including
// the cells containing the endpoints. Amanatides & Woo grid traversal.
std::vector<Cell> cells_on_segment(const Point& a, const Point& b, double resolution);

}  // namespace escnav
