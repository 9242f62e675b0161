#pragma once

#include <optional>
#include <string>
#include <vector>

#include "escnav/mapping.hpp"
#include "escnav/world.hpp"

namespace escnav {

// Occupancy PGM: Unknown=128, Free=255, Obstacle=0. Row 0 is the top of the
// image (largest y).
std::string to_pgm(const NavMap& map);

struct OverlaySpec {
  const NavMap* nav = nullptr;
  const SemanticMap* sem = nullptr;                 // room tint + object points
  const std::vector<Frontier>* frontiers = nullptr; // drawn green
  std::vector<Point> path;                          // agent path history, blue
  std::optional<Pose> agent;
  std::optional<Point> chosen_frontier;             // highlighted
  std::vector<Point> goal_markers;                  // ground-truth goal cells
};

// Color overlay PPM matching to_pgm's geometry.
std::string to_ppm(const OverlaySpec& spec);

void write_file(const std::string& path, const std::string& content);

}  // namespace escnav
