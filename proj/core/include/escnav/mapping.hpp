#pragma once

#include <map>
#include <string>
#include <vector>

#include "escnav/geometry.hpp"
#include "escnav/perception.hpp"
#include "escnav/world.hpp"

namespace escnav {

enum class CellState : uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

// Agent-built occupancy map, aligned to the world grid. Obstacle is sticky:
// once a cell is Obstacle it never reverts within an episode.
class NavMap {
 public:
  NavMap() = default;
  NavMap(int width, int height, double resolution);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  CellState at(const Cell& c) const {
    return in_bounds(c) ? cells_[index(c)] : CellState::Unknown;
  }
  void mark_free(const Cell& c);
  void mark_obstacle(const Cell& c);

  size_t known_count() const;

 private:
  size_t index(const Cell& c) const { return static_cast<size_t>(c.y) * width_ + c.x; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  std::vector<CellState> cells_;
};

// Object points and room labels projected from detections. Confidences are
// post-threshold, so always within [0.61, 1].
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(int width, int height, double resolution);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  struct ObjectPoint {
    std::string label;
    double confidence;
    Point position;
  };

  const std::vector<ObjectPoint>& object_points() const { return points_; }
  // Max-confidence room label per cell; empty label = unlabeled.
  const std::string& room_label(const Cell& c) const;
  double room_confidence(const Cell& c) const;

  void add_object_point(const std::string& label, double confidence, const Point& p);
  void label_room_cell(const Cell& c, const std::string& label, double confidence);

 private:
  size_t index(const Cell& c) const { return static_cast<size_t>(c.y) * width_ + c.x; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  std::vector<ObjectPoint> points_;
  std::vector<int16_t> room_ids_;       // -1 = unlabeled, else index into room_names_
  std::vector<double> room_confs_;
  std::vector<std::string> room_names_;
};

struct Frontier {
  std::vector<Cell> cells;  // 8-connected Free cells bordering Unknown
  Point centroid;
  int size = 0;
  int id = 0;
};

inline constexpr int kMinFrontierSize = 2;     // cells (0.5 m)
inline constexpr double kNearObjectRadius = 1.6;  // d_o, meters
inline constexpr double kNearRoomRadius = 0.6;    // d_r, meters

// Marks ray interiors Free and obstacle hits Obstacle (sticky).
void integrate_scan(NavMap& map, const Pose& pose, const DepthScan& scan);

// Projects one detection. Object detections become a single point; room
// detections paint ray cells across the angular extent up to the detection
// range. Detections beyond sensor range are not recorded. When `nav` is
// given, room rays stop at known Obstacle cells.
void project_detection(SemanticMap& map, const Pose& pose, const Detection& det,
                       const NavMap* nav = nullptr);

// Free cells 4-adjacent to Unknown, grouped 8-connected, ordered row-major by
// centroid; components smaller than min_size are dropped.
std::vector<Frontier> extract_frontiers(const NavMap& map, int min_size = kMinFrontierSize);

// Geodesic distance over Free cells from the agent cell to the nearest
// frontier cell; infinity when disconnected.
double frontier_distance(const NavMap& map, const Pose& pose, const Frontier& f);

// Max confidence per label within a closed Euclidean ball of the centroid.
std::vector<std::pair<std::string, double>> context_near(const SemanticMap& sem,
                                                         const Frontier& f,
                                                         DetectionKind kind, double radius);

}  // namespace escnav
