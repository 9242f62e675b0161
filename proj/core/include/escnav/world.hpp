#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "escnav/geometry.hpp"
#include "escnav/rng.hpp"

namespace escnav {

// Agent kinematics and sensor model shared across the stack.
inline constexpr double kStepMeters = 0.25;
inline constexpr int kTurnDeg = 30;
inline constexpr int kNumHeadings = 360 / kTurnDeg;  // 12
inline constexpr double kAgentRadius = 0.18;
inline constexpr double kSensorRange = 5.0;
inline constexpr int kHfovDeg = 79;  // one ray per degree
inline constexpr double kDefaultResolution = 0.25;
inline constexpr double kDefaultSuccessDist = 1.0;  // d_s

enum class Action { MoveForward, RotateRight, RotateLeft, LookUp, LookDown, Stop };

const char* action_name(Action a);
std::optional<Action> action_from_name(const std::string& name);

struct ObjectInstance {
  std::string category;
  Cell position;
  int id = 0;
};

// heading is a discrete index; heading angle = 30 deg * heading, measured
// counterclockwise from +x.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  int heading = 0;

  double heading_deg() const { return static_cast<double>(heading * kTurnDeg); }
  Point position() const { return {x, y}; }
};

enum class RayHit { Obstacle, MaxRange };

struct DepthScan {
  std::vector<double> bearings;  // degrees relative to heading, ascending
  std::vector<double> ranges;    // meters, capped at kSensorRange
  std::vector<RayHit> hits;

  size_t size() const { return ranges.size(); }
};

struct RoomRect {
  std::string label;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive free interior

  bool contains(const Cell& c) const {
    return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1;
  }
};

// Ground-truth environment. Boundary cells are always occupied.
class GridWorld {
 public:
  GridWorld() = default;
  GridWorld(int width, int height, double resolution, uint64_t seed);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  uint64_t seed() const { return seed_; }

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  bool occupied(const Cell& c) const {
    return !in_bounds(c) || occupied_[index(c)];
  }
  void set_occupied(const Cell& c, bool v) { occupied_[index(c)] = v; }

  // Room label at a cell; empty string when the cell belongs to no room
  // (walls, door gaps).
  const std::string& room_at(const Cell& c) const;

  const std::vector<RoomRect>& rooms() const { return rooms_; }
  void add_room(const RoomRect& r);

  const std::vector<ObjectInstance>& objects() const { return objects_; }
  void add_object(const ObjectInstance& o);

  std::vector<const ObjectInstance*> instances_of(const std::string& category) const;

  // Validates the documented invariants; throws std::runtime_error on breach.
  void check_invariants() const;

  std::string to_json() const;
  static GridWorld from_json(const std::string& text);

 private:
  size_t index(const Cell& c) const {
    return static_cast<size_t>(c.y) * width_ + c.x;
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  uint64_t seed_ = 0;
  std::vector<uint8_t> occupied_;
  std::vector<int16_t> room_id_;  // -1 = none, else index into rooms_
  std::vector<RoomRect> rooms_;
  std::vector<ObjectInstance> objects_;
};

struct Episode {
  uint64_t world_id = 0;
  Pose start_pose;
  std::string goal;
  double shortest_geodesic = 0.0;  // meters, start to nearest goal instance
};

struct WorldGenConfig {
  int width = 48;
  int height = 48;
  double resolution = kDefaultResolution;
  int min_rooms = 4;
  int max_rooms = 7;
  std::vector<std::string> room_labels;    // sampled without repeat first
  // category -> (room label -> weight); rooms absent from the map get 0.
  std::map<std::string, std::map<std::string, double>> placement_priors;
  // category -> instance count (default 1 per listed category)
  std::map<std::string, int> object_counts;
  double extra_door_prob = 0.15;  // chance of a second door per wall
};

struct StepResult {
  Pose pose;
  bool collided = false;
};

struct EpisodeBatch {
  std::vector<Episode> episodes;
  std::vector<std::string> skipped_goals;  // categories with no reachable instance
};

// Procedural world: BSP-split rectangular rooms joined by >=3-cell door gaps,
// objects placed by sampling placement priors. Deterministic in (config, seed).
GridWorld generate_world(const WorldGenConfig& config, uint64_t seed);

// Start poses on free cells with finite geodesic >= 2 m to the nearest goal
// instance. Goals cycle over `goals`; unreachable categories are skipped and
// reported in the batch.
EpisodeBatch make_episodes(const GridWorld& world, const std::vector<std::string>& goals,
                           int n, uint64_t seed);

// MoveForward sweeps a disc of kAgentRadius; a blocked sweep leaves the pose
// unchanged with collided=true. Rotations only change heading.
StepResult step(const GridWorld& world, const Pose& pose, Action action);

// 79 rays at 1 degree spacing centered on heading, ranges capped at 5 m.
DepthScan render_depth(const GridWorld& world, const Pose& pose);

struct VisibleInstance {
  const ObjectInstance* instance;
  double range;    // meters
  double bearing;  // degrees relative to heading
};

// Instances within the horizontal field of view, within sensor range, with an
// unoccluded straight segment from the pose.
std::vector<VisibleInstance> visible_instances(const GridWorld& world, const Pose& pose);

// 8-connected shortest path over passable cells, diagonal cost sqrt(2).
// Returns infinity when unreachable.
double geodesic_distance(const std::function<bool(const Cell&)>& passable, int width,
                         int height, double resolution, const Cell& from,
                         const std::vector<Cell>& to);

double geodesic_distance(const GridWorld& world, const Cell& from, const std::vector<Cell>& to);

// Multi-source distance field (meters) over passable cells, row-major
// width*height; infinity where unreachable or impassable.
std::vector<double> geodesic_field(const std::function<bool(const Cell&)>& passable,
                                   int width, int height, double resolution,
                                   const std::vector<Cell>& sources);

// True iff a goal instance lies within d_s meters, unoccluded and within
// sensor range; heading is ignored (agent may rotate in place).
bool check_success(const GridWorld& world, const Pose& pose, const std::string& goal,
                   double success_dist = kDefaultSuccessDist);

// Distance at which any field-of-view ray first leaves the agent's current
// room through free space (a doorway), capped at `cap`. Walls do not clip:
// the occupancy map handles them. Used to keep simulated room detections
// from labeling cells beyond the room.
double room_exit_range(const GridWorld& world, const Pose& pose, double cap);

std::string episodes_to_json(const std::vector<Episode>& eps);
std::vector<Episode> episodes_from_json(const std::string& text);

}  // namespace escnav
