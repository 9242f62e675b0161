#include "escnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace escnav {

using nlohmann::json;

std::vector<Cell> cells_on_segment(const Point& a, const Point& b, double resolution) {
  std::vector<Cell> out;
  Cell cur = point_to_cell(a, resolution);
  const Cell end = point_to_cell(b, resolution);
  out.push_back(cur);

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

  // Parametric distance (in t along the segment) to the next cell boundary.
  auto boundary_t = [&](double origin, double d, int cell, int step) {
    if (step == 0) return std::numeric_limits<double>::infinity();
    const double edge = (step > 0 ? (cell + 1) : cell) * resolution;
    return (edge - origin) / d;
  };

  double t_max_x = boundary_t(a.x, dx, cur.x, step_x);
  double t_max_y = boundary_t(a.y, dy, cur.y, step_y);
  const double t_delta_x = step_x ? resolution / std::abs(dx) : 0.0;
  const double t_delta_y = step_y ? resolution / std::abs(dy) : 0.0;

  while (cur != end) {
    if (t_max_x < t_max_y) {
      if (t_max_x > 1.0) break;
      cur.x += step_x;
      t_max_x += t_delta_x;
    } else {
      if (t_max_y > 1.0) break;
      cur.y += step_y;
      t_max_y += t_delta_y;
    }
    out.push_back(cur);
    if (out.size() > 100000) break;  // degenerate input guard
  }
  return out;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::MoveForward: return "MoveForward";
    case Action::RotateRight: return "RotateRight";
    case Action::RotateLeft: return "RotateLeft";
    case Action::LookUp: return "LookUp";
    case Action::LookDown: return "LookDown";
    case Action::Stop: return "Stop";
  }
  return "?";
}

std::optional<Action> action_from_name(const std::string& name) {
  for (Action a : {Action::MoveForward, Action::RotateRight, Action::RotateLeft,
                   Action::LookUp, Action::LookDown, Action::Stop}) {
    if (name == action_name(a)) return a;
  }
  return std::nullopt;
}

GridWorld::GridWorld(int width, int height, double resolution, uint64_t seed)
    : width_(width), height_(height), resolution_(resolution), seed_(seed) {
  if (width < 3 || height < 3) throw std::invalid_argument("GridWorld: grid too small");
  occupied_.assign(static_cast<size_t>(width) * height, 0);
  room_id_.assign(static_cast<size_t>(width) * height, -1);
  for (int x = 0; x < width; ++x) {
    set_occupied({x, 0}, true);
    set_occupied({x, height - 1}, true);
  }
  for (int y = 0; y < height; ++y) {
    set_occupied({0, y}, true);
    set_occupied({width - 1, y}, true);
  }
}

const std::string& GridWorld::room_at(const Cell& c) const {
  static const std::string none;
  if (!in_bounds(c)) return none;
  const int16_t id = room_id_[index(c)];
  return id < 0 ? none : rooms_[id].label;
}

void GridWorld::add_room(const RoomRect& r) {
  rooms_.push_back(r);
  const int16_t id = static_cast<int16_t>(rooms_.size() - 1);
  for (int y = r.y0; y <= r.y1; ++y)
    for (int x = r.x0; x <= r.x1; ++x)
      if (in_bounds({x, y})) room_id_[index({x, y})] = id;
}

void GridWorld::add_object(const ObjectInstance& o) {
  if (occupied(o.position)) throw std::invalid_argument("object on occupied cell");
  objects_.push_back(o);
}

std::vector<const ObjectInstance*> GridWorld::instances_of(const std::string& category) const {
  std::vector<const ObjectInstance*> out;
  for (const auto& o : objects_)
    if (o.category == category) out.push_back(&o);
  return out;
}

void GridWorld::check_invariants() const {
  for (int x = 0; x < width_; ++x)
    if (!occupied({x, 0}) || !occupied({x, height_ - 1}))
      throw std::runtime_error("world boundary not closed");
  for (int y = 0; y < height_; ++y)
    if (!occupied({0, y}) || !occupied({width_ - 1, y}))
      throw std::runtime_error("world boundary not closed");
  std::vector<int> seen_ids;
  for (const auto& o : objects_) {
    if (occupied(o.position)) throw std::runtime_error("object on occupied cell");
    seen_ids.push_back(o.id);
  }
  std::sort(seen_ids.begin(), seen_ids.end());
  if (std::adjacent_find(seen_ids.begin(), seen_ids.end()) != seen_ids.end())
    throw std::runtime_error("duplicate object id");
}

// --- kinematics ------------------------------------------------------------

namespace {

// Min distance from segment [a,b] to an axis-aligned cell rectangle; 0 when
// they intersect. distance(p(t), rect) is convex in t, so ternary search.
double segment_cell_distance(const Point& a, const Point& b, const Cell& c, double res) {
  const double x0 = c.x * res, x1 = (c.x + 1) * res;
  const double y0 = c.y * res, y1 = (c.y + 1) * res;
  auto point_rect = [&](double px, double py) {
    const double qx = std::clamp(px, x0, x1);
    const double qy = std::clamp(py, y0, y1);
    return std::hypot(px - qx, py - qy);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double d1 = point_rect(a.x + (b.x - a.x) * m1, a.y + (b.y - a.y) * m1);
    const double d2 = point_rect(a.x + (b.x - a.x) * m2, a.y + (b.y - a.y) * m2);
    if (d1 < d2)
      hi = m2;
    else
      lo = m1;
  }
  const double t = 0.5 * (lo + hi);
  return point_rect(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
}

bool sweep_collides(const GridWorld& world, const Point& from, const Point& to) {
  const double res = world.resolution();
  const double r = kAgentRadius;
  const int cx0 = static_cast<int>(std::floor((std::min(from.x, to.x) - r) / res));
  const int cx1 = static_cast<int>(std::floor((std::max(from.x, to.x) + r) / res));
  const int cy0 = static_cast<int>(std::floor((std::min(from.y, to.y) - r) / res));
  const int cy1 = static_cast<int>(std::floor((std::max(from.y, to.y) + r) / res));
  for (int y = cy0; y <= cy1; ++y) {
    for (int x = cx0; x <= cx1; ++x) {
      const Cell c{x, y};
      if (!world.occupied(c)) continue;
      if (segment_cell_distance(from, to, c, res) < r) return true;
    }
  }
  return false;
}

}  // namespace

StepResult step(const GridWorld& world, const Pose& pose, Action action) {
  switch (action) {
    case Action::RotateRight:
      return {{pose.x, pose.y, (pose.heading + kNumHeadings - 1) % kNumHeadings}, false};
    case Action::RotateLeft:
      return {{pose.x, pose.y, (pose.heading + 1) % kNumHeadings}, false};
    case Action::MoveForward: {
      const double th = deg2rad(pose.heading_deg());
      const Point from = pose.position();
      const Point to{pose.x + kStepMeters * std::cos(th), pose.y + kStepMeters * std::sin(th)};
      if (sweep_collides(world, from, to)) return {pose, true};
      return {{to.x, to.y, pose.heading}, false};
    }
    case Action::LookUp:
    case Action::LookDown:
    case Action::Stop:
      return {pose, false};  // no-ops in 2-D
  }
  return {pose, false};
}

// --- sensing ---------------------------------------------------------------

namespace {

// Distance along the ray to the first occupied-cell boundary crossing.
// Returns kSensorRange with MaxRange when nothing is hit.
std::pair<double, RayHit> cast_ray(const GridWorld& world, const Point& origin,
                                   double angle_rad) {
  const double res = world.resolution();
  const double dx = std::cos(angle_rad);
  const double dy = std::sin(angle_rad);

  Cell cur = point_to_cell(origin, res);
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

  auto boundary_dist = [&](double o, double d, int cell, int step) {
    if (step == 0) return std::numeric_limits<double>::infinity();
    const double edge = (step > 0 ? (cell + 1) : cell) * res;
    return (edge - o) / d;
  };

  double t_max_x = boundary_dist(origin.x, dx, cur.x, step_x);
  double t_max_y = boundary_dist(origin.y, dy, cur.y, step_y);
  const double t_delta_x = step_x ? res / std::abs(dx) : 0.0;
  const double t_delta_y = step_y ? res / std::abs(dy) : 0.0;

  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      cur.x += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      cur.y += step_y;
    }
    if (t >= kSensorRange) return {kSensorRange, RayHit::MaxRange};
    if (world.occupied(cur)) return {t, RayHit::Obstacle};
  }
}

}  // namespace

DepthScan render_depth(const GridWorld& world, const Pose& pose) {
  DepthScan scan;
  scan.bearings.reserve(kHfovDeg);
  scan.ranges.reserve(kHfovDeg);
  scan.hits.reserve(kHfovDeg);
  const int half = kHfovDeg / 2;  // 39
  for (int i = -half; i <= half; ++i) {
    const double bearing = static_cast<double>(i);
    const double angle = deg2rad(pose.heading_deg() + bearing);
    auto [range, hit] = cast_ray(world, pose.position(), angle);
    scan.bearings.push_back(bearing);
    scan.ranges.push_back(range);
    scan.hits.push_back(hit);
  }
  return scan;
}

namespace {

bool segment_occluded(const GridWorld& world, const Point& a, const Point& b) {
  for (const Cell& c : cells_on_segment(a, b, world.resolution()))
    if (world.occupied(c)) return true;
  return false;
}

}  // namespace

std::vector<VisibleInstance> visible_instances(const GridWorld& world, const Pose& pose) {
  std::vector<VisibleInstance> out;
  const double half_fov = kHfovDeg / 2.0;
  for (const auto& obj : world.objects()) {
    const Point target = cell_center(obj.position, world.resolution());
    const double range = distance(pose.position(), target);
    if (range > kSensorRange) continue;
    if (range < 1e-6) continue;  // standing on the object: bearing undefined
    const double abs_bearing = rad2deg(std::atan2(target.y - pose.y, target.x - pose.x));
    const double bearing = wrap_deg(abs_bearing - pose.heading_deg());
    if (std::abs(bearing) > half_fov) continue;
    if (segment_occluded(world, pose.position(), target)) continue;
    out.push_back({&obj, range, bearing});
  }
  return out;
}

double geodesic_distance(const std::function<bool(const Cell&)>& passable, int width,
                         int height, double resolution, const Cell& from,
                         const std::vector<Cell>& to) {
  const double inf = std::numeric_limits<double>::infinity();
  if (to.empty()) return inf;
  if (!passable(from)) return inf;

  std::vector<double> dist(static_cast<size_t>(width) * height, inf);
  auto idx = [&](const Cell& c) { return static_cast<size_t>(c.y) * width + c.x; };
  std::vector<uint8_t> is_target(dist.size(), 0);
  for (const Cell& t : to)
    if (t.x >= 0 && t.x < width && t.y >= 0 && t.y < height) is_target[idx(t)] = 1;

  using QItem = std::pair<double, Cell>;
  auto cmp = [](const QItem& a, const QItem& b) { return a.first > b.first; };
  std::priority_queue<QItem, std::vector<QItem>, decltype(cmp)> queue(cmp);
  dist[idx(from)] = 0.0;
  queue.push({0.0, from});

  static const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const double diag = std::sqrt(2.0);

  while (!queue.empty()) {
    auto [d, c] = queue.top();
    queue.pop();
    if (d > dist[idx(c)]) continue;
    if (is_target[idx(c)]) return d * resolution;
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.x + dxs[k], c.y + dys[k]};
      if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
      if (!passable(n)) continue;
      const double nd = d + (k < 4 ? 1.0 : diag);
      if (nd < dist[idx(n)]) {
        dist[idx(n)] = nd;
        queue.push({nd, n});
      }
    }
  }
  return inf;
}

double geodesic_distance(const GridWorld& world, const Cell& from, const std::vector<Cell>& to) {
  return geodesic_distance([&](const Cell& c) { return !world.occupied(c); }, world.width(),
                           world.height(), world.resolution(), from, to);
}

std::vector<double> geodesic_field(const std::function<bool(const Cell&)>& passable,
                                   int width, int height, double resolution,
                                   const std::vector<Cell>& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(width) * height, inf);
  auto idx = [&](const Cell& c) { return static_cast<size_t>(c.y) * width + c.x; };

  using QItem = std::pair<double, Cell>;
  auto cmp = [](const QItem& a, const QItem& b) { return a.first > b.first; };
  std::priority_queue<QItem, std::vector<QItem>, decltype(cmp)> queue(cmp);
  for (const Cell& s : sources) {
    if (s.x < 0 || s.x >= width || s.y < 0 || s.y >= height || !passable(s)) continue;
    dist[idx(s)] = 0.0;
    queue.push({0.0, s});
  }

  static const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const double diag = std::sqrt(2.0);
  while (!queue.empty()) {
    auto [d, c] = queue.top();
    queue.pop();
    if (d > dist[idx(c)]) continue;
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.x + dxs[k], c.y + dys[k]};
      if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
      if (!passable(n)) continue;
      const double nd = d + (k < 4 ? 1.0 : diag);
      if (nd < dist[idx(n)]) {
        dist[idx(n)] = nd;
        queue.push({nd, n});
      }
    }
  }
  for (double& d : dist) d *= resolution;
  return dist;
}

bool check_success(const GridWorld& world, const Pose& pose, const std::string& goal,
                   double success_dist) {
  for (const auto* obj : world.instances_of(goal)) {
    const Point target = cell_center(obj->position, world.resolution());
    const double d = distance(pose.position(), target);
    if (d > success_dist || d > kSensorRange) continue;
    if (!segment_occluded(world, pose.position(), target)) return true;
  }
  return false;
}

double room_exit_range(const GridWorld& world, const Pose& pose, double cap) {
  const std::string& room = world.room_at(point_to_cell(pose.position(), world.resolution()));
  if (room.empty()) return 0.0;
  double clip = cap;
  const int half = kHfovDeg / 2;
  for (int b = -half; b <= half; ++b) {
    const double angle = deg2rad(pose.heading_deg() + b);
    const Point end{pose.x + cap * std::cos(angle), pose.y + cap * std::sin(angle)};
    const std::vector<Cell> cells = cells_on_segment(pose.position(), end, world.resolution());
    for (const Cell& c : cells) {
      if (world.occupied(c)) break;  // walls clip in the occupancy map instead
      if (world.room_at(c) != room) {
        const Point p = cell_center(c, world.resolution());
        clip = std::min(clip, distance(pose.position(), p));
        break;
      }
    }
  }
  return clip;
}

// --- serialization ----------------------------------------------------------

namespace {

std::string rle_encode_row(const GridWorld& w, int y) {
  std::ostringstream os;
  int run = 0;
  char cur = 0;
  for (int x = 0; x < w.width(); ++x) {
    const char c = w.occupied({x, y}) ? '#' : '.';
    if (c == cur) {
      ++run;
    } else {
      if (run) os << run << cur;
      cur = c;
      run = 1;
    }
  }
  if (run) os << run << cur;
  return os.str();
}

void rle_decode_row(GridWorld& w, int y, const std::string& s) {
  int x = 0;
  size_t i = 0;
  while (i < s.size()) {
    int run = 0;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) run = run * 10 + (s[i++] - '0');
    if (i >= s.size() || run <= 0) throw std::runtime_error("bad RLE row: " + s);
    const char c = s[i++];
    for (int k = 0; k < run; ++k, ++x) w.set_occupied({x, y}, c == '#');
  }
  if (x != w.width()) throw std::runtime_error("RLE row length mismatch");
}

}  // namespace

std::string GridWorld::to_json() const {
  json j;
  j["width"] = width_;
  j["height"] = height_;
  j["resolution"] = resolution_;
  j["seed"] = seed_;
  json rows = json::array();
  for (int y = 0; y < height_; ++y) rows.push_back(rle_encode_row(*this, y));
  j["rows"] = rows;
  json rooms = json::array();
  for (const auto& r : rooms_)
    rooms.push_back({{"label", r.label}, {"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}});
  j["rooms"] = rooms;
  json objs = json::array();
  for (const auto& o : objects_)
    objs.push_back({{"category", o.category}, {"x", o.position.x}, {"y", o.position.y}, {"id", o.id}});
  j["objects"] = objs;
  return j.dump(2);
}

GridWorld GridWorld::from_json(const std::string& text) {
  const json j = json::parse(text);
  GridWorld w(j.at("width").get<int>(), j.at("height").get<int>(),
              j.at("resolution").get<double>(), j.at("seed").get<uint64_t>());
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != w.height()) throw std::runtime_error("row count mismatch");
  for (int y = 0; y < w.height(); ++y) rle_decode_row(w, y, rows[y].get<std::string>());
  for (const auto& r : j.at("rooms"))
    w.add_room({r.at("label").get<std::string>(), r.at("x0").get<int>(), r.at("y0").get<int>(),
                r.at("x1").get<int>(), r.at("y1").get<int>()});
  for (const auto& o : j.at("objects"))
    w.add_object({o.at("category").get<std::string>(),
                  {o.at("x").get<int>(), o.at("y").get<int>()},
                  o.at("id").get<int>()});
  w.check_invariants();
  return w;
}

std::string episodes_to_json(const std::vector<Episode>& eps) {
  json arr = json::array();
  for (const auto& e : eps) {
    arr.push_back({{"world_id", e.world_id},
                   {"start", {{"x", e.start_pose.x}, {"y", e.start_pose.y}, {"heading", e.start_pose.heading}}},
                   {"goal", e.goal},
                   {"shortest_geodesic", e.shortest_geodesic}});
  }
  return arr.dump(2);
}

std::vector<Episode> episodes_from_json(const std::string& text) {
  std::vector<Episode> out;
  for (const auto& e : json::parse(text)) {
    Episode ep;
    ep.world_id = e.at("world_id").get<uint64_t>();
    ep.start_pose = {e.at("start").at("x").get<double>(), e.at("start").at("y").get<double>(),
                     e.at("start").at("heading").get<int>()};
    ep.goal = e.at("goal").get<std::string>();
    ep.shortest_geodesic = e.at("shortest_geodesic").get<double>();
    out.push_back(ep);
  }
  return out;
}

}  // namespace escnav
