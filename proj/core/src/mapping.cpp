#include "escnav/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace escnav {

NavMap::NavMap(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution),
      cells_(static_cast<size_t>(width) * height, CellState::Unknown) {}

void NavMap::mark_free(const Cell& c) {
  if (!in_bounds(c)) return;
  if (cells_[index(c)] != CellState::Obstacle) cells_[index(c)] = CellState::Free;
}

void NavMap::mark_obstacle(const Cell& c) {
  if (!in_bounds(c)) return;
  cells_[index(c)] = CellState::Obstacle;
}

size_t NavMap::known_count() const {
  size_t n = 0;
  for (const CellState s : cells_)
    if (s != CellState::Unknown) ++n;
  return n;
}

SemanticMap::SemanticMap(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution),
      room_ids_(static_cast<size_t>(width) * height, -1),
      room_confs_(static_cast<size_t>(width) * height, 0.0) {}

const std::string& SemanticMap::room_label(const Cell& c) const {
  static const std::string none;
  if (c.x < 0 || c.x >= width_ || c.y < 0 || c.y >= height_) return none;
  const int16_t id = room_ids_[index(c)];
  return id < 0 ? none : room_names_[id];
}

double SemanticMap::room_confidence(const Cell& c) const {
  if (c.x < 0 || c.x >= width_ || c.y < 0 || c.y >= height_) return 0.0;
  return room_confs_[index(c)];
}

void SemanticMap::add_object_point(const std::string& label, double confidence, const Point& p) {
  points_.push_back({label, confidence, p});
}

void SemanticMap::label_room_cell(const Cell& c, const std::string& label, double confidence) {
  if (c.x < 0 || c.x >= width_ || c.y < 0 || c.y >= height_) return;
  if (confidence <= room_confs_[index(c)]) return;  // max-confidence wins
  int16_t id = -1;
  for (size_t i = 0; i < room_names_.size(); ++i)
    if (room_names_[i] == label) id = static_cast<int16_t>(i);
  if (id < 0) {
    room_names_.push_back(label);
    id = static_cast<int16_t>(room_names_.size() - 1);
  }
  room_ids_[index(c)] = id;
  room_confs_[index(c)] = confidence;
}

void integrate_scan(NavMap& map, const Pose& pose, const DepthScan& scan) {
  const double res = map.resolution();
  for (size_t i = 0; i < scan.size(); ++i) {
    const double angle = deg2rad(pose.heading_deg() + scan.bearings[i]);
    const double range = scan.ranges[i];
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);

    // Same boundary walk as the depth renderer, so an Obstacle ray lands on
    // exactly the cell whose boundary produced the reported range.
    Cell cur = point_to_cell(pose.position(), res);
    map.mark_free(cur);
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    auto boundary_dist = [&](double o, double d, int cell, int step) {
      if (step == 0) return std::numeric_limits<double>::infinity();
      const double edge = (step > 0 ? (cell + 1) : cell) * res;
      return (edge - o) / d;
    };
    double t_max_x = boundary_dist(pose.x, dx, cur.x, step_x);
    double t_max_y = boundary_dist(pose.y, dy, cur.y, step_y);
    const double t_delta_x = step_x ? res / std::abs(dx) : 0.0;
    const double t_delta_y = step_y ? res / std::abs(dy) : 0.0;
    const double tol = res * 1e-9;

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
      if (scan.hits[i] == RayHit::Obstacle && t >= range - tol) {
        map.mark_obstacle(cur);
        break;
      }
      if (t >= range) break;
      map.mark_free(cur);
    }
  }
}

void project_detection(SemanticMap& map, const Pose& pose, const Detection& det,
                       const NavMap* nav) {
  if (det.range <= 0.0 || det.confidence < kDetectionThreshold || det.confidence > 1.0)
    throw std::invalid_argument("project_detection: malformed detection");
  if (det.range > kSensorRange) return;  // long-distance detections are not recorded

  const double res = map.resolution();
  if (det.kind == DetectionKind::Object) {
    const double angle = deg2rad(pose.heading_deg() + det.bearing);
    const Point p{pose.x + det.range * std::cos(angle), pose.y + det.range * std::sin(angle)};
    map.add_object_point(det.label, det.confidence, p);
    return;
  }

  // Room: paint cells along 1-degree rays across the angular extent.
  const int half = static_cast<int>(std::floor(det.angular_extent / 2.0));
  for (int b = -half; b <= half; ++b) {
    const double angle = deg2rad(pose.heading_deg() + det.bearing + b);
    const Point end{pose.x + det.range * std::cos(angle), pose.y + det.range * std::sin(angle)};
    for (const Cell& c : cells_on_segment(pose.position(), end, res)) {
      if (nav && nav->at(c) == CellState::Obstacle) break;
      map.label_room_cell(c, det.label, det.confidence);
    }
  }
}

std::vector<Frontier> extract_frontiers(const NavMap& map, int min_size) {
  const int w = map.width(), h = map.height();
  auto idx = [&](const Cell& c) { return static_cast<size_t>(c.y) * w + c.x; };

  auto is_border = [&](const Cell& c) {
    if (map.at(c) != CellState::Free) return false;
    static const int dxs[4] = {1, -1, 0, 0};
    static const int dys[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const Cell n{c.x + dxs[k], c.y + dys[k]};
      if (map.in_bounds(n) && map.at(n) == CellState::Unknown) return true;
    }
    return false;
  };

  std::vector<uint8_t> border(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (is_border({x, y})) border[idx({x, y})] = 1;

  // 8-connected components over border cells.
  std::vector<Frontier> out;
  std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Cell start{x, y};
      if (!border[idx(start)] || seen[idx(start)]) continue;
      Frontier f;
      std::vector<Cell> stack{start};
      seen[idx(start)] = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        f.cells.push_back(c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy) continue;
            const Cell n{c.x + dx, c.y + dy};
            if (!map.in_bounds(n) || seen[idx(n)] || !border[idx(n)]) continue;
            seen[idx(n)] = 1;
            stack.push_back(n);
          }
        }
      }
      if (static_cast<int>(f.cells.size()) < min_size) continue;
      double sx = 0, sy = 0;
      for (const Cell& c : f.cells) {
        const Point p = cell_center(c, map.resolution());
        sx += p.x;
        sy += p.y;
      }
      f.size = static_cast<int>(f.cells.size());
      f.centroid = {sx / f.size, sy / f.size};
      out.push_back(std::move(f));
    }
  }

  // Stable ids: row-major order of the centroid.
  std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
    if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
    return a.centroid.x < b.centroid.x;
  });
  for (size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

double frontier_distance(const NavMap& map, const Pose& pose, const Frontier& f) {
  const Cell from = point_to_cell(pose.position(), map.resolution());
  return geodesic_distance([&](const Cell& c) { return map.at(c) == CellState::Free; },
                           map.width(), map.height(), map.resolution(), from, f.cells);
}

std::vector<std::pair<std::string, double>> context_near(const SemanticMap& sem,
                                                         const Frontier& f,
                                                         DetectionKind kind, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("context_near: radius must be > 0");
  std::vector<std::pair<std::string, double>> out;
  auto bump = [&](const std::string& label, double conf) {
    for (auto& [l, c] : out) {
      if (l == label) {
        c = std::max(c, conf);
        return;
      }
    }
    out.push_back({label, conf});
  };

  if (kind == DetectionKind::Object) {
    for (const auto& p : sem.object_points())
      if (distance(p.position, f.centroid) <= radius) bump(p.label, p.confidence);
  } else {
    const double res = sem.resolution();
    const int r_cells = static_cast<int>(std::ceil(radius / res)) + 1;
    const Cell center = point_to_cell(f.centroid, res);
    for (int dy = -r_cells; dy <= r_cells; ++dy) {
      for (int dx = -r_cells; dx <= r_cells; ++dx) {
        const Cell c{center.x + dx, center.y + dy};
        const std::string& label = sem.room_label(c);
        if (label.empty()) continue;
        if (distance(cell_center(c, res), f.centroid) <= radius)
          bump(label, sem.room_confidence(c));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace escnav
