#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "escnav/world.hpp"

namespace escnav {

namespace {

constexpr int kMinRoomDim = 4;   // cells, 1.0 m at default resolution
constexpr int kDoorSize = 3;     // cells

struct Rect {
  int x0, y0, x1, y1;  // inclusive free interior
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  long area() const { return static_cast<long>(width()) * height(); }
};

bool splittable(const Rect& r) {
  // A split consumes one wall line and leaves two >= kMinRoomDim halves.
  return r.width() >= 2 * kMinRoomDim + 1 || r.height() >= 2 * kMinRoomDim + 1;
}

struct WallEdge {
  int a, b;          // leaf indices
  bool vertical;     // wall is a column (true) or a row (false)
  int wall;          // column x or row y of the wall line
  int lo, hi;        // shared span (rows for vertical, columns for horizontal)
};

}  // namespace

GridWorld generate_world(const WorldGenConfig& config, uint64_t seed) {
  if (config.width < 2 * kMinRoomDim + 3 || config.height < 2 * kMinRoomDim + 3)
    throw std::invalid_argument(
        "infeasible config: grid smaller than minimum room layout (need >= " +
        std::to_string(2 * kMinRoomDim + 3) + " cells per side)");
  if (config.room_labels.empty())
    throw std::invalid_argument("infeasible config: empty room vocabulary");
  if (config.min_rooms < 1 || config.max_rooms < config.min_rooms)
    throw std::invalid_argument("infeasible config: bad room count range");

  Rng rng(seed);
  GridWorld world(config.width, config.height, config.resolution, seed);

  const int target_rooms = rng.uniform_int(config.min_rooms, config.max_rooms);

  // BSP split of the free interior. Walls are single occupied lines.
  std::vector<Rect> leaves{{1, 1, config.width - 2, config.height - 2}};
  while (static_cast<int>(leaves.size()) < target_rooms) {
    // Split the largest splittable leaf along its longer axis.
    int pick = -1;
    long best = -1;
    for (size_t i = 0; i < leaves.size(); ++i) {
      if (splittable(leaves[i]) && leaves[i].area() > best) {
        best = leaves[i].area();
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;
    Rect r = leaves[pick];
    const bool vertical = r.width() >= r.height();
    if (vertical) {
      const int xs = rng.uniform_int(r.x0 + kMinRoomDim, r.x1 - kMinRoomDim);
      leaves[pick] = {r.x0, r.y0, xs - 1, r.y1};
      leaves.push_back({xs + 1, r.y0, r.x1, r.y1});
    } else {
      const int ys = rng.uniform_int(r.y0 + kMinRoomDim, r.y1 - kMinRoomDim);
      leaves[pick] = {r.x0, r.y0, r.x1, ys - 1};
      leaves.push_back({r.x0, ys + 1, r.x1, r.y1});
    }
  }
  if (static_cast<int>(leaves.size()) < config.min_rooms)
    throw std::invalid_argument("infeasible config: cannot fit " +
                                std::to_string(config.min_rooms) + " rooms of min dimension " +
                                std::to_string(kMinRoomDim) + " into the grid");

  // Occupy everything outside the leaves (walls between rooms).
  for (int y = 1; y < config.height - 1; ++y)
    for (int x = 1; x < config.width - 1; ++x) world.set_occupied({x, y}, true);
  for (const Rect& r : leaves)
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) world.set_occupied({x, y}, false);

  // Adjacency between leaves separated by exactly one wall line with enough
  // shared span for a door.
  std::vector<WallEdge> edges;
  for (size_t i = 0; i < leaves.size(); ++i) {
    for (size_t j = i + 1; j < leaves.size(); ++j) {
      const Rect &a = leaves[i], &b = leaves[j];
      if (a.x1 + 2 == b.x0 || b.x1 + 2 == a.x0) {
        const int wall = (a.x1 + 2 == b.x0) ? a.x1 + 1 : b.x1 + 1;
        const int lo = std::max(a.y0, b.y0), hi = std::min(a.y1, b.y1);
        if (hi - lo + 1 >= kDoorSize)
          edges.push_back({static_cast<int>(i), static_cast<int>(j), true, wall, lo, hi});
      } else if (a.y1 + 2 == b.y0 || b.y1 + 2 == a.y0) {
        const int wall = (a.y1 + 2 == b.y0) ? a.y1 + 1 : b.y1 + 1;
        const int lo = std::max(a.x0, b.x0), hi = std::min(a.x1, b.x1);
        if (hi - lo + 1 >= kDoorSize)
          edges.push_back({static_cast<int>(i), static_cast<int>(j), false, wall, lo, hi});
      }
    }
  }

  // Spanning tree first (keeps every room reachable), then optional extras.
  auto carve_door = [&](const WallEdge& e) {
    const int start = rng.uniform_int(e.lo, e.hi - kDoorSize + 1);
    for (int k = 0; k < kDoorSize; ++k) {
      const Cell c = e.vertical ? Cell{e.wall, start + k} : Cell{start + k, e.wall};
      world.set_occupied(c, false);
    }
  };

  // Deterministic shuffle of edge order.
  for (size_t i = edges.size(); i > 1; --i)
    std::swap(edges[i - 1], edges[rng.uniform_int(static_cast<uint64_t>(i))]);

  std::vector<int> comp(leaves.size());
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int v) { return comp[v] == v ? v : comp[v] = find(comp[v]); };
  for (const WallEdge& e : edges) {
    if (find(e.a) != find(e.b)) {
      comp[find(e.a)] = find(e.b);
      carve_door(e);
    } else if (rng.bernoulli(config.extra_door_prob)) {
      carve_door(e);
    }
  }
  // A disconnected layout means the BSP adjacency missed a leaf; with
  // single-line walls this cannot happen, but verify cheaply.
  for (size_t i = 1; i < leaves.size(); ++i)
    if (find(static_cast<int>(i)) != find(0))
      throw std::runtime_error("world generation produced disconnected rooms");

  // Room labels: shuffled vocabulary, repeated if there are more rooms.
  std::vector<std::string> labels = config.room_labels;
  for (size_t i = labels.size(); i > 1; --i)
    std::swap(labels[i - 1], labels[rng.uniform_int(static_cast<uint64_t>(i))]);
  for (size_t i = 0; i < leaves.size(); ++i) {
    const Rect& r = leaves[i];
    world.add_room({labels[i % labels.size()], r.x0, r.y0, r.x1, r.y1});
  }

  // Objects: sample the room label from the category's priors (normalized
  // over labels present in this world), then a free cell inside that room.
  std::vector<Cell> taken;
  int next_id = 0;
  for (const auto& [category, count] : config.object_counts) {
    for (int k = 0; k < count; ++k) {
      // Candidate labels and weights.
      std::vector<std::pair<std::string, double>> weights;
      const auto prior_it = config.placement_priors.find(category);
      for (const auto& room : world.rooms()) {
        double w = 1.0;
        if (prior_it != config.placement_priors.end()) {
          const auto it = prior_it->second.find(room.label);
          w = it == prior_it->second.end() ? 0.0 : it->second;
        }
        bool seen = false;
        for (auto& [l, acc] : weights)
          if (l == room.label) {
            seen = true;
            break;
          }
        if (!seen) weights.push_back({room.label, w});
      }
      double total = 0.0;
      for (const auto& [l, w] : weights) total += w;
      std::string chosen_label;
      if (total <= 0.0) {
        chosen_label = weights[rng.uniform_int(static_cast<uint64_t>(weights.size()))].first;
      } else {
        double u = rng.uniform() * total;
        for (const auto& [l, w] : weights) {
          u -= w;
          chosen_label = l;
          if (u <= 0.0) break;
        }
      }
      // Uniform among rooms carrying the label.
      std::vector<const RoomRect*> candidates;
      for (const auto& room : world.rooms())
        if (room.label == chosen_label) candidates.push_back(&room);
      const RoomRect* room = candidates[rng.uniform_int(static_cast<uint64_t>(candidates.size()))];

      // Random free cell in the room without an object already on it.
      Cell cell;
      bool placed = false;
      for (int attempt = 0; attempt < 200; ++attempt) {
        cell = {rng.uniform_int(room->x0, room->x1), rng.uniform_int(room->y0, room->y1)};
        if (world.occupied(cell)) continue;
        if (std::find(taken.begin(), taken.end(), cell) != taken.end()) continue;
        placed = true;
        break;
      }
      if (!placed)
        throw std::invalid_argument("infeasible config: no free cell for object '" + category +
                                    "' in room '" + room->label + "'");
      taken.push_back(cell);
      world.add_object({category, cell, next_id++});
    }
  }

  world.check_invariants();
  return world;
}

EpisodeBatch make_episodes(const GridWorld& world, const std::vector<std::string>& goals,
                           int n, uint64_t seed) {
  EpisodeBatch batch;
  if (n <= 0 || goals.empty()) return batch;
  Rng rng(seed);

  const double min_start_dist = 2.0;  // meters

  // Distance field from each goal category's instances, reused across episodes.
  struct GoalField {
    std::vector<Cell> starts;          // candidate start cells
    std::vector<double> start_dists;   // geodesic to nearest instance
  };
  std::map<std::string, GoalField> fields;
  std::vector<std::string> usable;
  for (const auto& goal : goals) {
    if (fields.count(goal) || std::find(batch.skipped_goals.begin(), batch.skipped_goals.end(),
                                        goal) != batch.skipped_goals.end())
      continue;
    std::vector<Cell> targets;
    for (const auto* o : world.instances_of(goal)) targets.push_back(o->position);
    if (targets.empty()) {
      batch.skipped_goals.push_back(goal);
      continue;
    }
    const std::vector<double> dist_field =
        geodesic_field([&](const Cell& c) { return !world.occupied(c); }, world.width(),
                       world.height(), world.resolution(), targets);
    GoalField field;
    for (int y = 1; y < world.height() - 1; ++y) {
      for (int x = 1; x < world.width() - 1; ++x) {
        const Cell c{x, y};
        if (world.occupied(c)) continue;
        const double d = dist_field[static_cast<size_t>(y) * world.width() + x];
        if (std::isfinite(d) && d >= min_start_dist) {
          field.starts.push_back(c);
          field.start_dists.push_back(d);
        }
      }
    }
    if (field.starts.empty()) {
      batch.skipped_goals.push_back(goal);
      continue;
    }
    fields[goal] = std::move(field);
  }
  for (const auto& goal : goals)
    if (fields.count(goal)) usable.push_back(goal);
  if (usable.empty()) return batch;

  for (int i = 0; i < n; ++i) {
    const std::string& goal = usable[i % usable.size()];
    const GoalField& field = fields[goal];
    const size_t pick = rng.uniform_int(static_cast<uint64_t>(field.starts.size()));
    const Point center = cell_center(field.starts[pick], world.resolution());
    Episode ep;
    ep.world_id = world.seed();
    ep.start_pose = {center.x, center.y, rng.uniform_int(0, kNumHeadings - 1)};
    ep.goal = goal;
    ep.shortest_geodesic = field.start_dists[pick];
    batch.episodes.push_back(ep);
  }
  return batch;
}

}  // namespace escnav
