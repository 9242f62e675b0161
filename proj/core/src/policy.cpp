#include "escnav/policy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace escnav {

PolicyConfig PolicyConfig::make(PolicyMode mode, bool use_object, bool use_room) {
  PolicyConfig cfg;
  cfg.mode = mode;
  cfg.use_object = use_object;
  cfg.use_room = use_room;
  if (mode == PolicyMode::ESC && use_object && use_room) cfg.w_dist = 2.0;
  return cfg;
}

// --- grounding construction --------------------------------------------------

GroundingBuild build_grounding(const std::string& goal, const std::vector<Frontier>& frontiers,
                               const SemanticMap& sem, const NavMap& nav, const Pose& pose,
                               const CooccurScores& scores, const Vocabulary& vocab,
                               const PolicyConfig& cfg) {
  GroundingBuild build;

  // One flood from the agent cell gives every frontier's geodesic distance.
  const Cell agent_cell = point_to_cell(pose.position(), nav.resolution());
  const std::vector<double> field =
      geodesic_field([&](const Cell& c) { return nav.at(c) == CellState::Free; }, nav.width(),
                     nav.height(), nav.resolution(), {agent_cell});
  auto frontier_dist = [&](const Frontier& f) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& c : f.cells)
      best = std::min(best, field[static_cast<size_t>(c.y) * nav.width() + c.x]);
    return best;
  };

  // Unreachable frontiers are never eligible.
  std::vector<std::pair<const Frontier*, double>> reachable;
  for (const Frontier& f : frontiers) {
    const double d = frontier_dist(f);
    if (std::isfinite(d)) reachable.push_back({&f, d});
  }
  if (reachable.empty()) {
    build.exhausted = true;
    return build;
  }

  // d_f threshold, waived when every frontier is nearer than d_f.
  bool any_far = false;
  for (const auto& [f, d] : reachable) any_far |= d >= cfg.frontier_min_dist;
  for (const auto& [f, d] : reachable) {
    if (any_far && d < cfg.frontier_min_dist) continue;
    build.eligible.push_back(*f);
    build.eligible_distances.push_back(d);
  }

  Grounding& g = build.grounding;
  double min_dist = *std::min_element(build.eligible_distances.begin(),
                                      build.eligible_distances.end());
  if (min_dist <= 0.0) min_dist = nav.resolution();  // agent standing on a frontier cell

  const bool object_level = cfg.mode == PolicyMode::ESC && cfg.use_object;
  const bool room_level = cfg.mode == PolicyMode::ESC && cfg.use_room;

  if (object_level) {
    for (const auto& label : vocab.prompt_objects()) {
      const auto it = scores.objects.find(label);
      const double s = it == scores.objects.end() ? kNeutralScore : it->second;
      g.add_atom({"IsCooccur", {goal, label}, s, AtomKind::Observed});
    }
  }
  if (room_level) {
    for (const auto& label : vocab.rooms) {
      const auto it = scores.rooms.find(label);
      const double s = it == scores.rooms.end() ? kNeutralScore : it->second;
      g.add_atom({"IsCooccurRoom", {goal, label}, s, AtomKind::Observed});
    }
  }

  SumConstraint simplex;
  for (size_t i = 0; i < build.eligible.size(); ++i) {
    const Frontier& f = build.eligible[i];
    const std::string fid = std::to_string(f.id);
    const double dist = build.eligible_distances[i];

    if (object_level) {
      std::vector<std::pair<std::string, double>> near =
          context_near(sem, f, DetectionKind::Object, cfg.near_object_radius);
      for (const auto& label : vocab.prompt_objects()) {
        double conf = 0.0;
        for (const auto& [l, c] : near)
          if (l == label) conf = c;
        g.add_atom({"IsNearObj", {fid, label}, conf, AtomKind::Observed});
      }
    }
    if (room_level) {
      std::vector<std::pair<std::string, double>> near =
          context_near(sem, f, DetectionKind::Room, cfg.near_room_radius);
      for (const auto& label : vocab.rooms) {
        double conf = 0.0;
        for (const auto& [l, c] : near)
          if (l == label) conf = c;
        g.add_atom({"IsNearRoom", {fid, label}, conf, AtomKind::Observed});
      }
    }

    // Closest eligible frontier gets 1.0, farther ones proportionally less.
    g.add_atom({"ShortDist", {fid}, std::min(1.0, min_dist / std::max(dist, 1e-9)),
                AtomKind::Observed});

    Atom choose{"ChooseFrontier", {fid}, 0.0, AtomKind::Target};
    choose.tie_distance = dist;
    choose.tie_id = f.id;
    const AtomId id = g.add_atom(choose);
    build.choose_atoms.push_back(id);
    simplex.atoms.push_back(id);
  }
  g.constraints.push_back(simplex);

  const Term G = Term::constant(goal);
  const Term F = Term::var("F");
  if (object_level) {
    const Term O = Term::var("O");
    g.templates.push_back({"object_positive", cfg.w_obj,
                           {{"IsCooccur", {G, O}, false}, {"IsNearObj", {F, O}, false}},
                           {"ChooseFrontier", {F}, false},
                           cfg.exponent});
    g.templates.push_back({"object_negative", cfg.w_obj_neg,
                           {{"IsCooccur", {G, O}, true}, {"IsNearObj", {F, O}, false}},
                           {"ChooseFrontier", {F}, true},
                           cfg.exponent});
  }
  if (room_level) {
    const Term R = Term::var("R");
    g.templates.push_back({"room_positive", cfg.w_room,
                           {{"IsCooccurRoom", {G, R}, false}, {"IsNearRoom", {F, R}, false}},
                           {"ChooseFrontier", {F}, false},
                           cfg.exponent});
    g.templates.push_back({"room_negative", cfg.w_room_neg,
                           {{"IsCooccurRoom", {G, R}, true}, {"IsNearRoom", {F, R}, false}},
                           {"ChooseFrontier", {F}, true},
                           cfg.exponent});
  }
  g.templates.push_back({"shortest_distance", cfg.w_dist,
                         {{"ShortDist", {F}, false}},
                         {"ChooseFrontier", {F}, false},
                         cfg.exponent});

  g.rules = ground_rules(g, g.templates, /*prune=*/true);
  return build;
}

SelectResult select_frontier(const GroundingBuild& build, const PolicyConfig& cfg) {
  if (build.exhausted || build.eligible.empty())
    throw std::invalid_argument("select_frontier: no eligible frontiers");

  SelectResult result;
  const auto start = std::chrono::steady_clock::now();
  AtomId chosen = -1;
  if (cfg.solver == SolverChoice::OneHot) {
    const OneHotSolution sol = solve_one_hot(build.grounding);
    chosen = sol.chosen;
    result.energy = sol.energy;
  } else {
    const ContinuousSolution sol = solve_continuous(build.grounding);
    result.energy = sol.energy;
    // Round to the max-mass frontier; ties by distance then id.
    double best_mass = -1.0;
    for (const AtomId id : build.choose_atoms) {
      const double mass = sol.assignment[id];
      const Atom& atom = build.grounding.atom(id);
      bool better = mass > best_mass;
      if (!better && mass == best_mass && chosen >= 0) {
        const Atom& incumbent = build.grounding.atom(chosen);
        better = atom.tie_distance < incumbent.tie_distance ||
                 (atom.tie_distance == incumbent.tie_distance && atom.tie_id < incumbent.tie_id);
      }
      if (better) {
        best_mass = mass;
        chosen = id;
      }
    }
  }
  result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (size_t i = 0; i < build.choose_atoms.size(); ++i)
    if (build.choose_atoms[i] == chosen) result.frontier_index = static_cast<int>(i);
  return result;
}

// --- local planner -----------------------------------------------------------

namespace {

int snap_heading(double bearing_deg) {
  int k = static_cast<int>(std::lround(bearing_deg / kTurnDeg)) % kNumHeadings;
  if (k < 0) k += kNumHeadings;
  return k;
}

// Rotations taking `heading` to `to`; shortest direction, right on ties.
void emit_rotations(int heading, int to, std::vector<Action>& out) {
  int delta = (to - heading) % kNumHeadings;
  if (delta < 0) delta += kNumHeadings;  // 0..11, counterclockwise count
  if (delta <= kNumHeadings / 2) {
    for (int i = 0; i < delta; ++i) out.push_back(Action::RotateLeft);
  } else {
    for (int i = 0; i < kNumHeadings - delta; ++i) out.push_back(Action::RotateRight);
  }
}

}  // namespace

PlanResult plan_path(const NavMap& nav, const Pose& from, const Cell& to) {
  PlanResult result;
  const int w = nav.width(), h = nav.height();
  const Cell start = point_to_cell(from.position(), nav.resolution());
  if (!nav.in_bounds(start) || nav.at(start) != CellState::Free) return result;

  auto passable = [&](const Cell& c) {
    return nav.in_bounds(c) && nav.at(c) != CellState::Obstacle;
  };

  // The target itself may be an Obstacle (a projected point on a wall);
  // accept its passable neighbors instead.
  std::vector<Cell> goals;
  if (passable(to)) {
    goals.push_back(to);
  } else {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if ((dx || dy) && passable({to.x + dx, to.y + dy})) goals.push_back({to.x + dx, to.y + dy});
  }
  if (goals.empty()) return result;

  auto idx = [&](const Cell& c) { return static_cast<size_t>(c.y) * w + c.x; };
  auto cell_cost = [&](const Cell& c) { return nav.at(c) == CellState::Unknown ? 3.0 : 1.0; };
  auto heuristic = [&](const Cell& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& t : goals) {
      const double dx = std::abs(c.x - t.x), dy = std::abs(c.y - t.y);
      best = std::min(best, std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
    }
    return best;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g_cost(static_cast<size_t>(w) * h, inf);
  std::vector<int32_t> parent(static_cast<size_t>(w) * h, -1);

  struct Node {
    double f, g;
    Cell cell;
    bool operator>(const Node& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g > o.g;
      if (cell.y != o.cell.y) return cell.y > o.cell.y;
      return cell.x > o.cell.x;
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  g_cost[idx(start)] = 0.0;
  open.push({heuristic(start), 0.0, start});

  static const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  Cell reached{-1, -1};
  while (!open.empty()) {
    const Node node = open.top();
    open.pop();
    if (node.g > g_cost[idx(node.cell)]) continue;
    if (std::find(goals.begin(), goals.end(), node.cell) != goals.end()) {
      reached = node.cell;
      break;
    }
    for (int k = 0; k < 8; ++k) {
      const Cell n{node.cell.x + dxs[k], node.cell.y + dys[k]};
      if (!passable(n)) continue;
      if (k >= 4) {
        // No cutting corners around Obstacle cells.
        const Cell a{node.cell.x + dxs[k], node.cell.y};
        const Cell b{node.cell.x, node.cell.y + dys[k]};
        if (!passable(a) || !passable(b)) continue;
      }
      const double base = k < 4 ? 1.0 : std::sqrt(2.0);
      const double ng = node.g + base * cell_cost(n);
      if (ng < g_cost[idx(n)]) {
        g_cost[idx(n)] = ng;
        parent[idx(n)] = static_cast<int32_t>(idx(node.cell));
        open.push({ng + heuristic(n), ng, n});
      }
    }
  }
  if (reached.x < 0) return result;

  // Reconstruct.
  std::vector<Cell> path;
  for (Cell c = reached;;) {
    path.push_back(c);
    const int32_t p = parent[idx(c)];
    if (c == start) break;
    c = {static_cast<int>(p % w), static_cast<int>(p / w)};
  }
  std::reverse(path.begin(), path.end());
  result.path = path;
  result.reachable = true;

  // Rotate-then-move conversion with simulated kinematics; the caller takes
  // the first action and replans, so drift from 30-degree snapping washes out.
  Pose sim = from;
  for (size_t i = 1; i < path.size(); ++i) {
    const Point wp = cell_center(path[i], nav.resolution());
    const double bearing = rad2deg(std::atan2(wp.y - sim.y, wp.x - sim.x));
    const int want = snap_heading(bearing);
    emit_rotations(sim.heading, want, result.actions);
    sim.heading = want;
    result.actions.push_back(Action::MoveForward);
    const double th = deg2rad(sim.heading_deg());
    sim.x += kStepMeters * std::cos(th);
    sim.y += kStepMeters * std::sin(th);
  }
  return result;
}

bool detect_motion(const DepthScan& prev, const DepthScan& curr) {
  if (prev.size() != curr.size())
    throw std::invalid_argument("detect_motion: mismatched ray counts");
  if (prev.size() == 0) return false;
  double sum = 0.0;
  for (size_t i = 0; i < prev.size(); ++i) sum += std::abs(prev.ranges[i] - curr.ranges[i]);
  return sum / static_cast<double>(prev.size()) > 0.05;
}

// --- agent -------------------------------------------------------------------

Agent::Agent(std::string goal, Vocabulary vocab, PolicyConfig cfg, Scorer& scorer,
             int map_width, int map_height, double resolution, const Pose& start)
    : goal_(std::move(goal)),
      vocab_(std::move(vocab)),
      cfg_(cfg),
      scorer_(scorer),
      nav_(map_width, map_height, resolution),
      sem_(map_width, map_height, resolution),
      pose_(start) {
  // Commonsense reasoning happens once, before navigation starts.
  if (cfg_.mode == PolicyMode::ESC) {
    if (cfg_.use_object)
      scores_.objects = scorer_.score_candidates(goal_, vocab_.prompt_objects(), ScoreLevel::Object);
    if (cfg_.use_room)
      scores_.rooms = scorer_.score_candidates(goal_, vocab_.rooms, ScoreLevel::Room);
  }
  history_.push_back(pose_);
}

bool Agent::goal_branch(const std::vector<Detection>& detections, Action& action) {
  const Detection* best = nullptr;
  for (const Detection& det : detections) {
    if (det.kind != DetectionKind::Object || det.label != goal_) continue;
    if (det.confidence < kDetectionThreshold) continue;
    if (!best || det.confidence > best->confidence) best = &det;
  }
  if (best) {
    goal_triggers_.push_back({step_count_, *best});
    const double angle = deg2rad(pose_.heading_deg() + best->bearing);
    if (best->range <= kSensorRange) {
      const Point p{pose_.x + best->range * std::cos(angle),
                    pose_.y + best->range * std::sin(angle)};
      target_kind_ = TargetKind::GoalPoint;
      target_cell_ = point_to_cell(p, nav_.resolution());
    } else {
      // Too far to trust the projected point: head along the bearing until
      // the goal is re-detected within sensor range.
      target_kind_ = TargetKind::LongRange;
      long_range_bearing_deg_ = pose_.heading_deg() + best->bearing;
    }
  }

  if (target_kind_ == TargetKind::GoalPoint) {
    const Point goal_point = cell_center(target_cell_, nav_.resolution());
    if (distance(pose_.position(), goal_point) <= 0.9 * cfg_.success_dist) {
      stop_reason_ = StopReason::GoalReached;
      action = Action::Stop;
      return true;
    }
    action = follow_plan(target_cell_);
    if (action == Action::Stop && stop_reason_ == StopReason::None) {
      // Plan failed or degenerated; resume exploration this step.
      target_kind_ = TargetKind::None;
      return false;
    }
    return true;
  }
  if (target_kind_ == TargetKind::LongRange) {
    // Aim at the farthest non-Obstacle cell along the bearing, a couple of
    // meters out; replanned every step.
    const double th = deg2rad(long_range_bearing_deg_);
    Cell aim = point_to_cell(pose_.position(), nav_.resolution());
    for (double r = 0.5; r <= 2.5; r += 0.25) {
      const Cell c = point_to_cell({pose_.x + r * std::cos(th), pose_.y + r * std::sin(th)},
                                   nav_.resolution());
      if (!nav_.in_bounds(c) || nav_.at(c) == CellState::Obstacle) break;
      aim = c;
    }
    action = follow_plan(aim);
    if (action == Action::Stop && stop_reason_ == StopReason::None) {
      target_kind_ = TargetKind::None;
      return false;
    }
    return true;
  }
  return false;
}

Action Agent::follow_plan(const Cell& to) {
  const PlanResult plan = plan_path(nav_, pose_, to);
  if (!plan.reachable || plan.actions.empty()) return Action::Stop;
  return plan.actions.front();
}

Action Agent::explore(const std::vector<Frontier>& frontiers) {
  // Keep the current frontier target while it is still a frontier and not
  // yet reached; otherwise select anew.
  bool need_selection = target_kind_ != TargetKind::Frontier;
  if (target_kind_ == TargetKind::Frontier) {
    bool still_frontier = false;
    for (const Frontier& f : frontiers) {
      for (const Cell& c : f.cells)
        if (c == target_cell_) { still_frontier = true; break; }
      if (still_frontier) break;
    }
    const double dist_to_target =
        distance(pose_.position(), cell_center(target_cell_, nav_.resolution()));
    if (!still_frontier || dist_to_target <= 0.3) need_selection = true;
  }

  if (need_selection) {
    GroundingBuild build =
        build_grounding(goal_, frontiers, sem_, nav_, pose_, scores_, vocab_, cfg_);
    if (build.exhausted || build.eligible.empty()) {
      stop_reason_ = StopReason::ExplorationExhausted;
      return Action::Stop;
    }
    const SelectResult sel = select_frontier(build, cfg_);
    const Frontier& chosen = build.eligible[sel.frontier_index];
    choices_.push_back({step_count_, chosen.centroid, sel.energy, sel.solve_seconds});
    if (observer_) {
      observer_({step_count_, pose_, nav_, build.eligible, build.eligible_distances,
                 sel.frontier_index});
    }
    // Navigate to the frontier cell nearest the centroid.
    const Frontier& f = chosen;
    Cell best = f.cells.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const Cell& c : f.cells) {
      const double d = distance(cell_center(c, nav_.resolution()), f.centroid);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    target_kind_ = TargetKind::Frontier;
    target_cell_ = best;
    target_frontier_cells_ = f.cells;
  }

  const Action action = follow_plan(target_cell_);
  if (action == Action::Stop && stop_reason_ == StopReason::None) {
    // Target unreachable on the current map; invalidate and retry next step.
    target_kind_ = TargetKind::None;
    return Action::RotateRight;
  }
  return action;
}

Action Agent::decide(const std::optional<Pose>& gps, const std::vector<Detection>& detections,
                     const DepthScan& scan) {
  if (cfg_.use_gps && gps) {
    const Pose previous = pose_;
    pose_ = *gps;
    // A MoveForward that did not displace us hit something the scan may
    // never show (a side corner); mark the cell ahead so the planner stops
    // pushing into it.
    if (last_action_ == Action::MoveForward &&
        distance(previous.position(), pose_.position()) < 1e-9) {
      const double th = deg2rad(pose_.heading_deg());
      const Point ahead{pose_.x + kStepMeters * std::cos(th),
                        pose_.y + kStepMeters * std::sin(th)};
      const Cell blocked = point_to_cell(ahead, nav_.resolution());
      if (blocked != point_to_cell(pose_.position(), nav_.resolution()))
        nav_.mark_obstacle(blocked);
      target_kind_ = target_kind_ == TargetKind::Frontier ? TargetKind::None : target_kind_;
    }
  } else if (last_action_ == Action::MoveForward && prev_scan_) {
    // Dead reckoning already advanced the pose; roll it back if the depth
    // difference says the move silently collided.
    if (!detect_motion(*prev_scan_, scan)) {
      const double th = deg2rad(pose_.heading_deg());
      pose_.x -= kStepMeters * std::cos(th);
      pose_.y -= kStepMeters * std::sin(th);
      pending_recovery_rotation_ = true;
    }
  }

  integrate_scan(nav_, pose_, scan);
  for (const Detection& det : detections) {
    if (det.range > kSensorRange) continue;  // long-distance: not recorded
    project_detection(sem_, pose_, det, &nav_);
  }
  prev_scan_ = scan;
  history_.push_back(pose_);

  Action action = Action::Stop;
  if (step_count_ >= cfg_.max_steps - 1) {
    stop_reason_ = stop_reason_ == StopReason::None ? StopReason::StepLimit : stop_reason_;
    action = Action::Stop;
  } else if (step_count_ < kNumHeadings) {
    action = Action::RotateRight;  // initial look-around
  } else if (pending_recovery_rotation_) {
    pending_recovery_rotation_ = false;
    action = Action::RotateRight;
  } else if (!goal_branch(detections, action)) {
    action = explore(extract_frontiers(nav_));
  }

  ++step_count_;
  last_action_ = action;
  if (!cfg_.use_gps && action == Action::MoveForward) {
    const double th = deg2rad(pose_.heading_deg());
    pose_.x += kStepMeters * std::cos(th);
    pose_.y += kStepMeters * std::sin(th);
  } else if (action == Action::RotateLeft) {
    if (!cfg_.use_gps) pose_.heading = (pose_.heading + 1) % kNumHeadings;
  } else if (action == Action::RotateRight) {
    if (!cfg_.use_gps) pose_.heading = (pose_.heading + kNumHeadings - 1) % kNumHeadings;
  }
  return action;
}

}  // namespace escnav
