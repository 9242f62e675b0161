#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <queue>

#include "doctest.h"
#include "escnav/policy.hpp"
#include "oracles.hpp"

using namespace escnav;

namespace {

// Central free room with three 3-cell-wide corridor arms (east, north,
// west). Each arm's far end borders Unknown, so there is exactly one
// frontier per arm at a controlled geodesic distance.
struct StarMap {
  NavMap nav{80, 80, 0.25};
  SemanticMap sem{80, 80, 0.25};
  Pose pose;
  std::vector<Cell> arm_ends;  // middle cell of each arm's end column
};

StarMap make_star(const std::vector<int>& arm_lengths) {
  StarMap star;
  // Build in a plain array first; NavMap obstacles are sticky, so door
  // cells must be decided before painting.
  enum { U = 0, F = 1, O = 2 };
  std::vector<std::vector<int>> grid(80, std::vector<int>(80, U));
  for (int y = 36; y <= 44; ++y)
    for (int x = 36; x <= 44; ++x) grid[y][x] = F;
  for (int k = 35; k <= 45; ++k) {
    grid[35][k] = grid[45][k] = O;
    grid[k][35] = grid[k][45] = O;
  }
  auto carve = [&](int arm, int length) {
    for (int i = 0; i <= length; ++i) {
      for (int off = -1; off <= 1; ++off) {
        if (arm == 0) grid[40 + off][45 + i] = F;
        if (arm == 1) grid[45 + i][40 + off] = F;
        if (arm == 2) grid[40 + off][35 - i] = F;
      }
      if (arm == 0) grid[38][45 + i] = grid[42][45 + i] = O;
      if (arm == 1) grid[45 + i][38] = grid[45 + i][42] = O;
      if (arm == 2) grid[38][35 - i] = grid[42][35 - i] = O;
    }
    if (arm == 0) star.arm_ends.push_back({45 + length, 40});
    if (arm == 1) star.arm_ends.push_back({40, 45 + length});
    if (arm == 2) star.arm_ends.push_back({35 - length, 40});
  };
  for (size_t i = 0; i < arm_lengths.size(); ++i) carve(static_cast<int>(i), arm_lengths[i]);

  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x) {
      if (grid[y][x] == F) star.nav.mark_free({x, y});
      if (grid[y][x] == O) star.nav.mark_obstacle({x, y});
    }
  const Point center = cell_center({40, 40}, 0.25);
  star.pose = {center.x, center.y, 0};
  return star;
}

CooccurScores neutral_scores(const Vocabulary& vocab) {
  CooccurScores s;
  for (const auto& o : vocab.prompt_objects()) s.objects[o] = 0.5;
  for (const auto& r : vocab.rooms) s.rooms[r] = 0.5;
  return s;
}

int frontier_of_cell(const std::vector<Frontier>& frontiers, const Cell& c) {
  for (const auto& f : frontiers)
    for (const Cell& fc : f.cells)
      if (fc == c) return f.id;
  return -1;
}

}  // namespace

TEST_CASE("PolicyConfig::make applies the default weights") {
  const PolicyConfig both = PolicyConfig::make(PolicyMode::ESC, true, true);
  CHECK(both.w_dist == doctest::Approx(2.0));
  CHECK(both.w_obj == doctest::Approx(1.0));
  const PolicyConfig obj_only = PolicyConfig::make(PolicyMode::ESC, true, false);
  CHECK(obj_only.w_dist == doctest::Approx(1.0));
  const PolicyConfig room_only = PolicyConfig::make(PolicyMode::ESC, false, true);
  CHECK(room_only.w_dist == doctest::Approx(1.0));
  const PolicyConfig gow = PolicyConfig::make(PolicyMode::GoW);
  CHECK(gow.mode == PolicyMode::GoW);
}

TEST_CASE("build_grounding: GoW mode emits only distance rules and the constraint") {
  const StarMap star = make_star({8, 10, 12});
  const auto frontiers = extract_frontiers(star.nav);
  REQUIRE(frontiers.size() == 3);
  const Vocabulary vocab = Vocabulary::defaults();
  const PolicyConfig cfg = PolicyConfig::make(PolicyMode::GoW);
  const GroundingBuild build = build_grounding("toilet", frontiers, star.sem, star.nav,
                                               star.pose, neutral_scores(vocab), vocab, cfg);
  REQUIRE(build.eligible.size() == 3);
  CHECK(build.grounding.rules.size() == 3);  // one ShortDist rule per frontier
  CHECK(build.grounding.constraints.size() == 1);
  CHECK(build.grounding.constraints[0].atoms.size() == 3);
}

TEST_CASE("build_grounding: object-only rule count bound") {
  const StarMap star = make_star({8, 10});
  const auto frontiers = extract_frontiers(star.nav);
  REQUIRE(frontiers.size() == 2);
  const Vocabulary vocab = Vocabulary::defaults();
  PolicyConfig cfg = PolicyConfig::make(PolicyMode::ESC, true, false);
  const GroundingBuild build = build_grounding("toilet", frontiers, star.sem, star.nav,
                                               star.pose, neutral_scores(vocab), vocab, cfg);
  const size_t n_objects = vocab.prompt_objects().size();
  CHECK(n_objects == 21);
  // Bound before pruning: 2 frontiers x 21 objects x 2 rules + 2 distance rules.
  const auto unpruned = ground_rules(build.grounding, build.grounding.templates, false);
  CHECK(unpruned.size() == 2 * n_objects * 2 + 2);
  CHECK(build.grounding.rules.size() <= unpruned.size());
}

TEST_CASE("build_grounding: frontiers nearer than d_f are excluded, waived if all near") {
  // Door columns sit 1.25 m out; longer arms are past the 1.6 m threshold.
  const StarMap star = make_star({0, 7, 11});
  const auto frontiers = extract_frontiers(star.nav);
  REQUIRE(frontiers.size() == 3);
  const Vocabulary vocab = Vocabulary::defaults();
  const PolicyConfig cfg = PolicyConfig::make(PolicyMode::GoW);

  const GroundingBuild build = build_grounding("toilet", frontiers, star.sem, star.nav,
                                               star.pose, neutral_scores(vocab), vocab, cfg);
  // The zero-length arm ends 1.25 m away: below d_f = 1.6, excluded.
  CHECK(build.eligible.size() == 2);
  for (const double d : build.eligible_distances) CHECK(d >= cfg.frontier_min_dist);

  // All frontiers near: filter waived.
  const StarMap near_star = make_star({0, 0, 0});
  const auto near_frontiers = extract_frontiers(near_star.nav);
  REQUIRE(near_frontiers.size() == 3);
  const GroundingBuild waived =
      build_grounding("toilet", near_frontiers, near_star.sem, near_star.nav, near_star.pose,
                      neutral_scores(vocab), vocab, cfg);
  CHECK(waived.eligible.size() == 3);
}

TEST_CASE("build_grounding: ShortDist gives the nearest frontier 1.0") {
  const StarMap star = make_star({8, 10, 14});
  const auto frontiers = extract_frontiers(star.nav);
  const Vocabulary vocab = Vocabulary::defaults();
  const PolicyConfig cfg = PolicyConfig::make(PolicyMode::GoW);
  const GroundingBuild build = build_grounding("toilet", frontiers, star.sem, star.nav,
                                               star.pose, neutral_scores(vocab), vocab, cfg);
  double min_dist = 1e18;
  for (const double d : build.eligible_distances) min_dist = std::min(min_dist, d);
  for (size_t i = 0; i < build.eligible.size(); ++i) {
    const std::string fid = std::to_string(build.eligible[i].id);
    const auto atom_id = build.grounding.find_atom("ShortDist", {fid});
    REQUIRE(atom_id.has_value());
    const double value = build.grounding.atom(*atom_id).value;
    CHECK(value == doctest::Approx(min_dist / build.eligible_distances[i]));
    CHECK(value <= 1.0);
  }
}

TEST_CASE("build_grounding: exhausted when no frontiers are reachable") {
  NavMap closed(20, 20, 0.25);
  for (int y = 5; y <= 9; ++y)
    for (int x = 5; x <= 9; ++x) closed.mark_free({x, y});
  for (int k = 4; k <= 10; ++k) {
    closed.mark_obstacle({k, 4});
    closed.mark_obstacle({k, 10});
    closed.mark_obstacle({4, k});
    closed.mark_obstacle({10, k});
  }
  const Vocabulary vocab = Vocabulary::defaults();
  SemanticMap sem(20, 20, 0.25);
  const Point c = cell_center({7, 7}, 0.25);
  const GroundingBuild build =
      build_grounding("toilet", extract_frontiers(closed), sem, closed, {c.x, c.y, 0},
                      neutral_scores(vocab), vocab, PolicyConfig::make(PolicyMode::GoW));
  CHECK(build.exhausted);
  CHECK_THROWS_AS(select_frontier(build, PolicyConfig::make(PolicyMode::GoW)),
                  std::invalid_argument);
}

TEST_CASE("select_frontier: uninformative scores reduce ESC to GoW") {
  const StarMap star = make_star({8, 11, 14});
  const auto frontiers = extract_frontiers(star.nav);
  const Vocabulary vocab = Vocabulary::defaults();

  // Scatter some neutral context so the ESC grounding is non-trivial.
  StarMap with_context = make_star({8, 11, 14});
  for (const Cell& end : with_context.arm_ends) {
    const Point p = cell_center(end, 0.25);
    with_context.sem.add_object_point("table", 0.8, p);
    with_context.sem.label_room_cell(end, "kitchen", 0.8);
  }

  const GroundingBuild esc_build =
      build_grounding("toilet", frontiers, with_context.sem, with_context.nav, with_context.pose,
                      neutral_scores(vocab), vocab, PolicyConfig::make(PolicyMode::ESC));
  const GroundingBuild gow_build =
      build_grounding("toilet", frontiers, star.sem, star.nav, star.pose,
                      neutral_scores(vocab), vocab, PolicyConfig::make(PolicyMode::GoW));
  const SelectResult esc = select_frontier(esc_build, PolicyConfig::make(PolicyMode::ESC));
  const SelectResult gow = select_frontier(gow_build, PolicyConfig::make(PolicyMode::GoW));
  CHECK(esc_build.eligible[esc.frontier_index].id == gow_build.eligible[gow.frontier_index].id);
}

TEST_CASE("select_frontier: room commonsense overrides equal distances") {
  // Two equal arms: east labeled bathroom, west labeled kitchen.
  const StarMap base = make_star({10, 10, 10});
  StarMap star = make_star({10, 10, 10});
  const Cell east = star.arm_ends[0];
  const Cell west = star.arm_ends[2];
  for (int off = -1; off <= 1; ++off) {
    star.sem.label_room_cell({east.x, east.y + off}, "bathroom", 0.9);
    star.sem.label_room_cell({west.x, west.y + off}, "kitchen", 0.9);
  }
  const auto frontiers = extract_frontiers(star.nav);
  const Vocabulary vocab = Vocabulary::defaults();
  CooccurScores scores = neutral_scores(vocab);
  scores.rooms["bathroom"] = 0.95;
  scores.rooms["kitchen"] = 0.05;

  const PolicyConfig cfg = PolicyConfig::make(PolicyMode::ESC, false, true);
  const GroundingBuild build =
      build_grounding("toilet", frontiers, star.sem, star.nav, star.pose, scores, vocab, cfg);
  const SelectResult sel = select_frontier(build, cfg);
  const int east_frontier = frontier_of_cell(frontiers, east);
  REQUIRE(east_frontier >= 0);
  CHECK(build.eligible[sel.frontier_index].id == east_frontier);

  // The same instance solved continuously agrees at the argmax level.
  PolicyConfig cont = cfg;
  cont.solver = SolverChoice::Continuous;
  const SelectResult sel2 = select_frontier(build, cont);
  CHECK(build.eligible[sel2.frontier_index].id == east_frontier);
  CHECK(sel2.energy <= sel.energy + 1e-3);
}

TEST_CASE("select_frontier: single eligible frontier wins regardless of scores") {
  const StarMap star = make_star({9});
  const auto frontiers = extract_frontiers(star.nav);
  REQUIRE(frontiers.size() == 1);
  const Vocabulary vocab = Vocabulary::defaults();
  CooccurScores scores = neutral_scores(vocab);
  for (auto& [k, v] : scores.rooms) v = 0.01;
  const PolicyConfig cfg = PolicyConfig::make(PolicyMode::ESC);
  const GroundingBuild build =
      build_grounding("toilet", frontiers, star.sem, star.nav, star.pose, scores, vocab, cfg);
  const SelectResult sel = select_frontier(build, cfg);
  CHECK(build.eligible[sel.frontier_index].id == frontiers[0].id);
}

TEST_CASE("score-shift invariance where all hinges stay strictly active") {
  // Equal positive/negative weights; a constant added to every object score
  // leaves the argmin unchanged as long as no hinge activates/deactivates.
  Rng rng(77);
  const Vocabulary vocab = Vocabulary::defaults();
  PolicyConfig cfg = PolicyConfig::make(PolicyMode::ESC, true, false);
  cfg.w_obj = cfg.w_obj_neg = 1.0;

  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    StarMap star = make_star({8 + static_cast<int>(rng.uniform_int(uint64_t{4})),
                              9 + static_cast<int>(rng.uniform_int(uint64_t{4})),
                              10 + static_cast<int>(rng.uniform_int(uint64_t{4}))});
    // Every frontier gets context for every sampled label, confidences high
    // enough that both hinges stay active for S in [0.3, 0.4] and S+c.
    CooccurScores scores = neutral_scores(vocab);
    const std::vector<std::string> labels = {"table", "sofa", "sink"};
    for (const auto& label : labels) scores.objects[label] = rng.uniform(0.3, 0.4);
    for (const Cell& end : star.arm_ends) {
      const Point p = cell_center(end, 0.25);
      for (const auto& label : labels)
        star.sem.add_object_point(label, rng.uniform(0.78, 0.95), p);
    }
    // Other vocabulary entries must not contribute: zero context (absent).
    const auto frontiers = extract_frontiers(star.nav);
    const GroundingBuild before =
        build_grounding("toilet", frontiers, star.sem, star.nav, star.pose, scores, vocab, cfg);
    const SelectResult sel_before = select_frontier(before, cfg);

    const double c = 0.05;
    CooccurScores shifted = scores;
    for (const auto& label : labels) shifted.objects[label] += c;
    // Only shift labels with active context; neutral 0.5 entries have zero
    // IsNearObj everywhere, so their rules are inert either way.
    const GroundingBuild after =
        build_grounding("toilet", frontiers, star.sem, star.nav, star.pose, shifted, vocab, cfg);
    const SelectResult sel_after = select_frontier(after, cfg);
    CHECK(before.eligible[sel_before.frontier_index].id ==
          after.eligible[sel_after.frontier_index].id);
    ++tested;
  }
  CHECK(tested == 40);
}

namespace {

// Weighted Dijkstra with the planner's documented cost model: Free 1,
// Unknown 3, diagonal sqrt(2) multiplier, no corner cutting past Obstacles.
double plan_cost_oracle(const NavMap& nav, const Cell& from, const Cell& to) {
  const int w = nav.width(), h = nav.height();
  auto passable = [&](const Cell& c) {
    return c.x >= 0 && c.x < w && c.y >= 0 && c.y < h && nav.at(c) != CellState::Obstacle;
  };
  std::map<std::pair<int, int>, double> dist;
  using Item = std::pair<double, std::pair<int, int>>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[{from.x, from.y}] = 0.0;
  pq.push({0.0, {from.x, from.y}});
  while (!pq.empty()) {
    auto [d, key] = pq.top();
    pq.pop();
    if (d > dist[key]) continue;
    if (key.first == to.x && key.second == to.y) return d;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const Cell n{key.first + dx, key.second + dy};
        if (!passable(n)) continue;
        if (dx && dy &&
            (!passable({key.first + dx, key.second}) || !passable({key.first, key.second + dy})))
          continue;
        const double mult = nav.at(n) == CellState::Unknown ? 3.0 : 1.0;
        const double nd = d + ((dx && dy) ? std::sqrt(2.0) : 1.0) * mult;
        const auto it = dist.find({n.x, n.y});
        if (it == dist.end() || nd < it->second) {
          dist[{n.x, n.y}] = nd;
          pq.push({nd, {n.x, n.y}});
        }
      }
  }
  return std::numeric_limits<double>::infinity();
}

double path_cost(const NavMap& nav, const std::vector<Cell>& path) {
  double cost = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    const int dx = std::abs(path[i].x - path[i - 1].x);
    const int dy = std::abs(path[i].y - path[i - 1].y);
    const double mult = nav.at(path[i]) == CellState::Unknown ? 3.0 : 1.0;
    cost += ((dx && dy) ? std::sqrt(2.0) : 1.0) * mult;
  }
  return cost;
}

}  // namespace

TEST_CASE("plan_path: immediate moves and rotation counts") {
  NavMap nav(40, 40, 0.25);
  for (int y = 5; y < 35; ++y)
    for (int x = 5; x < 35; ++x) nav.mark_free({x, y});
  const Point start = cell_center({20, 20}, 0.25);
  const Pose pose{start.x, start.y, 0};  // facing east

  SUBCASE("one cell ahead") {
    const PlanResult plan = plan_path(nav, pose, {21, 20});
    REQUIRE(plan.reachable);
    REQUIRE(plan.actions.size() == 1);
    CHECK(plan.actions[0] == Action::MoveForward);
  }
  SUBCASE("one cell to the left is 3 rotations then a move") {
    const PlanResult plan = plan_path(nav, pose, {20, 21});
    REQUIRE(plan.reachable);
    REQUIRE(plan.actions.size() == 4);
    CHECK(plan.actions[0] == Action::RotateLeft);
    CHECK(plan.actions[1] == Action::RotateLeft);
    CHECK(plan.actions[2] == Action::RotateLeft);
    CHECK(plan.actions[3] == Action::MoveForward);
  }
  SUBCASE("one cell to the right rotates clockwise") {
    const PlanResult plan = plan_path(nav, pose, {20, 19});
    REQUIRE(plan.reachable);
    REQUIRE(plan.actions.size() == 4);
    CHECK(plan.actions[0] == Action::RotateRight);
  }
}

TEST_CASE("plan_path: routes around a U-wall at oracle cost") {
  NavMap nav(40, 40, 0.25);
  for (int y = 2; y < 38; ++y)
    for (int x = 2; x < 38; ++x) nav.mark_free({x, y});
  // U-shaped wall opening west, around the target.
  for (int y = 14; y <= 26; ++y) nav.mark_obstacle({26, y});
  for (int x = 16; x <= 26; ++x) {
    nav.mark_obstacle({x, 14});
    nav.mark_obstacle({x, 26});
  }
  const Point start = cell_center({10, 20}, 0.25);
  const Cell target{30, 20};  // behind the U from the start side

  const PlanResult plan = plan_path(nav, {start.x, start.y, 0}, target);
  REQUIRE(plan.reachable);
  CHECK(plan.path.front() == Cell{10, 20});
  CHECK(plan.path.back() == target);
  for (const Cell& c : plan.path) CHECK(nav.at(c) != CellState::Obstacle);
  CHECK(path_cost(nav, plan.path) ==
        doctest::Approx(plan_cost_oracle(nav, {10, 20}, target)));
}

TEST_CASE("plan_path: random maps match the oracle and avoid obstacles") {
  Rng rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    NavMap nav(30, 30, 0.25);
    for (int y = 1; y < 29; ++y)
      for (int x = 1; x < 29; ++x) {
        const double roll = rng.uniform();
        if (roll < 0.55)
          nav.mark_free({x, y});
        else if (roll < 0.75)
          nav.mark_obstacle({x, y});
        // else Unknown
      }
    Cell from{rng.uniform_int(1, 28), rng.uniform_int(1, 28)};
    Cell to{rng.uniform_int(1, 28), rng.uniform_int(1, 28)};
    if (nav.at(from) != CellState::Free) continue;
    const Point p = cell_center(from, 0.25);
    const PlanResult plan = plan_path(nav, {p.x, p.y, 0}, to);
    const double oracle_cost = plan_cost_oracle(nav, from, to);
    if (!plan.reachable) {
      // Library may still have routed to a passable neighbor of an
      // obstacle target; only assert equivalence for the exact-cell case.
      if (nav.at(to) != CellState::Obstacle) CHECK(std::isinf(oracle_cost));
      continue;
    }
    if (nav.at(to) == CellState::Obstacle) continue;  // neighbor-goal variant
    CHECK(path_cost(nav, plan.path) == doctest::Approx(oracle_cost));
    for (const Cell& c : plan.path) CHECK(nav.at(c) != CellState::Obstacle);
  }
}

TEST_CASE("detect_motion: still, moved, mismatched") {
  DepthScan a;
  for (int i = 0; i < 79; ++i) {
    a.bearings.push_back(i - 39);
    a.ranges.push_back(2.0);
    a.hits.push_back(RayHit::Obstacle);
  }
  DepthScan b = a;
  CHECK_FALSE(detect_motion(a, b));
  for (auto& r : b.ranges) r -= 0.25;
  CHECK(detect_motion(a, b));
  DepthScan c = a;
  c.ranges.pop_back();
  c.bearings.pop_back();
  c.hits.pop_back();
  CHECK_THROWS_AS(detect_motion(a, c), std::invalid_argument);
}

namespace {

struct MiniRun {
  bool stopped = false;
  bool success = false;
  int steps = 0;
  StopReason reason = StopReason::None;
  int selections = 0;
};

MiniRun run_mini(const GridWorld& world, const Pose& start, const std::string& goal,
                 PolicyConfig cfg, int budget = 200) {
  cfg.max_steps = budget;
  TableScorer scorer(ScoreTable::builtin_defaults());
  Agent agent(goal, Vocabulary::defaults(), cfg, scorer, world.width(), world.height(),
              world.resolution(), start);
  Pose pose = start;
  Rng rng(5);
  MiniRun out;
  for (int i = 0; i < budget; ++i) {
    const DepthScan scan = render_depth(world, pose);
    const auto dets = detect(visible_instances(world, pose),
                             world.room_at(point_to_cell(pose.position(), world.resolution())),
                             Vocabulary::defaults(), NoiseModel::oracle(), rng);
    const Action action = agent.decide(pose, dets, scan);
    ++out.steps;
    if (action == Action::Stop) {
      out.stopped = true;
      break;
    }
    pose = step(world, pose, action).pose;
  }
  out.success = check_success(world, pose, goal, cfg.success_dist);
  out.reason = agent.stop_reason();
  out.selections = static_cast<int>(agent.frontier_choices().size());
  return out;
}

}  // namespace

TEST_CASE("decide: the first twelve actions are the look-around rotations") {
  GridWorld world(40, 40, 0.25, 1);
  world.add_room({"living room", 1, 1, 38, 38});
  const Point start = cell_center({20, 20}, 0.25);
  TableScorer scorer(ScoreTable::builtin_defaults());
  Agent agent("toilet", Vocabulary::defaults(), PolicyConfig::make(PolicyMode::ESC), scorer,
              40, 40, 0.25, {start.x, start.y, 0});
  Pose pose{start.x, start.y, 0};
  Rng rng(1);
  for (int i = 0; i < 12; ++i) {
    const DepthScan scan = render_depth(world, pose);
    const auto dets = detect(visible_instances(world, pose), "living room",
                             Vocabulary::defaults(), NoiseModel::oracle(), rng);
    const Action action = agent.decide(pose, dets, scan);
    CHECK(action == Action::RotateRight);
    pose = step(world, pose, action).pose;
  }
  CHECK(pose.heading == 0);  // full circle
}

TEST_CASE("decide: detected goal is approached and stopped at") {
  GridWorld world(48, 48, 0.25, 1);
  world.add_room({"living room", 1, 1, 46, 46});
  world.add_object({"toilet", {30, 24}, 0});
  const Point start = cell_center({20, 24}, 0.25);
  const MiniRun run = run_mini(world, {start.x, start.y, 0}, "toilet",
                               PolicyConfig::make(PolicyMode::ESC));
  CHECK(run.stopped);
  CHECK(run.success);
  CHECK(run.reason == StopReason::GoalReached);
}

TEST_CASE("decide: exploration exhausted in a sealed empty room") {
  GridWorld world(16, 16, 0.25, 1);
  world.add_room({"kitchen", 1, 1, 14, 14});
  const Point start = cell_center({8, 8}, 0.25);
  const MiniRun run = run_mini(world, {start.x, start.y, 0}, "toilet",
                               PolicyConfig::make(PolicyMode::ESC));
  CHECK(run.stopped);
  CHECK_FALSE(run.success);
  CHECK(run.reason == StopReason::ExplorationExhausted);
  CHECK(run.steps < 100);
}

TEST_CASE("decide: step budget forces a stop") {
  // Large world, goal far away, tiny budget.
  WorldGenConfig cfg;
  cfg.width = 52;
  cfg.height = 52;
  cfg.min_rooms = 6;
  cfg.max_rooms = 8;
  cfg.room_labels = Vocabulary::defaults().rooms;
  const GridWorld world = generate_world(cfg, 13);
  Cell start{-1, -1};
  for (int y = 1; y < 51 && start.x < 0; ++y)
    for (int x = 1; x < 51 && start.x < 0; ++x)
      if (!world.occupied({x, y})) start = {x, y};
  const Point sp = cell_center(start, 0.25);
  const MiniRun run =
      run_mini(world, {sp.x, sp.y, 0}, "toilet", PolicyConfig::make(PolicyMode::ESC), 40);
  CHECK(run.stopped);
  CHECK(run.steps <= 40);
}

TEST_CASE("decide: dissolving frontiers trigger re-selection") {
  WorldGenConfig cfg;
  cfg.width = 44;
  cfg.height = 44;
  cfg.min_rooms = 4;
  cfg.max_rooms = 6;
  cfg.room_labels = Vocabulary::defaults().rooms;
  const GridWorld world = generate_world(cfg, 29);
  Cell start{-1, -1};
  for (int y = 1; y < 43 && start.x < 0; ++y)
    for (int x = 1; x < 43 && start.x < 0; ++x)
      if (!world.occupied({x, y})) start = {x, y};
  const Point sp = cell_center(start, 0.25);
  const MiniRun run =
      run_mini(world, {sp.x, sp.y, 0}, "toilet", PolicyConfig::make(PolicyMode::GoW), 300);
  CHECK(run.stopped);
  CHECK(run.selections >= 2);
}

TEST_CASE("decide: long-range goal detections switch to bearing pursuit") {
  GridWorld world(60, 60, 0.25, 1);
  world.add_room({"living room", 1, 1, 58, 58});
  const Point start = cell_center({10, 30}, 0.25);
  TableScorer scorer(ScoreTable::builtin_defaults());
  PolicyConfig cfg = PolicyConfig::make(PolicyMode::ESC);
  cfg.max_steps = 100;
  Agent agent("toilet", Vocabulary::defaults(), cfg, scorer, 60, 60, 0.25,
              {start.x, start.y, 0});
  Pose pose{start.x, start.y, 0};
  Rng rng(1);
  // Look-around first.
  for (int i = 0; i < 12; ++i) {
    const DepthScan scan = render_depth(world, pose);
    pose = step(world, pose, agent.decide(pose, {}, scan)).pose;
  }
  // Synthetic long-range goal detection dead ahead (east).
  Detection far;
  far.label = "toilet";
  far.confidence = 0.95;
  far.bearing = 0.0;
  far.range = 6.5;
  far.kind = DetectionKind::Object;
  far.source_id = -1;
  const DepthScan scan = render_depth(world, pose);
  const Action action = agent.decide(pose, {far}, scan);
  CHECK(action == Action::MoveForward);  // pursuing the bearing
  REQUIRE(agent.goal_triggers().size() == 1);
  // The far detection must not have been projected into the semantic map.
  CHECK(agent.sem().object_points().empty());
}
