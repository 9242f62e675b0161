#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "escnav/commonsense.hpp"
#include "escnav/mapping.hpp"
#include "escnav/perception.hpp"
#include "escnav/softlogic.hpp"
#include "escnav/world.hpp"

namespace escnav {

enum class SolverChoice { OneHot, Continuous };
enum class PolicyMode { ESC, GoW };

struct PolicyConfig {
  double frontier_min_dist = 1.6;   // d_f: frontiers nearer than this are ineligible
  double near_object_radius = kNearObjectRadius;  // d_o
  double near_room_radius = kNearRoomRadius;      // d_r
  double w_obj = 1.0;
  double w_obj_neg = 1.0;
  double w_room = 1.0;
  double w_room_neg = 1.0;
  double w_dist = 1.0;
  bool use_object = true;
  bool use_room = true;
  int exponent = 1;  // p
  SolverChoice solver = SolverChoice::OneHot;
  PolicyMode mode = PolicyMode::ESC;
  double success_dist = kDefaultSuccessDist;  // d_s
  int max_steps = 500;
  bool use_gps = true;

  // Applies the paper defaults: all rule weights 1.0, distance rule doubled
  // when both reasoning levels are active.
  static PolicyConfig make(PolicyMode mode, bool use_object = true, bool use_room = true);
};

// Co-occurrence scores fetched once per episode.
struct CooccurScores {
  std::map<std::string, double> objects;
  std::map<std::string, double> rooms;
};

// Frontier atoms plus bookkeeping for selection and tie-breaking.
struct GroundingBuild {
  Grounding grounding;
  std::vector<Frontier> eligible;
  std::vector<double> eligible_distances;  // geodesic, parallel to eligible
  std::vector<AtomId> choose_atoms;        // parallel to eligible
  bool exhausted = false;                  // no reachable frontier at all
};

// Instantiates the soft-logic program over eligible frontiers (geodesic
// >= d_f, waived when every frontier is nearer). GoW mode emits only the
// shortest-distance rule and the sum constraint.
GroundingBuild build_grounding(const std::string& goal, const std::vector<Frontier>& frontiers,
                               const SemanticMap& sem, const NavMap& nav, const Pose& pose,
                               const CooccurScores& scores, const Vocabulary& vocab,
                               const PolicyConfig& cfg);

struct SelectResult {
  int frontier_index = -1;  // index into GroundingBuild::eligible
  double energy = 0.0;
  double solve_seconds = 0.0;
};

// Runs the configured solver; a continuous solution is rounded to the
// max-mass frontier with the same distance/id tie-break.
SelectResult select_frontier(const GroundingBuild& build, const PolicyConfig& cfg);

struct PlanResult {
  std::vector<Cell> path;       // cells from start to target, inclusive
  std::vector<Action> actions;  // rotate-then-move sequence along the path
  bool reachable = false;
};

// Shortest 8-connected path: Free cost 1, Unknown cost 3, Obstacle forbidden;
// diagonals may not cut corners past Obstacle cells. Callers replan every
// step against the updated map.
PlanResult plan_path(const NavMap& nav, const Pose& from, const Cell& to);

// True when the agent moved: mean absolute per-ray range difference > 0.05 m.
bool detect_motion(const DepthScan& prev, const DepthScan& curr);

enum class StopReason { None, GoalReached, ExplorationExhausted, StepLimit };

struct FrontierChoice {
  int step = 0;
  Point centroid;
  double energy = 0.0;
  double solve_seconds = 0.0;
};

// Snapshot handed to the selection observer (used by the benchmark harness
// and the GoW-oracle acceptance test).
struct SelectionEvent {
  int step = 0;
  Pose pose;
  NavMap nav;
  std::vector<Frontier> eligible;
  std::vector<double> distances;
  int chosen_index = -1;
};

// The ESC navigation agent: owns the maps and the Algorithm-1 state machine.
class Agent {
 public:
  Agent(std::string goal, Vocabulary vocab, PolicyConfig cfg, Scorer& scorer,
        int map_width, int map_height, double resolution, const Pose& start);

  // One control step. `gps` carries the ground-truth pose when available;
  // without it the agent dead-reckons and uses the depth-difference motion
  // check to catch silent collisions.
  Action decide(const std::optional<Pose>& gps, const std::vector<Detection>& detections,
                const DepthScan& scan);

  const NavMap& nav() const { return nav_; }
  const SemanticMap& sem() const { return sem_; }
  const Pose& believed_pose() const { return pose_; }
  int step_count() const { return step_count_; }
  StopReason stop_reason() const { return stop_reason_; }
  const std::vector<FrontierChoice>& frontier_choices() const { return choices_; }
  // Goal-label detections the agent acted on, by step.
  const std::vector<std::pair<int, Detection>>& goal_triggers() const { return goal_triggers_; }
  const std::vector<Pose>& pose_history() const { return history_; }

  void set_selection_observer(std::function<void(const SelectionEvent&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  enum class TargetKind { None, Frontier, GoalPoint, LongRange };

  Action explore(const std::vector<Frontier>& frontiers);
  Action follow_plan(const Cell& to);
  bool goal_branch(const std::vector<Detection>& detections, Action& action);

  std::string goal_;
  Vocabulary vocab_;
  PolicyConfig cfg_;
  Scorer& scorer_;
  CooccurScores scores_;

  NavMap nav_;
  SemanticMap sem_;
  Pose pose_;
  std::vector<Pose> history_;
  std::optional<DepthScan> prev_scan_;
  std::optional<Action> last_action_;

  TargetKind target_kind_ = TargetKind::None;
  Cell target_cell_{};
  std::vector<Cell> target_frontier_cells_;
  double long_range_bearing_deg_ = 0.0;

  int step_count_ = 0;
  StopReason stop_reason_ = StopReason::None;
  bool pending_recovery_rotation_ = false;
  std::vector<FrontierChoice> choices_;
  std::vector<std::pair<int, Detection>> goal_triggers_;
  std::function<void(const SelectionEvent&)> observer_;
};

}  // namespace escnav
