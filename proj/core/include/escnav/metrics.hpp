#pragma once

#include <map>
#include <string>
#include <vector>

#include "escnav/geometry.hpp"

namespace escnav {

struct ChosenFrontierRecord {
  int step = 0;
  Point centroid;
  double goal_distance = 0.0;  // geodesic to the nearest goal instance
  double energy = 0.0;
  double solve_seconds = 0.0;
};

struct EpisodeRecord {
  uint64_t world_id = 0;
  int episode_index = 0;
  std::string goal;
  bool success = false;
  double path_length = 0.0;        // p: sum of realized displacements (meters)
  double shortest_path = 0.0;      // l: episode shortest_geodesic (meters)
  double final_distance = 0.0;     // geodesic to nearest goal at the end
  double initial_distance = 0.0;
  std::vector<ChosenFrontierRecord> chosen_frontiers;
  bool ever_saw_goal = false;        // goal instance in the visible set at any step
  bool ever_detected_goal = false;   // true-positive goal detection at any step
  bool false_goal_detection_acted = false;
  bool stuck = false;  // some 400-step window stayed within 1 m of its start
  int actions = 0;
  std::string stop_reason;

  std::string to_json_line() const;
  static EpisodeRecord from_json_line(const std::string& line);
};

enum class ErrorClass { Success, DetectionError, PlanningError, ExplorationError };

const char* error_class_name(ErrorClass e);

// Precedence on overlap: Planning, then Detection, then Exploration.
ErrorClass classify_error(const EpisodeRecord& r);

// True when some 400-step window of `poses` stays within 1 m of the
// window's first pose.
bool detect_stuck(const std::vector<Point>& poses, int window = 400, double radius = 1.0);

struct MetricsSummary {
  double sr = 0.0;
  double spl = 0.0;
  double softspl = 0.0;
  double frontier_dist = 0.0;  // mean over all chosen frontiers; NaN if none
  std::map<std::string, double> per_category_sr;
  std::map<std::string, int> per_category_count;
  double exploration_error_rate = 0.0;
  double detection_error_rate = 0.0;
  double planning_error_rate = 0.0;
  int episodes = 0;

  std::string to_json() const;
};

MetricsSummary compute_metrics(const std::vector<EpisodeRecord>& records);

}  // namespace escnav
