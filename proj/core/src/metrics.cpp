#include "escnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace escnav {

using nlohmann::json;

std::string EpisodeRecord::to_json_line() const {
  json fronts = json::array();
  for (const auto& f : chosen_frontiers) {
    fronts.push_back({{"step", f.step},
                      {"x", f.centroid.x},
                      {"y", f.centroid.y},
                      {"goal_distance", f.goal_distance},
                      {"energy", f.energy}});
  }
  const json j = {{"world_id", world_id},
                  {"episode", episode_index},
                  {"goal", goal},
                  {"success", success},
                  {"path_length", path_length},
                  {"shortest_path", shortest_path},
                  {"final_distance", final_distance},
                  {"initial_distance", initial_distance},
                  {"chosen_frontiers", fronts},
                  {"ever_saw_goal", ever_saw_goal},
                  {"ever_detected_goal", ever_detected_goal},
                  {"false_goal_detection_acted", false_goal_detection_acted},
                  {"stuck", stuck},
                  {"actions", actions},
                  {"stop_reason", stop_reason}};
  return j.dump();
}

EpisodeRecord EpisodeRecord::from_json_line(const std::string& line) {
  const json j = json::parse(line);
  EpisodeRecord r;
  r.world_id = j.at("world_id").get<uint64_t>();
  r.episode_index = j.at("episode").get<int>();
  r.goal = j.at("goal").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.path_length = j.at("path_length").get<double>();
  r.shortest_path = j.at("shortest_path").get<double>();
  r.final_distance = j.at("final_distance").get<double>();
  r.initial_distance = j.at("initial_distance").get<double>();
  for (const auto& f : j.at("chosen_frontiers")) {
    r.chosen_frontiers.push_back({f.at("step").get<int>(),
                                  {f.at("x").get<double>(), f.at("y").get<double>()},
                                  f.at("goal_distance").get<double>(),
                                  f.at("energy").get<double>(),
                                  0.0});
  }
  r.ever_saw_goal = j.at("ever_saw_goal").get<bool>();
  r.ever_detected_goal = j.at("ever_detected_goal").get<bool>();
  r.false_goal_detection_acted = j.at("false_goal_detection_acted").get<bool>();
  r.stuck = j.at("stuck").get<bool>();
  r.actions = j.at("actions").get<int>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  return r;
}

const char* error_class_name(ErrorClass e) {
  switch (e) {
    case ErrorClass::Success: return "success";
    case ErrorClass::DetectionError: return "detection";
    case ErrorClass::PlanningError: return "planning";
    case ErrorClass::ExplorationError: return "exploration";
  }
  return "?";
}

ErrorClass classify_error(const EpisodeRecord& r) {
  if (r.success) return ErrorClass::Success;
  if (r.ever_detected_goal || r.stuck) return ErrorClass::PlanningError;
  if (r.ever_saw_goal || r.false_goal_detection_acted) return ErrorClass::DetectionError;
  return ErrorClass::ExplorationError;
}

bool detect_stuck(const std::vector<Point>& poses, int window, double radius) {
  if (static_cast<int>(poses.size()) < window) return false;
  for (size_t start = 0; start + window <= poses.size(); ++start) {
    bool inside = true;
    for (size_t i = start; i < start + window; ++i) {
      if (distance(poses[start], poses[i]) > radius) {
        inside = false;
        break;
      }
    }
    if (inside) return true;
  }
  return false;
}

MetricsSummary compute_metrics(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: no records");

  MetricsSummary s;
  s.episodes = static_cast<int>(records.size());
  double frontier_sum = 0.0;
  int frontier_count = 0;
  std::map<std::string, int> cat_success;
  int errors[3] = {0, 0, 0};

  for (const auto& r : records) {
    if (r.shortest_path <= 0.0)
      throw std::invalid_argument("compute_metrics: zero-length shortest path");
    const double denom = std::max(r.path_length, r.shortest_path);
    s.sr += r.success ? 1.0 : 0.0;
    s.spl += r.success ? r.shortest_path / denom : 0.0;
    const double progress =
        r.initial_distance > 0.0 ? std::max(0.0, 1.0 - r.final_distance / r.initial_distance)
                                 : 1.0;
    s.softspl += progress * (r.shortest_path / denom);
    for (const auto& f : r.chosen_frontiers) {
      if (std::isfinite(f.goal_distance)) {
        frontier_sum += f.goal_distance;
        ++frontier_count;
      }
    }
    s.per_category_count[r.goal] += 1;
    if (r.success) cat_success[r.goal] += 1;
    switch (classify_error(r)) {
      case ErrorClass::Success: break;
      case ErrorClass::ExplorationError: ++errors[0]; break;
      case ErrorClass::DetectionError: ++errors[1]; break;
      case ErrorClass::PlanningError: ++errors[2]; break;
    }
  }

  const double n = static_cast<double>(records.size());
  s.sr /= n;
  s.spl /= n;
  s.softspl /= n;
  s.frontier_dist =
      frontier_count ? frontier_sum / frontier_count : std::numeric_limits<double>::quiet_NaN();
  for (const auto& [cat, count] : s.per_category_count)
    s.per_category_sr[cat] = static_cast<double>(cat_success[cat]) / count;
  s.exploration_error_rate = errors[0] / n;
  s.detection_error_rate = errors[1] / n;
  s.planning_error_rate = errors[2] / n;
  return s;
}

std::string MetricsSummary::to_json() const {
  json j;
  j["sr"] = sr;
  j["spl"] = spl;
  j["softspl"] = softspl;
  if (std::isnan(frontier_dist))
    j["frontier_dist"] = nullptr;
  else
    j["frontier_dist"] = frontier_dist;
  json per_cat = json::object();
  for (const auto& [cat, v] : per_category_sr)
    per_cat[cat] = {{"sr", v}, {"episodes", per_category_count.at(cat)}};
  j["per_category"] = per_cat;
  j["errors"] = {{"exploration", exploration_error_rate},
                 {"detection", detection_error_rate},
                 {"planning", planning_error_rate}};
  j["episodes"] = episodes;
  return j.dump(2);
}

}  // namespace escnav
