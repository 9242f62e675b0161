#include "escnav/commonsense.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace escnav {

using nlohmann::json;

std::string ScoreTable::to_json() const {
  json j = json::object();
  for (const auto& [goal, scores] : goals) {
    j[goal] = {{"objects", scores.objects}, {"rooms", scores.rooms}};
  }
  return j.dump(2);
}

ScoreTable ScoreTable::from_json(const std::string& text) {
  ScoreTable t;
  const json parsed = json::parse(text);
  for (const auto& [goal, scores] : parsed.items()) {
    GoalScores g;
    if (scores.contains("objects"))
      g.objects = scores.at("objects").get<std::map<std::string, double>>();
    if (scores.contains("rooms"))
      g.rooms = scores.at("rooms").get<std::map<std::string, double>>();
    for (const auto& [k, v] : g.objects)
      if (v < 0.0 || v > 1.0) throw std::runtime_error("score out of [0,1] for " + goal + "/" + k);
    for (const auto& [k, v] : g.rooms)
      if (v < 0.0 || v > 1.0) throw std::runtime_error("score out of [0,1] for " + goal + "/" + k);
    t.goals[goal] = std::move(g);
  }
  return t;
}

ScoreTable ScoreTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open score table: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ScoreTable ScoreTable::builtin_defaults() {
  // Room priors per goal, then object co-occurrence. Anything unlisted
  // defaults to the neutral 0.5 at query time.
  const char* text = R"JSON({
  "toilet": {
    "rooms": {"bathroom": 0.95, "laundry room": 0.4, "kitchen": 0.05, "bedroom": 0.05,
              "living room": 0.02, "dining room": 0.02, "office room": 0.05, "gym": 0.1, "lounge": 0.02},
    "objects": {"sink": 0.9, "shower": 0.9, "bathtub": 0.85, "towel": 0.8,
                "bed": 0.1, "sofa": 0.05, "tv_monitor": 0.05, "chair": 0.15, "table": 0.1,
                "counter": 0.3, "plant": 0.2, "fireplace": 0.02, "cushion": 0.05,
                "gym_equipment": 0.1, "clothes": 0.3}
  },
  "bed": {
    "rooms": {"bedroom": 0.95, "living room": 0.1, "bathroom": 0.02, "kitchen": 0.02,
              "dining room": 0.02, "office room": 0.1, "gym": 0.02, "lounge": 0.1, "laundry room": 0.02},
    "objects": {"cushion": 0.8, "clothes": 0.7, "chest_of_drawers": 0.8, "picture": 0.5,
                "sink": 0.05, "toilet": 0.05, "shower": 0.02, "bathtub": 0.02, "counter": 0.05,
                "sofa": 0.2, "tv_monitor": 0.4, "chair": 0.3, "table": 0.2, "plant": 0.3}
  },
  "sofa": {
    "rooms": {"living room": 0.9, "lounge": 0.85, "office room": 0.3, "bedroom": 0.15,
              "dining room": 0.1, "kitchen": 0.05, "bathroom": 0.02, "gym": 0.05, "laundry room": 0.02},
    "objects": {"tv_monitor": 0.85, "cushion": 0.9, "table": 0.6, "fireplace": 0.7,
                "picture": 0.5, "plant": 0.5, "chair": 0.5, "seating": 0.6,
                "sink": 0.05, "toilet": 0.02, "shower": 0.02, "bathtub": 0.02, "bed": 0.15}
  },
  "tv_monitor": {
    "rooms": {"living room": 0.85, "lounge": 0.7, "bedroom": 0.5, "office room": 0.5,
              "dining room": 0.1, "kitchen": 0.1, "bathroom": 0.02, "gym": 0.3, "laundry room": 0.02},
    "objects": {"sofa": 0.85, "cushion": 0.6, "table": 0.5, "seating": 0.6, "fireplace": 0.4,
                "sink": 0.05, "toilet": 0.02, "shower": 0.02, "bed": 0.4, "chair": 0.4}
  },
  "chair": {
    "rooms": {"dining room": 0.85, "office room": 0.8, "kitchen": 0.6, "living room": 0.6,
              "bedroom": 0.4, "lounge": 0.5, "bathroom": 0.05, "gym": 0.2, "laundry room": 0.1},
    "objects": {"table": 0.9, "counter": 0.5, "sofa": 0.4, "picture": 0.3,
                "sink": 0.2, "toilet": 0.05, "shower": 0.02, "bed": 0.3, "tv_monitor": 0.4}
  },
  "plant": {
    "rooms": {"living room": 0.7, "lounge": 0.6, "office room": 0.5, "dining room": 0.5,
              "bedroom": 0.4, "kitchen": 0.4, "bathroom": 0.2, "gym": 0.2, "laundry room": 0.1},
    "objects": {"picture": 0.4, "table": 0.5, "sofa": 0.5, "fireplace": 0.3,
                "sink": 0.2, "toilet": 0.1, "bed": 0.3, "chair": 0.4, "tv_monitor": 0.3}
  }
})JSON";
  return from_json(text);
}

std::map<std::string, double> normalize_scores(const std::map<std::string, double>& raw) {
  if (raw.empty()) throw std::invalid_argument("normalize_scores: empty input");
  double lo = raw.begin()->second, hi = raw.begin()->second;
  for (const auto& [k, v] : raw) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : raw)
    out[k] = (hi == lo) ? kNeutralScore : (v - lo) / (hi - lo);
  return out;
}

namespace {

std::string cache_key(const std::string& goal, const std::vector<std::string>& candidates,
                      ScoreLevel level) {
  std::string key = (level == ScoreLevel::Object ? "obj|" : "room|") + goal;
  for (const auto& c : candidates) {
    key += '|';
    key += c;
  }
  return key;
}

}  // namespace

std::map<std::string, double> Scorer::score_candidates(const std::string& goal,
                                                       const std::vector<std::string>& candidates,
                                                       ScoreLevel level) {
  if (candidates.empty()) throw std::invalid_argument("score_candidates: no candidates");
  const std::string key = cache_key(goal, candidates, level);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  std::map<std::string, double> result = compute(goal, candidates, level);
  for (const auto& c : candidates)
    if (!result.count(c)) result[c] = kNeutralScore;
  for (auto& [k, v] : result) v = std::clamp(v, 0.0, 1.0);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[key] = result;
  return result;
}

std::map<std::string, double> TableScorer::compute(const std::string& goal,
                                                   const std::vector<std::string>& candidates,
                                                   ScoreLevel level) {
  const auto it = table_.goals.find(goal);
  if (it == table_.goals.end())
    throw std::runtime_error("score table has no entry for goal '" + goal + "'");
  const auto& scores = level == ScoreLevel::Object ? it->second.objects : it->second.rooms;
  std::map<std::string, double> out;
  for (const auto& c : candidates) {
    const auto s = scores.find(c);
    out[c] = s == scores.end() ? kNeutralScore : s->second;
  }
  return out;
}

}  // namespace escnav
