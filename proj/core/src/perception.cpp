#include "escnav/perception.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace escnav {

using nlohmann::json;

std::vector<std::string> Vocabulary::prompt_objects() const {
  std::vector<std::string> out;
  for (const auto& list : {common_objects, goal_objects})
    for (const auto& label : list)
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
  return out;
}

Vocabulary Vocabulary::defaults() {
  Vocabulary v;
  // MP3D goal categories double as the common-object prompt.
  v.common_objects = {"chair",   "table",   "picture", "cabinet", "cushion",
                      "sofa",    "bed",     "chest_of_drawers", "plant", "sink",
                      "toilet",  "stool",   "towel",   "tv_monitor", "shower",
                      "bathtub", "counter", "fireplace", "gym_equipment", "seating",
                      "clothes"};
  v.goal_objects = {"chair", "sofa", "plant", "bed", "toilet", "tv_monitor"};
  v.rooms = {"bedroom", "living room", "bathroom",   "kitchen", "dining room",
             "office room", "gym",     "lounge", "laundry room"};
  return v;
}

std::string Vocabulary::to_json() const {
  json j;
  j["common_objects"] = common_objects;
  j["goal_objects"] = goal_objects;
  j["rooms"] = rooms;
  return j.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  const json j = json::parse(text);
  Vocabulary v;
  v.common_objects = j.at("common_objects").get<std::vector<std::string>>();
  v.goal_objects = j.at("goal_objects").get<std::vector<std::string>>();
  v.rooms = j.at("rooms").get<std::vector<std::string>>();
  return v;
}

NoiseModel NoiseModel::benchmark_default() {
  NoiseModel n;
  n.false_negative_rate = 0.2;
  n.false_positive_rate_per_step = 0.02;
  n.confidence_true_lo = 0.7;
  n.confidence_true_hi = 0.99;
  n.confidence_false_lo = 0.61;
  n.confidence_false_hi = 0.85;
  return n;
}

NoiseModel NoiseModel::oracle() { return NoiseModel{}; }

std::string build_prompt(const std::vector<std::string>& common,
                         const std::vector<std::string>& goals) {
  std::vector<std::string> labels;
  for (const auto& list : {common, goals})
    for (const auto& label : list)
      if (std::find(labels.begin(), labels.end(), label) == labels.end())
        labels.push_back(label);
  if (labels.empty()) throw std::invalid_argument("build_prompt: empty object union");
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    out += (i + 1 < labels.size()) ? ". " : ".";
  }
  return out;
}

std::vector<Detection> detect(const std::vector<VisibleInstance>& visible,
                              const std::string& true_room, const Vocabulary& vocab,
                              const NoiseModel& noise, Rng& rng, double room_range_cap) {
  std::vector<Detection> out;

  for (const auto& vis : visible) {
    if (rng.bernoulli(noise.false_negative_rate)) continue;
    Detection det;
    det.label = vis.instance->category;
    for (const auto& [from, swap] : noise.confusion) {
      if (from == det.label && rng.bernoulli(swap.second)) {
        det.label = swap.first;
        break;
      }
    }
    det.confidence = rng.uniform(noise.confidence_true_lo, noise.confidence_true_hi);
    det.bearing = vis.bearing;
    det.range = vis.range;
    det.kind = DetectionKind::Object;
    det.source_id = vis.instance->id;
    out.push_back(det);
  }

  if (rng.bernoulli(noise.false_positive_rate_per_step)) {
    const auto labels = vocab.prompt_objects();
    if (!labels.empty()) {
      Detection det;
      det.label = labels[rng.uniform_int(static_cast<uint64_t>(labels.size()))];
      det.confidence = rng.uniform(noise.confidence_false_lo, noise.confidence_false_hi);
      det.bearing = rng.uniform(-kHfovDeg / 2.0, kHfovDeg / 2.0);
      det.range = rng.uniform(0.5, kSensorRange);
      det.kind = DetectionKind::Object;
      det.source_id = -1;
      out.push_back(det);
    }
  }

  if (!true_room.empty()) {
    double range = noise.room_detection_range;
    if (room_range_cap >= 0.0) range = std::min(range, room_range_cap);
    if (range > 0.3) {  // skip degenerate slivers right next to a doorway
      Detection det;
      det.label = true_room;
      det.confidence = rng.uniform(noise.confidence_true_lo, noise.confidence_true_hi);
      det.bearing = 0.0;
      det.angular_extent = kHfovDeg;
      det.range = range;
      det.kind = DetectionKind::Room;
      out.push_back(det);
    }
  }

  std::erase_if(out, [](const Detection& d) { return d.confidence < kDetectionThreshold; });
  return out;
}

}  // namespace escnav
