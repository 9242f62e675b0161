#pragma once

#include <string>
#include <vector>

#include "escnav/rng.hpp"
#include "escnav/world.hpp"

namespace escnav {

// GLIP-style emission threshold; detections below it are never emitted.
inline constexpr double kDetectionThreshold = 0.61;

struct Vocabulary {
  std::vector<std::string> common_objects;
  std::vector<std::string> goal_objects;
  std::vector<std::string> rooms;

  // Deduplicated union, common objects first.
  std::vector<std::string> prompt_objects() const;

  static Vocabulary defaults();
  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);
};

enum class DetectionKind { Object, Room };

struct Detection {
  std::string label;
  double confidence = 0.0;      // always >= kDetectionThreshold when emitted
  double bearing = 0.0;         // degrees relative to heading
  double angular_extent = 0.0;  // degrees; rooms span the full HFoV
  double range = 0.0;           // meters
  DetectionKind kind = DetectionKind::Object;
  int source_id = -1;           // ground-truth instance id, -1 for spurious/room
};

struct NoiseModel {
  double false_negative_rate = 0.0;
  double false_positive_rate_per_step = 0.0;
  double confidence_true_lo = 0.9;
  double confidence_true_hi = 0.9;
  double confidence_false_lo = 0.61;
  double confidence_false_hi = 0.8;
  // Optional label confusion: (true label -> (swap label, probability)).
  std::vector<std::pair<std::string, std::pair<std::string, double>>> confusion;
  double room_detection_range = 2.5;  // meters painted by a room detection

  // Defaults tuned so detection errors dominate failures in the benchmark.
  static NoiseModel benchmark_default();
  // Exact ground-truth detector: no drops, no spurious hits.
  static NoiseModel oracle();
};

// "label. label. label." — deduplicated union of common and goal objects.
std::string build_prompt(const std::vector<std::string>& common,
                         const std::vector<std::string>& goals);

// Simulated detector over ground-truth visibility. Deterministic given rng.
// `room_range_cap` limits how far the room detection projects (pass the
// room_exit_range so labels stop at doorways); negative means uncapped.
std::vector<Detection> detect(const std::vector<VisibleInstance>& visible,
                              const std::string& true_room, const Vocabulary& vocab,
                              const NoiseModel& noise, Rng& rng,
                              double room_range_cap = -1.0);

}  // namespace escnav
