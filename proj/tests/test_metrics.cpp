#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "escnav/metrics.hpp"
#include "escnav/rng.hpp"

using namespace escnav;

namespace {

EpisodeRecord base_record() {
  EpisodeRecord r;
  r.goal = "toilet";
  r.shortest_path = 4.0;
  r.path_length = 4.0;
  r.initial_distance = 4.0;
  r.final_distance = 0.5;
  r.success = true;
  return r;
}

}  // namespace

TEST_CASE("compute_metrics: formula fixed points") {
  SUBCASE("single success with p == l") {
    const MetricsSummary s = compute_metrics({base_record()});
    CHECK(s.sr == doctest::Approx(1.0));
    CHECK(s.spl == doctest::Approx(1.0));
    CHECK(s.episodes == 1);
  }
  SUBCASE("success with l=4, p=5 contributes SPL 0.8") {
    EpisodeRecord r = base_record();
    r.path_length = 5.0;
    const MetricsSummary s = compute_metrics({r});
    CHECK(s.spl == doctest::Approx(0.8));
    CHECK(s.sr == doctest::Approx(1.0));
  }
  SUBCASE("failure ending where it started contributes zero SoftSPL") {
    EpisodeRecord r = base_record();
    r.success = false;
    r.final_distance = r.initial_distance;
    const MetricsSummary s = compute_metrics({r});
    CHECK(s.softspl == doctest::Approx(0.0));
    CHECK(s.sr == doctest::Approx(0.0));
  }
  SUBCASE("progress halves: SoftSPL = 0.5 * efficiency") {
    EpisodeRecord r = base_record();
    r.success = false;
    r.final_distance = 2.0;  // initial 4.0
    r.path_length = 8.0;
    const MetricsSummary s = compute_metrics({r});
    CHECK(s.softspl == doctest::Approx(0.5 * (4.0 / 8.0)));
  }
  SUBCASE("zero-length shortest path is rejected") {
    EpisodeRecord r = base_record();
    r.shortest_path = 0.0;
    CHECK_THROWS_AS(compute_metrics({r}), std::invalid_argument);
  }
  SUBCASE("no records is rejected with a clear message") {
    CHECK_THROWS_WITH_AS(compute_metrics({}), doctest::Contains("no records"),
                         std::invalid_argument);
  }
}

TEST_CASE("compute_metrics: FrontierDist averages chosen frontiers") {
  EpisodeRecord a = base_record();
  a.chosen_frontiers.push_back({10, {1.0, 1.0}, 3.0, 0.0, 0.0});
  a.chosen_frontiers.push_back({20, {2.0, 1.0}, 5.0, 0.0, 0.0});
  EpisodeRecord b = base_record();
  b.chosen_frontiers.push_back({15, {0.0, 0.0}, 7.0, 0.0, 0.0});
  const MetricsSummary s = compute_metrics({a, b});
  CHECK(s.frontier_dist == doctest::Approx(5.0));
}

TEST_CASE("compute_metrics: per-category breakdown") {
  EpisodeRecord a = base_record();
  EpisodeRecord b = base_record();
  b.goal = "bed";
  b.success = false;
  EpisodeRecord c = base_record();
  c.goal = "bed";
  const MetricsSummary s = compute_metrics({a, b, c});
  CHECK(s.per_category_sr.at("toilet") == doctest::Approx(1.0));
  CHECK(s.per_category_sr.at("bed") == doctest::Approx(0.5));
  CHECK(s.per_category_count.at("bed") == 2);
}

TEST_CASE("metric identities hold on random record sets") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EpisodeRecord> records;
    const int n = 1 + static_cast<int>(rng.uniform_int(uint64_t{40}));
    for (int i = 0; i < n; ++i) {
      EpisodeRecord r;
      r.goal = rng.bernoulli(0.5) ? "bed" : "toilet";
      r.shortest_path = rng.uniform(0.5, 10.0);
      r.path_length = rng.uniform(0.0, 30.0);
      r.initial_distance = r.shortest_path;
      r.final_distance = rng.uniform(0.0, 12.0);
      r.success = rng.bernoulli(0.4);
      r.ever_saw_goal = rng.bernoulli(0.5);
      r.ever_detected_goal = rng.bernoulli(0.3);
      r.false_goal_detection_acted = rng.bernoulli(0.2);
      r.stuck = rng.bernoulli(0.1);
      records.push_back(r);
    }
    const MetricsSummary s = compute_metrics(records);
    CHECK(s.spl <= s.sr + 1e-12);
    CHECK(s.softspl >= 0.0);
    CHECK(s.softspl <= 1.0);

    // Permutation invariance.
    std::vector<EpisodeRecord> shuffled = records;
    for (size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(static_cast<uint64_t>(i))]);
    const MetricsSummary s2 = compute_metrics(shuffled);
    CHECK(s2.sr == doctest::Approx(s.sr));
    CHECK(s2.spl == doctest::Approx(s.spl));
    CHECK(s2.softspl == doctest::Approx(s.softspl));

    // The error taxonomy partitions failures.
    int successes = 0, expl = 0, det = 0, plan = 0;
    for (const auto& r : records) {
      switch (classify_error(r)) {
        case ErrorClass::Success: ++successes; break;
        case ErrorClass::ExplorationError: ++expl; break;
        case ErrorClass::DetectionError: ++det; break;
        case ErrorClass::PlanningError: ++plan; break;
      }
    }
    CHECK(successes + expl + det + plan == n);
    CHECK(s.exploration_error_rate == doctest::Approx(static_cast<double>(expl) / n));
    CHECK(s.detection_error_rate == doctest::Approx(static_cast<double>(det) / n));
    CHECK(s.planning_error_rate == doctest::Approx(static_cast<double>(plan) / n));
  }
}

TEST_CASE("classify_error: taxonomy definitions") {
  EpisodeRecord r = base_record();
  r.success = false;
  r.ever_saw_goal = false;
  r.ever_detected_goal = false;
  r.false_goal_detection_acted = false;
  r.stuck = false;

  SUBCASE("wandering without seeing the goal is an exploration error") {
    CHECK(classify_error(r) == ErrorClass::ExplorationError);
  }
  SUBCASE("saw but never detected: detection error") {
    r.ever_saw_goal = true;
    CHECK(classify_error(r) == ErrorClass::DetectionError);
  }
  SUBCASE("acted on a false detection: detection error") {
    r.false_goal_detection_acted = true;
    CHECK(classify_error(r) == ErrorClass::DetectionError);
  }
  SUBCASE("true detection but failed: planning error") {
    r.ever_detected_goal = true;
    r.ever_saw_goal = true;
    CHECK(classify_error(r) == ErrorClass::PlanningError);
  }
  SUBCASE("stuck without detection: planning error") {
    r.stuck = true;
    CHECK(classify_error(r) == ErrorClass::PlanningError);
  }
  SUBCASE("planning precedence over detection in overlap") {
    r.ever_detected_goal = true;
    r.false_goal_detection_acted = true;
    CHECK(classify_error(r) == ErrorClass::PlanningError);
  }
  SUBCASE("success short-circuits everything") {
    r.success = true;
    r.stuck = true;
    r.false_goal_detection_acted = true;
    CHECK(classify_error(r) == ErrorClass::Success);
  }
}

TEST_CASE("detect_stuck: 400-step window within one meter") {
  std::vector<Point> poses;
  SUBCASE("short histories are never stuck") {
    for (int i = 0; i < 100; ++i) poses.push_back({0.0, 0.0});
    CHECK_FALSE(detect_stuck(poses));
  }
  SUBCASE("long stationary run is stuck") {
    for (int i = 0; i < 420; ++i) poses.push_back({5.0, 5.0});
    CHECK(detect_stuck(poses));
  }
  SUBCASE("tight oscillation is stuck") {
    for (int i = 0; i < 450; ++i) poses.push_back({5.0 + 0.3 * (i % 2), 5.0});
    CHECK(detect_stuck(poses));
  }
  SUBCASE("steady progress is not stuck") {
    for (int i = 0; i < 800; ++i) poses.push_back({i * 0.01, 0.0});
    CHECK_FALSE(detect_stuck(poses));
  }
  SUBCASE("stuck window after initial progress") {
    for (int i = 0; i < 100; ++i) poses.push_back({i * 0.25, 0.0});
    for (int i = 0; i < 410; ++i) poses.push_back({25.0, 0.0});
    CHECK(detect_stuck(poses));
  }
}

TEST_CASE("EpisodeRecord JSONL round-trip") {
  EpisodeRecord r = base_record();
  r.world_id = 42;
  r.episode_index = 7;
  r.chosen_frontiers.push_back({10, {1.25, 2.5}, 3.5, 0.125, 0.001});
  r.stop_reason = "goal_reached";
  r.actions = 55;
  const std::string line = r.to_json_line();
  const EpisodeRecord back = EpisodeRecord::from_json_line(line);
  CHECK(back.to_json_line() == line);
  CHECK(back.world_id == 42);
  CHECK(back.goal == "toilet");
  CHECK(back.chosen_frontiers.size() == 1);
  CHECK(back.chosen_frontiers[0].goal_distance == doctest::Approx(3.5));
}
