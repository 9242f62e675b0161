#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "escnav/perception.hpp"

using namespace escnav;

namespace {

std::vector<VisibleInstance> two_chairs(const std::vector<ObjectInstance>& pool) {
  return {{&pool[0], 1.5, 10.0}, {&pool[1], 2.5, -20.0}};
}

}  // namespace

TEST_CASE("build_prompt: deduplicated union joined with periods") {
  CHECK(build_prompt({"cabinet", "table"}, {"chair", "table"}) == "cabinet. table. chair.");
  CHECK(build_prompt({}, {"chair"}) == "chair.");
  CHECK(build_prompt({"a"}, {"a"}) == "a.");
  CHECK_THROWS_AS(build_prompt({}, {}), std::invalid_argument);
}

TEST_CASE("vocabulary: defaults and round-trip") {
  const Vocabulary v = Vocabulary::defaults();
  CHECK(v.rooms.size() == 9);
  CHECK(v.common_objects.size() == 21);
  const Vocabulary back = Vocabulary::from_json(v.to_json());
  CHECK(back.rooms == v.rooms);
  CHECK(back.common_objects == v.common_objects);
  CHECK(back.goal_objects == v.goal_objects);

  // The union keeps common objects first and drops goal duplicates.
  const auto prompt = v.prompt_objects();
  CHECK(prompt.size() == 21);  // all six goals already occur in the common list
}

TEST_CASE("detect: zero noise is an oracle detector") {
  const std::vector<ObjectInstance> pool = {{"chair", {5, 5}, 0}, {"chair", {8, 5}, 1}};
  Rng rng(3);
  const auto dets = detect(two_chairs(pool), "", Vocabulary::defaults(),
                           NoiseModel::oracle(), rng);
  REQUIRE(dets.size() == 2);
  for (const auto& d : dets) {
    CHECK(d.label == "chair");
    CHECK(d.kind == DetectionKind::Object);
    CHECK(d.confidence >= kDetectionThreshold);
    CHECK(d.confidence <= 1.0);
  }
  CHECK(dets[0].bearing == doctest::Approx(10.0));
  CHECK(dets[0].range == doctest::Approx(1.5));
  CHECK(dets[0].source_id == 0);
  CHECK(dets[1].source_id == 1);
}

TEST_CASE("detect: room detection accompanies the agent's room") {
  const std::vector<ObjectInstance> pool = {{"chair", {5, 5}, 0}, {"chair", {8, 5}, 1}};
  Rng rng(3);
  const auto dets = detect(two_chairs(pool), "kitchen", Vocabulary::defaults(),
                           NoiseModel::oracle(), rng);
  REQUIRE(dets.size() == 3);
  const auto& room = dets.back();
  CHECK(room.kind == DetectionKind::Room);
  CHECK(room.label == "kitchen");
  CHECK(room.angular_extent == doctest::Approx(kHfovDeg));
  CHECK(room.source_id == -1);
}

TEST_CASE("detect: full false-negative rate drops all objects") {
  const std::vector<ObjectInstance> pool = {{"chair", {5, 5}, 0}, {"chair", {8, 5}, 1}};
  NoiseModel noise = NoiseModel::oracle();
  noise.false_negative_rate = 1.0;
  Rng rng(3);
  const auto dets = detect(two_chairs(pool), "kitchen", Vocabulary::defaults(), noise, rng);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].kind == DetectionKind::Room);
}

TEST_CASE("detect: deterministic for a fixed rng state") {
  const std::vector<ObjectInstance> pool = {{"chair", {5, 5}, 0}, {"chair", {8, 5}, 1}};
  const NoiseModel noise = NoiseModel::benchmark_default();
  auto run = [&]() {
    Rng rng(42);
    return detect(two_chairs(pool), "kitchen", Vocabulary::defaults(), noise, rng);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].confidence == b[i].confidence);
    CHECK(a[i].bearing == b[i].bearing);
    CHECK(a[i].range == b[i].range);
  }
}

TEST_CASE("detect: emitted confidence and count bounds hold under any noise") {
  const std::vector<ObjectInstance> pool = {
      {"chair", {5, 5}, 0}, {"table", {8, 5}, 1}, {"sofa", {9, 9}, 2}};
  const std::vector<VisibleInstance> visible = {
      {&pool[0], 1.0, 0.0}, {&pool[1], 2.0, 15.0}, {&pool[2], 3.0, -30.0}};
  Rng rng(7);
  Rng meta(100);
  for (int trial = 0; trial < 200; ++trial) {
    NoiseModel noise;
    noise.false_negative_rate = meta.uniform();
    noise.false_positive_rate_per_step = meta.uniform();
    noise.confidence_true_lo = meta.uniform(0.61, 0.8);
    noise.confidence_true_hi = meta.uniform(noise.confidence_true_lo, 1.0);
    noise.confidence_false_lo = meta.uniform(0.3, 0.7);  // may fall below threshold
    noise.confidence_false_hi = meta.uniform(noise.confidence_false_lo, 0.9);
    const auto dets = detect(visible, "gym", Vocabulary::defaults(), noise, rng);
    CHECK(dets.size() <= visible.size() + 2);  // one false positive + one room
    for (const auto& d : dets) {
      CHECK(d.confidence >= kDetectionThreshold);
      CHECK(d.confidence <= 1.0);
    }
  }
}

TEST_CASE("detect: label confusion swaps with the configured probability") {
  const std::vector<ObjectInstance> pool = {{"chair", {5, 5}, 0}};
  const std::vector<VisibleInstance> visible = {{&pool[0], 1.0, 0.0}};
  NoiseModel noise = NoiseModel::oracle();
  noise.confusion = {{"chair", {"stool", 1.0}}};
  Rng rng(9);
  const auto dets = detect(visible, "", Vocabulary::defaults(), noise, rng);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].label == "stool");
  CHECK(dets[0].source_id == 0);
}
