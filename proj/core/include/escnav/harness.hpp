#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "escnav/commonsense.hpp"
#include "escnav/llm_client.hpp"
#include "escnav/metrics.hpp"
#include "escnav/policy.hpp"
#include "escnav/world.hpp"

namespace escnav {

struct RunConfig {
  // World source: a saved world file, or procedural generation (default).
  std::string world_file;
  WorldGenConfig world_gen;
  int num_worlds = 1;
  int episodes_per_world = 1;
  uint64_t seed = 0;

  Vocabulary vocab = Vocabulary::defaults();

  // Score source: a table file (empty = built-in defaults) or an endpoint.
  std::string score_table_path;
  bool use_llm = false;
  LlmEndpointConfig llm;

  PolicyConfig policy = PolicyConfig::make(PolicyMode::ESC);
  NoiseModel noise = NoiseModel::benchmark_default();

  std::string output_dir;  // empty = no files written
  int parallelism = 1;
  bool write_trace = false;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

struct StepTraceRow {
  int step = 0;
  Pose pose;
  Action action = Action::Stop;
  std::optional<Point> chosen_frontier;
  std::optional<double> solver_energy;
};

struct EpisodeRunResult {
  EpisodeRecord record;
  std::vector<StepTraceRow> trace;
  double decide_seconds = 0.0;             // total agent wall time
  std::vector<double> solve_seconds;       // one entry per frontier selection
};

// Runs one episode to Stop or the step limit. Deterministic in
// (world, episode, configs, rng_seed).
EpisodeRunResult run_episode(const GridWorld& world, const Episode& episode,
                             const Vocabulary& vocab, Scorer& scorer,
                             const PolicyConfig& policy, const NoiseModel& noise,
                             uint64_t rng_seed, bool want_trace = false,
                             const std::function<void(const SelectionEvent&)>& observer = {});

struct BenchmarkResult {
  std::vector<EpisodeRecord> records;
  MetricsSummary summary;
  std::string records_path;  // written files, empty when output_dir unset
  std::string summary_path;
};

// Generates or loads worlds and episodes, runs them (optionally in
// parallel; per-episode RNG streams keep results identical), writes
// records JSONL, a timing sidecar, and the summary JSON.
BenchmarkResult run_benchmark(const RunConfig& cfg);

struct CompareResult {
  BenchmarkResult a;
  BenchmarkResult b;
};

// Paired runs of two policies over the same worlds, episodes and noise seeds.
CompareResult run_compare(const RunConfig& base, const PolicyConfig& policy_a,
                          const PolicyConfig& policy_b);

// Rebuilds the maps at `step` by replaying the trace against the world and
// writes <out_prefix>.pgm / <out_prefix>.ppm.
std::pair<std::string, std::string> export_map(const std::string& trace_path,
                                               const GridWorld& world, int step,
                                               const std::string& out_prefix);

std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg);

}  // namespace escnav
