// escnav command line: world/episode generation, benchmark runs, ESC-vs-GoW
// comparison, map export, and LLM score cache warming.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "escnav/harness.hpp"
#include "escnav/map_export.hpp"
#include "json.hpp"

using namespace escnav;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

WorldGenConfig default_world_gen() {
  WorldGenConfig gen;
  gen.width = 52;
  gen.height = 52;
  gen.min_rooms = 5;
  gen.max_rooms = 8;
  const Vocabulary vocab = Vocabulary::defaults();
  gen.room_labels = vocab.rooms;
  gen.object_counts = {{"toilet", 1}, {"bed", 1},   {"sofa", 1},  {"tv_monitor", 1},
                       {"chair", 2},  {"plant", 1}, {"sink", 1},  {"table", 1},
                       {"bathtub", 1}, {"cushion", 1}};
  gen.placement_priors = {
      {"toilet", {{"bathroom", 0.95}, {"laundry room", 0.05}}},
      {"bathtub", {{"bathroom", 1.0}}},
      {"sink", {{"bathroom", 0.5}, {"kitchen", 0.5}}},
      {"bed", {{"bedroom", 0.95}, {"living room", 0.05}}},
      {"sofa", {{"living room", 0.8}, {"lounge", 0.2}}},
      {"cushion", {{"living room", 0.5}, {"bedroom", 0.4}, {"lounge", 0.1}}},
      {"tv_monitor", {{"living room", 0.7}, {"bedroom", 0.2}, {"lounge", 0.1}}},
      {"chair", {{"dining room", 0.5}, {"office room", 0.3}, {"kitchen", 0.2}}},
      {"table", {{"dining room", 0.6}, {"kitchen", 0.3}, {"office room", 0.1}}},
      {"plant", {{"living room", 0.4}, {"dining room", 0.3}, {"office room", 0.3}}}};
  return gen;
}

struct PolicyFlags {
  std::string mode = "ESC";
  std::string solver = "one-hot";
  bool no_object = false;
  bool no_room = false;
  double d_f = -1, d_o = -1, d_r = -1, d_s = -1, w_dist = -1;
  int max_steps = -1;

  PolicyConfig build() const {
    PolicyConfig cfg = PolicyConfig::make(mode == "GoW" ? PolicyMode::GoW : PolicyMode::ESC,
                                          !no_object, !no_room);
    cfg.solver = solver == "continuous" ? SolverChoice::Continuous : SolverChoice::OneHot;
    if (d_f >= 0) cfg.frontier_min_dist = d_f;
    if (d_o >= 0) cfg.near_object_radius = d_o;
    if (d_r >= 0) cfg.near_room_radius = d_r;
    if (d_s >= 0) cfg.success_dist = d_s;
    if (w_dist >= 0) cfg.w_dist = w_dist;
    if (max_steps > 0) cfg.max_steps = max_steps;
    return cfg;
  }
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& flags) {
  cmd->add_option("--mode", flags.mode, "ESC or GoW")->check(CLI::IsMember({"ESC", "GoW"}));
  cmd->add_option("--solver", flags.solver, "one-hot or continuous")
      ->check(CLI::IsMember({"one-hot", "continuous"}));
  cmd->add_flag("--no-object", flags.no_object, "disable object-level reasoning");
  cmd->add_flag("--no-room", flags.no_room, "disable room-level reasoning");
  cmd->add_option("--d-f", flags.d_f, "frontier distance threshold (m)");
  cmd->add_option("--d-o", flags.d_o, "near-object radius (m)");
  cmd->add_option("--d-r", flags.d_r, "near-room radius (m)");
  cmd->add_option("--d-s", flags.d_s, "success distance (m)");
  cmd->add_option("--w-dist", flags.w_dist, "shortest-distance rule weight");
  cmd->add_option("--max-steps", flags.max_steps, "step budget per episode");
}

RunConfig load_run_config(const std::string& config_path) {
  RunConfig cfg;
  cfg.world_gen = default_world_gen();
  if (!config_path.empty()) cfg = RunConfig::from_json(read_file(config_path));
  return cfg;
}

void print_summary(const char* name, const MetricsSummary& s) {
  std::printf("%-12s SR %.3f  SPL %.3f  SoftSPL %.3f  FrontierDist %.2f m  "
              "errors expl/det/plan %.3f/%.3f/%.3f  (%d episodes)\n",
              name, s.sr, s.spl, s.softspl, s.frontier_dist, s.exploration_error_rate,
              s.detection_error_rate, s.planning_error_rate, s.episodes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"escnav: commonsense-guided frontier exploration benchmark"};
  app.require_subcommand(1);

  // gen-world
  auto* gen_world = app.add_subcommand("gen-world", "generate a world and write JSON");
  std::string gw_out = "world.json";
  uint64_t gw_seed = 7;
  int gw_width = 52, gw_height = 52, gw_min_rooms = 5, gw_max_rooms = 8;
  gen_world->add_option("-o,--out", gw_out, "output path");
  gen_world->add_option("--seed", gw_seed, "generation seed");
  gen_world->add_option("--width", gw_width, "grid width (cells)");
  gen_world->add_option("--height", gw_height, "grid height (cells)");
  gen_world->add_option("--min-rooms", gw_min_rooms);
  gen_world->add_option("--max-rooms", gw_max_rooms);

  // gen-episodes
  auto* gen_eps = app.add_subcommand("gen-episodes", "sample episodes for a world");
  std::string ge_world, ge_out = "episodes.json", ge_goals;
  int ge_n = 10;
  uint64_t ge_seed = 7;
  gen_eps->add_option("--world", ge_world, "world JSON path")->required();
  gen_eps->add_option("-o,--out", ge_out, "output path");
  gen_eps->add_option("-n", ge_n, "episode count");
  gen_eps->add_option("--seed", ge_seed);
  gen_eps->add_option("--goals", ge_goals, "comma-separated goal categories");

  // run
  auto* run = app.add_subcommand("run", "run a benchmark");
  std::string run_config, run_out = "out", run_world, run_scores;
  int run_worlds = -1, run_eps_per_world = -1, run_parallel = -1;
  uint64_t run_seed = UINT64_MAX;
  bool run_trace = false, run_oracle_detector = false;
  PolicyFlags run_policy;
  run->add_option("--config", run_config, "run config JSON (flags override)");
  run->add_option("-o,--out", run_out, "output directory");
  run->add_option("--world", run_world, "world JSON path (instead of generation)");
  run->add_option("--worlds", run_worlds, "number of generated worlds");
  run->add_option("--episodes-per-world", run_eps_per_world);
  run->add_option("--seed", run_seed);
  run->add_option("--scores", run_scores, "score table JSON path");
  run->add_option("--parallelism", run_parallel, "worker threads");
  run->add_flag("--trace", run_trace, "write per-step trace JSONL");
  run->add_flag("--oracle-detector", run_oracle_detector, "disable detector noise");
  add_policy_flags(run, run_policy);

  // compare
  auto* compare = app.add_subcommand("compare", "paired ESC vs GoW comparison");
  std::string cmp_config, cmp_out = "compare_out";
  int cmp_worlds = -1, cmp_eps_per_world = -1, cmp_parallel = -1;
  uint64_t cmp_seed = UINT64_MAX;
  bool cmp_oracle = false;
  compare->add_option("--config", cmp_config, "run config JSON");
  compare->add_option("-o,--out", cmp_out, "output directory");
  compare->add_option("--worlds", cmp_worlds);
  compare->add_option("--episodes-per-world", cmp_eps_per_world);
  compare->add_option("--seed", cmp_seed);
  compare->add_option("--parallelism", cmp_parallel);
  compare->add_flag("--oracle-detector", cmp_oracle, "disable detector noise");

  // export-map
  auto* export_cmd = app.add_subcommand("export-map", "render PGM/PPM from a trace");
  std::string ex_trace, ex_world, ex_prefix = "map";
  int ex_step = 0;
  export_cmd->add_option("--trace", ex_trace, "trace JSONL path")->required();
  export_cmd->add_option("--world", ex_world, "world JSON path")->required();
  export_cmd->add_option("--step", ex_step, "step to render");
  export_cmd->add_option("-o,--out", ex_prefix, "output prefix");

  // scores fetch
  auto* scores = app.add_subcommand("scores", "commonsense score utilities");
  auto* fetch = scores->add_subcommand("fetch", "warm the LLM score cache");
  std::string sf_url, sf_model = "gpt-3.5-turbo", sf_cache = "llm_cache.json", sf_goals;
  fetch->add_option("--url", sf_url, "endpoint base URL")->required();
  fetch->add_option("--model", sf_model);
  fetch->add_option("--cache", sf_cache, "cache file path");
  fetch->add_option("--goals", sf_goals, "comma-separated goals (default: vocabulary)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_world) {
      WorldGenConfig gen = default_world_gen();
      gen.width = gw_width;
      gen.height = gw_height;
      gen.min_rooms = gw_min_rooms;
      gen.max_rooms = gw_max_rooms;
      const GridWorld world = generate_world(gen, gw_seed);
      write_file(gw_out, world.to_json());
      std::printf("wrote %s (%dx%d, %zu rooms, %zu objects)\n", gw_out.c_str(), world.width(),
                  world.height(), world.rooms().size(), world.objects().size());
    } else if (*gen_eps) {
      const GridWorld world = GridWorld::from_json(read_file(ge_world));
      std::vector<std::string> goals;
      if (ge_goals.empty()) {
        goals = Vocabulary::defaults().goal_objects;
      } else {
        std::stringstream ss(ge_goals);
        std::string item;
        while (std::getline(ss, item, ',')) goals.push_back(item);
      }
      const EpisodeBatch batch = make_episodes(world, goals, ge_n, ge_seed);
      for (const auto& g : batch.skipped_goals)
        std::fprintf(stderr, "warning: goal '%s' unreachable in this world, skipped\n", g.c_str());
      write_file(ge_out, episodes_to_json(batch.episodes));
      std::printf("wrote %s (%zu episodes)\n", ge_out.c_str(), batch.episodes.size());
    } else if (*run) {
      RunConfig cfg = load_run_config(run_config);
      if (!run_world.empty()) cfg.world_file = run_world;
      if (run_worlds > 0) cfg.num_worlds = run_worlds;
      if (run_eps_per_world > 0) cfg.episodes_per_world = run_eps_per_world;
      if (run_seed != UINT64_MAX) cfg.seed = run_seed;
      if (!run_scores.empty()) cfg.score_table_path = run_scores;
      if (run_parallel > 0) cfg.parallelism = run_parallel;
      cfg.output_dir = run_out;
      cfg.write_trace = run_trace;
      if (run_oracle_detector) cfg.noise = NoiseModel::oracle();
      cfg.policy = run_policy.build();
      const BenchmarkResult result = run_benchmark(cfg);
      print_summary(cfg.policy.mode == PolicyMode::ESC ? "ESC" : "GoW", result.summary);
      std::printf("records: %s\nsummary: %s\n", result.records_path.c_str(),
                  result.summary_path.c_str());
    } else if (*compare) {
      RunConfig cfg = load_run_config(cmp_config);
      if (cmp_worlds > 0) cfg.num_worlds = cmp_worlds;
      if (cmp_eps_per_world > 0) cfg.episodes_per_world = cmp_eps_per_world;
      if (cmp_seed != UINT64_MAX) cfg.seed = cmp_seed;
      if (cmp_parallel > 0) cfg.parallelism = cmp_parallel;
      if (cmp_oracle) cfg.noise = NoiseModel::oracle();
      cfg.output_dir = cmp_out;
      const CompareResult result = run_compare(cfg, PolicyConfig::make(PolicyMode::ESC),
                                               PolicyConfig::make(PolicyMode::GoW));
      print_summary("ESC", result.a.summary);
      print_summary("GoW", result.b.summary);
      std::printf("SR delta %+.3f  FrontierDist delta %+.3f m\n",
                  result.a.summary.sr - result.b.summary.sr,
                  result.a.summary.frontier_dist - result.b.summary.frontier_dist);
    } else if (*export_cmd) {
      const GridWorld world = GridWorld::from_json(read_file(ex_world));
      const auto [pgm, ppm] = export_map(ex_trace, world, ex_step, ex_prefix);
      std::printf("wrote %s and %s\n", pgm.c_str(), ppm.c_str());
    } else if (*fetch) {
      LlmEndpointConfig llm;
      llm.base_url = sf_url;
      llm.model = sf_model;
      llm.cache_path = sf_cache;
      LlmClient client(llm);
      const Vocabulary vocab = Vocabulary::defaults();
      std::vector<std::string> goals;
      if (sf_goals.empty()) {
        goals = vocab.goal_objects;
      } else {
        std::stringstream ss(sf_goals);
        std::string item;
        while (std::getline(ss, item, ',')) goals.push_back(item);
      }
      for (const auto& goal : goals) {
        client.fetch_scores(goal, vocab.prompt_objects(), ScoreLevel::Object);
        client.fetch_scores(goal, vocab.rooms, ScoreLevel::Room);
        std::printf("cached scores for '%s'\n", goal.c_str());
      }
      std::printf("%zu network calls, cache at %s\n", client.network_calls(), sf_cache.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
