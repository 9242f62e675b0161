#include "escnav/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "escnav/map_export.hpp"
#include "json.hpp"

namespace escnav {

using nlohmann::json;

namespace {

json noise_to_json(const NoiseModel& n) {
  json confusion = json::array();
  for (const auto& [from, swap] : n.confusion)
    confusion.push_back({{"from", from}, {"to", swap.first}, {"p", swap.second}});
  return {{"false_negative_rate", n.false_negative_rate},
          {"false_positive_rate_per_step", n.false_positive_rate_per_step},
          {"confidence_true", {n.confidence_true_lo, n.confidence_true_hi}},
          {"confidence_false", {n.confidence_false_lo, n.confidence_false_hi}},
          {"confusion", confusion},
          {"room_detection_range", n.room_detection_range}};
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel n;
  n.false_negative_rate = j.at("false_negative_rate").get<double>();
  n.false_positive_rate_per_step = j.at("false_positive_rate_per_step").get<double>();
  n.confidence_true_lo = j.at("confidence_true")[0].get<double>();
  n.confidence_true_hi = j.at("confidence_true")[1].get<double>();
  n.confidence_false_lo = j.at("confidence_false")[0].get<double>();
  n.confidence_false_hi = j.at("confidence_false")[1].get<double>();
  for (const auto& c : j.at("confusion"))
    n.confusion.push_back({c.at("from").get<std::string>(),
                           {c.at("to").get<std::string>(), c.at("p").get<double>()}});
  n.room_detection_range = j.at("room_detection_range").get<double>();
  return n;
}

json policy_to_json(const PolicyConfig& p) {
  return {{"mode", p.mode == PolicyMode::ESC ? "ESC" : "GoW"},
          {"solver", p.solver == SolverChoice::OneHot ? "one-hot" : "continuous"},
          {"use_object", p.use_object},
          {"use_room", p.use_room},
          {"d_f", p.frontier_min_dist},
          {"d_o", p.near_object_radius},
          {"d_r", p.near_room_radius},
          {"w_obj", p.w_obj},
          {"w_obj_neg", p.w_obj_neg},
          {"w_room", p.w_room},
          {"w_room_neg", p.w_room_neg},
          {"w_dist", p.w_dist},
          {"p", p.exponent},
          {"d_s", p.success_dist},
          {"max_steps", p.max_steps},
          {"use_gps", p.use_gps}};
}

PolicyConfig policy_from_json(const json& j) {
  PolicyConfig p;
  p.mode = j.at("mode").get<std::string>() == "GoW" ? PolicyMode::GoW : PolicyMode::ESC;
  p.solver = j.at("solver").get<std::string>() == "continuous" ? SolverChoice::Continuous
                                                               : SolverChoice::OneHot;
  p.use_object = j.at("use_object").get<bool>();
  p.use_room = j.at("use_room").get<bool>();
  p.frontier_min_dist = j.at("d_f").get<double>();
  p.near_object_radius = j.at("d_o").get<double>();
  p.near_room_radius = j.at("d_r").get<double>();
  p.w_obj = j.at("w_obj").get<double>();
  p.w_obj_neg = j.at("w_obj_neg").get<double>();
  p.w_room = j.at("w_room").get<double>();
  p.w_room_neg = j.at("w_room_neg").get<double>();
  p.w_dist = j.at("w_dist").get<double>();
  p.exponent = j.at("p").get<int>();
  p.success_dist = j.at("d_s").get<double>();
  p.max_steps = j.at("max_steps").get<int>();
  p.use_gps = j.at("use_gps").get<bool>();
  return p;
}

json worldgen_to_json(const WorldGenConfig& w) {
  return {{"width", w.width},
          {"height", w.height},
          {"resolution", w.resolution},
          {"min_rooms", w.min_rooms},
          {"max_rooms", w.max_rooms},
          {"room_labels", w.room_labels},
          {"placement_priors", w.placement_priors},
          {"object_counts", w.object_counts},
          {"extra_door_prob", w.extra_door_prob}};
}

WorldGenConfig worldgen_from_json(const json& j) {
  WorldGenConfig w;
  w.width = j.at("width").get<int>();
  w.height = j.at("height").get<int>();
  w.resolution = j.at("resolution").get<double>();
  w.min_rooms = j.at("min_rooms").get<int>();
  w.max_rooms = j.at("max_rooms").get<int>();
  w.room_labels = j.at("room_labels").get<std::vector<std::string>>();
  w.placement_priors =
      j.at("placement_priors").get<std::map<std::string, std::map<std::string, double>>>();
  w.object_counts = j.at("object_counts").get<std::map<std::string, int>>();
  w.extra_door_prob = j.at("extra_door_prob").get<double>();
  return w;
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["world_file"] = world_file;
  j["world_gen"] = worldgen_to_json(world_gen);
  j["num_worlds"] = num_worlds;
  j["episodes_per_world"] = episodes_per_world;
  j["seed"] = seed;
  j["vocabulary"] = json::parse(vocab.to_json());
  j["score_table"] = score_table_path;
  j["use_llm"] = use_llm;
  j["llm"] = {{"base_url", llm.base_url},
              {"model", llm.model},
              {"token_env", llm.token_env},
              {"timeout_seconds", llm.timeout_seconds},
              {"cache_path", llm.cache_path},
              {"minmax_normalize", llm.minmax_normalize}};
  j["policy"] = policy_to_json(policy);
  j["noise"] = noise_to_json(noise);
  j["output_dir"] = output_dir;
  j["parallelism"] = parallelism;
  j["write_trace"] = write_trace;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunConfig cfg;
  if (j.contains("world_file")) cfg.world_file = j.at("world_file").get<std::string>();
  if (j.contains("world_gen")) cfg.world_gen = worldgen_from_json(j.at("world_gen"));
  if (j.contains("num_worlds")) cfg.num_worlds = j.at("num_worlds").get<int>();
  if (j.contains("episodes_per_world"))
    cfg.episodes_per_world = j.at("episodes_per_world").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("vocabulary")) cfg.vocab = Vocabulary::from_json(j.at("vocabulary").dump());
  if (j.contains("score_table")) cfg.score_table_path = j.at("score_table").get<std::string>();
  if (j.contains("use_llm")) cfg.use_llm = j.at("use_llm").get<bool>();
  if (j.contains("llm")) {
    const json& l = j.at("llm");
    if (l.contains("base_url")) cfg.llm.base_url = l.at("base_url").get<std::string>();
    if (l.contains("model")) cfg.llm.model = l.at("model").get<std::string>();
    if (l.contains("token_env")) cfg.llm.token_env = l.at("token_env").get<std::string>();
    if (l.contains("timeout_seconds"))
      cfg.llm.timeout_seconds = l.at("timeout_seconds").get<double>();
    if (l.contains("cache_path")) cfg.llm.cache_path = l.at("cache_path").get<std::string>();
    if (l.contains("minmax_normalize"))
      cfg.llm.minmax_normalize = l.at("minmax_normalize").get<bool>();
  }
  if (j.contains("policy")) cfg.policy = policy_from_json(j.at("policy"));
  if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("parallelism")) cfg.parallelism = j.at("parallelism").get<int>();
  if (j.contains("write_trace")) cfg.write_trace = j.at("write_trace").get<bool>();
  return cfg;
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg) {
  if (cfg.use_llm && !cfg.score_table_path.empty())
    throw std::invalid_argument("config: exactly one score source (table or llm), got both");
  if (cfg.use_llm) return std::make_unique<LlmScorer>(cfg.llm);
  if (cfg.score_table_path.empty())
    return std::make_unique<TableScorer>(ScoreTable::builtin_defaults());
  return std::make_unique<TableScorer>(ScoreTable::load_file(cfg.score_table_path));
}

EpisodeRunResult run_episode(const GridWorld& world, const Episode& episode,
                             const Vocabulary& vocab, Scorer& scorer,
                             const PolicyConfig& policy, const NoiseModel& noise,
                             uint64_t rng_seed, bool want_trace,
                             const std::function<void(const SelectionEvent&)>& observer) {
  EpisodeRunResult result;
  Rng rng(rng_seed);
  Agent agent(episode.goal, vocab, policy, scorer, world.width(), world.height(),
              world.resolution(), episode.start_pose);
  if (observer) agent.set_selection_observer(observer);

  // Goal-instance lookup for truth accounting.
  auto goal_instance = [&](int id) {
    for (const auto& o : world.objects())
      if (o.id == id) return o.category == episode.goal;
    return false;
  };
  std::vector<Cell> goal_cells;
  for (const auto* o : world.instances_of(episode.goal)) goal_cells.push_back(o->position);

  EpisodeRecord& rec = result.record;
  rec.world_id = episode.world_id;
  rec.goal = episode.goal;
  rec.shortest_path = episode.shortest_geodesic;
  rec.initial_distance = episode.shortest_geodesic;

  Pose pose = episode.start_pose;
  std::vector<Point> true_path{pose.position()};

  for (int step_idx = 0; step_idx < policy.max_steps; ++step_idx) {
    const DepthScan scan = render_depth(world, pose);
    const std::vector<VisibleInstance> visible = visible_instances(world, pose);
    for (const auto& v : visible)
      if (v.instance->category == episode.goal) rec.ever_saw_goal = true;
    std::vector<Detection> detections =
        detect(visible, world.room_at(point_to_cell(pose.position(), world.resolution())),
               vocab, noise, rng);
    for (const auto& d : detections)
      if (d.kind == DetectionKind::Object && d.label == episode.goal && d.source_id >= 0 &&
          goal_instance(d.source_id))
        rec.ever_detected_goal = true;

    const auto t0 = std::chrono::steady_clock::now();
    const size_t choices_before = agent.frontier_choices().size();
    const Action action = agent.decide(pose, detections, scan);
    result.decide_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (want_trace) {
      StepTraceRow row;
      row.step = step_idx;
      row.pose = pose;
      row.action = action;
      if (agent.frontier_choices().size() > choices_before) {
        row.chosen_frontier = agent.frontier_choices().back().centroid;
        row.solver_energy = agent.frontier_choices().back().energy;
      }
      result.trace.push_back(row);
    }

    rec.actions += 1;
    if (action == Action::Stop) break;
    const StepResult sr = step(world, pose, action);
    if (action == Action::MoveForward && !sr.collided) rec.path_length += kStepMeters;
    pose = sr.pose;
    true_path.push_back(pose.position());
  }

  rec.success = check_success(world, pose, episode.goal, policy.success_dist);
  rec.final_distance =
      geodesic_distance(world, point_to_cell(pose.position(), world.resolution()), goal_cells);
  rec.stuck = detect_stuck(true_path);
  for (const auto& [trigger_step, det] : agent.goal_triggers()) {
    if (det.source_id < 0 || !goal_instance(det.source_id))
      rec.false_goal_detection_acted = true;
  }
  switch (agent.stop_reason()) {
    case StopReason::GoalReached: rec.stop_reason = "goal_reached"; break;
    case StopReason::ExplorationExhausted: rec.stop_reason = "exploration_exhausted"; break;
    case StopReason::StepLimit: rec.stop_reason = "step_limit"; break;
    case StopReason::None: rec.stop_reason = "step_limit"; break;
  }

  // Distance from each chosen frontier to the nearest goal instance.
  const std::vector<double> goal_field =
      geodesic_field([&](const Cell& c) { return !world.occupied(c); }, world.width(),
                     world.height(), world.resolution(), goal_cells);
  for (const FrontierChoice& choice : agent.frontier_choices()) {
    const Cell c = point_to_cell(choice.centroid, world.resolution());
    double d = std::numeric_limits<double>::infinity();
    if (world.in_bounds(c)) d = goal_field[static_cast<size_t>(c.y) * world.width() + c.x];
    if (!std::isfinite(d)) {
      // Centroid of a concave frontier may sit on a wall; probe neighbors.
      for (int dy = -1; dy <= 1 && !std::isfinite(d); ++dy)
        for (int dx = -1; dx <= 1 && !std::isfinite(d); ++dx) {
          const Cell nc{c.x + dx, c.y + dy};
          if (world.in_bounds(nc))
            d = std::min(d, goal_field[static_cast<size_t>(nc.y) * world.width() + nc.x]);
        }
    }
    rec.chosen_frontiers.push_back({choice.step, choice.centroid, d, choice.energy,
                                    choice.solve_seconds});
    result.solve_seconds.push_back(choice.solve_seconds);
  }
  return result;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json trace_row_json(const StepTraceRow& row, const PolicyConfig& policy) {
  json j = {{"step", row.step},
            {"pose", {{"x", row.pose.x}, {"y", row.pose.y}, {"heading", row.pose.heading}}},
            {"action", action_name(row.action)},
            {"mode", policy.mode == PolicyMode::ESC ? "ESC" : "GoW"}};
  if (row.chosen_frontier)
    j["chosen_frontier"] = {{"x", row.chosen_frontier->x}, {"y", row.chosen_frontier->y}};
  else
    j["chosen_frontier"] = nullptr;
  if (row.solver_energy)
    j["solver_energy"] = *row.solver_energy;
  else
    j["solver_energy"] = nullptr;
  return j;
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& cfg) {
  // Worlds and episodes.
  std::vector<GridWorld> worlds;
  if (!cfg.world_file.empty()) {
    worlds.push_back(GridWorld::from_json(read_file(cfg.world_file)));
  } else {
    if (cfg.world_gen.room_labels.empty())
      throw std::invalid_argument("config: world_gen.room_labels is empty and no world_file set");
    for (int i = 0; i < cfg.num_worlds; ++i)
      worlds.push_back(generate_world(cfg.world_gen, Rng::derive(cfg.seed, 1000 + i)));
  }

  struct Job {
    const GridWorld* world;
    Episode episode;
  };
  std::vector<Job> jobs;
  for (size_t w = 0; w < worlds.size(); ++w) {
    const EpisodeBatch batch = make_episodes(worlds[w], cfg.vocab.goal_objects,
                                             cfg.episodes_per_world, Rng::derive(cfg.seed, 2000 + w));
    for (const Episode& ep : batch.episodes) jobs.push_back({&worlds[w], ep});
  }

  std::unique_ptr<Scorer> scorer = make_scorer(cfg);

  std::vector<EpisodeRunResult> results(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      results[i] = run_episode(*jobs[i].world, jobs[i].episode, cfg.vocab, *scorer, cfg.policy,
                               cfg.noise, Rng::derive(cfg.seed, 3000 + i), cfg.write_trace);
      results[i].record.episode_index = static_cast<int>(i);
    }
  };
  const int threads = std::max(1, cfg.parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkResult out;
  for (auto& r : results) out.records.push_back(r.record);

  // Records are written before the metrics stage so a zero-episode config
  // still leaves an (empty) JSONL behind its explicit rejection.
  namespace fs = std::filesystem;
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    std::ostringstream records;
    for (const auto& r : out.records) records << r.to_json_line() << "\n";
    out.records_path = (fs::path(cfg.output_dir) / "records.jsonl").string();
    write_file(out.records_path, records.str());
  }
  out.summary = compute_metrics(out.records);  // throws on zero episodes

  if (!cfg.output_dir.empty()) {
    out.summary_path = (fs::path(cfg.output_dir) / "summary.json").string();
    write_file(out.summary_path, out.summary.to_json() + "\n");
    // Wall times go to a sidecar so the records stay byte-reproducible.
    std::ostringstream timings;
    for (size_t i = 0; i < results.size(); ++i) {
      json t = {{"episode", i},
                {"decide_seconds", results[i].decide_seconds},
                {"solve_seconds", results[i].solve_seconds}};
      timings << t.dump() << "\n";
    }
    write_file((fs::path(cfg.output_dir) / "timings.jsonl").string(), timings.str());
    write_file((fs::path(cfg.output_dir) / "config.json").string(), cfg.to_json() + "\n");

    if (cfg.write_trace) {
      for (size_t i = 0; i < results.size(); ++i) {
        std::ostringstream trace;
        const json meta = {{"meta",
                            {{"world_id", jobs[i].episode.world_id},
                             {"episode", i},
                             {"goal", jobs[i].episode.goal},
                             {"rng_seed", Rng::derive(cfg.seed, 3000 + i)},
                             {"noise", noise_to_json(cfg.noise)},
                             {"vocabulary", json::parse(cfg.vocab.to_json())}}}};
        trace << meta.dump() << "\n";
        for (const auto& row : results[i].trace)
          trace << trace_row_json(row, cfg.policy).dump() << "\n";
        write_file((fs::path(cfg.output_dir) / ("trace_ep" + std::to_string(i) + ".jsonl")).string(),
                   trace.str());
      }
    }
  }
  return out;
}

CompareResult run_compare(const RunConfig& base, const PolicyConfig& policy_a,
                          const PolicyConfig& policy_b) {
  namespace fs = std::filesystem;
  CompareResult out;
  RunConfig a = base;
  a.policy = policy_a;
  if (!base.output_dir.empty()) a.output_dir = (fs::path(base.output_dir) / "a").string();
  out.a = run_benchmark(a);
  RunConfig b = base;
  b.policy = policy_b;
  if (!base.output_dir.empty()) b.output_dir = (fs::path(base.output_dir) / "b").string();
  out.b = run_benchmark(b);
  return out;
}

std::pair<std::string, std::string> export_map(const std::string& trace_path,
                                               const GridWorld& world, int step,
                                               const std::string& out_prefix) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open trace: " + trace_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace: " + trace_path);
  const json meta_line = json::parse(line);
  const json& meta = meta_line.at("meta");
  const NoiseModel noise = noise_from_json(meta.at("noise"));
  const Vocabulary vocab = Vocabulary::from_json(meta.at("vocabulary").dump());
  const std::string goal = meta.at("goal").get<std::string>();
  Rng rng(meta.at("rng_seed").get<uint64_t>());

  struct Row {
    Pose pose;
    std::optional<Point> chosen;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Row row;
    row.pose = {j.at("pose").at("x").get<double>(), j.at("pose").at("y").get<double>(),
                j.at("pose").at("heading").get<int>()};
    if (!j.at("chosen_frontier").is_null())
      row.chosen = Point{j.at("chosen_frontier").at("x").get<double>(),
                         j.at("chosen_frontier").at("y").get<double>()};
    rows.push_back(row);
  }
  if (step < 0 || step >= static_cast<int>(rows.size()))
    throw std::out_of_range("trace " + trace_path + " covers steps 0.." +
                            std::to_string(rows.size() - 1) + ", requested " +
                            std::to_string(step));

  // Replay the deterministic pipeline up to `step`.
  NavMap nav(world.width(), world.height(), world.resolution());
  SemanticMap sem(world.width(), world.height(), world.resolution());
  OverlaySpec spec;
  std::optional<Point> last_chosen;
  for (int i = 0; i <= step; ++i) {
    const Pose& pose = rows[i].pose;
    integrate_scan(nav, pose, render_depth(world, pose));
    const auto detections = detect(
        visible_instances(world, pose),
        world.room_at(point_to_cell(pose.position(), world.resolution())), vocab, noise, rng);
    for (const auto& det : detections) {
      if (det.range > kSensorRange) continue;
      project_detection(sem, pose, det, &nav);
    }
    if (rows[i].chosen) last_chosen = rows[i].chosen;
    spec.path.push_back(pose.position());
  }

  const std::vector<Frontier> frontiers = extract_frontiers(nav);
  spec.nav = &nav;
  spec.sem = &sem;
  spec.frontiers = &frontiers;
  spec.agent = rows[step].pose;
  spec.chosen_frontier = last_chosen;
  for (const auto* o : world.instances_of(goal))
    spec.goal_markers.push_back(cell_center(o->position, world.resolution()));

  const std::string pgm_path = out_prefix + ".pgm";
  const std::string ppm_path = out_prefix + ".ppm";
  write_file(pgm_path, to_pgm(nav));
  write_file(ppm_path, to_ppm(spec));
  return {pgm_path, ppm_path};
}

}  // namespace escnav
