#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "escnav/commonsense.hpp"
#include "escnav/llm_client.hpp"
#include "escnav/rng.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace escnav;
using nlohmann::json;

TEST_CASE("TableScorer: lookups, defaults, and missing goals") {
  ScoreTable table;
  table.goals["toilet"].rooms = {{"bathroom", 0.95}};
  TableScorer scorer(table);

  const auto scores = scorer.score_candidates("toilet", {"bathroom"}, ScoreLevel::Room);
  CHECK(scores.at("bathroom") == doctest::Approx(0.95));

  const auto with_default =
      scorer.score_candidates("toilet", {"bathroom", "gym"}, ScoreLevel::Room);
  CHECK(with_default.at("gym") == doctest::Approx(0.5));

  CHECK_THROWS_WITH_AS(scorer.score_candidates("banana", {"bathroom"}, ScoreLevel::Room),
                       doctest::Contains("banana"), std::runtime_error);
  CHECK_THROWS_AS(scorer.score_candidates("toilet", {}, ScoreLevel::Room),
                  std::invalid_argument);
}

TEST_CASE("normalize_scores: min-max with degenerate fallback") {
  const auto out = normalize_scores({{"a", 2.0}, {"b", 4.0}, {"c", 6.0}});
  CHECK(out.at("a") == doctest::Approx(0.0));
  CHECK(out.at("b") == doctest::Approx(0.5));
  CHECK(out.at("c") == doctest::Approx(1.0));

  const auto flat = normalize_scores({{"a", 3.0}, {"b", 3.0}});
  CHECK(flat.at("a") == doctest::Approx(0.5));
  CHECK(flat.at("b") == doctest::Approx(0.5));

  const auto fixed = normalize_scores({{"a", 0.0}, {"b", 0.25}, {"c", 1.0}});
  CHECK(fixed.at("a") == doctest::Approx(0.0));
  CHECK(fixed.at("b") == doctest::Approx(0.25));
  CHECK(fixed.at("c") == doctest::Approx(1.0));

  CHECK_THROWS_AS(normalize_scores({}), std::invalid_argument);
}

TEST_CASE("normalize_scores: order preserving on random inputs") {
  Rng rng = Rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, double> raw;
    const int n = 2 + static_cast<int>(rng.uniform_int(uint64_t{8}));
    for (int i = 0; i < n; ++i) raw["k" + std::to_string(i)] = rng.uniform(-10.0, 10.0);
    const auto out = normalize_scores(raw);
    for (const auto& [k1, v1] : raw)
      for (const auto& [k2, v2] : raw)
        if (v1 <= v2) CHECK(out.at(k1) <= out.at(k2) + 1e-12);
  }
}

TEST_CASE("parse_score_reply: lines, percents, bullets, defaults, failures") {
  const std::vector<std::string> candidates = {"bathroom", "kitchen", "gym"};

  auto scores = parse_score_reply("bathroom: 0.9\nkitchen: 0.1", candidates);
  CHECK(scores.at("bathroom") == doctest::Approx(0.9));
  CHECK(scores.at("kitchen") == doctest::Approx(0.1));
  CHECK(scores.at("gym") == doctest::Approx(0.5));  // omitted candidate

  scores = parse_score_reply("bathroom: 90\nkitchen: 10", candidates);
  CHECK(scores.at("bathroom") == doctest::Approx(0.9));
  CHECK(scores.at("kitchen") == doctest::Approx(0.1));

  scores = parse_score_reply("- Bathroom: 0.8\n* kitchen : 0.2\nnoise line", candidates);
  CHECK(scores.at("bathroom") == doctest::Approx(0.8));
  CHECK(scores.at("kitchen") == doctest::Approx(0.2));

  CHECK_THROWS_WITH_AS(parse_score_reply("no scores here at all", candidates),
                       doctest::Contains("no scores here"), std::runtime_error);
}

TEST_CASE("render_prompt substitutes goal and candidate list") {
  const std::string p = render_prompt("find {goal} among {candidates}?", "toilet",
                                      {"bathroom", "kitchen"});
  CHECK(p == "find toilet among bathroom, kitchen?");
}

TEST_CASE("builtin score table is complete and in range") {
  const ScoreTable t = ScoreTable::builtin_defaults();
  CHECK(t.goals.size() == 6);
  for (const auto& [goal, scores] : t.goals) {
    for (const auto& [k, v] : scores.rooms) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (const auto& [k, v] : scores.objects) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  // Strong priors the benchmark depends on.
  CHECK(t.goals.at("toilet").rooms.at("bathroom") > 0.9);
  CHECK(t.goals.at("toilet").rooms.at("kitchen") < 0.1);
}

namespace {

struct ScoreServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
  std::string last_body;
  std::string reply_content = "bathroom: 0.9\nkitchen: 0.1";
  std::string auth_header;

  ScoreServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      ++requests;
      last_body = req.body;
      auth_header = req.get_header_value("Authorization");
      const json message = {{"role", "assistant"}, {"content", reply_content}};
      json reply;
      reply["choices"] = json::array();
      reply["choices"].push_back({{"message", message}});
      res.set_content(reply.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~ScoreServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("LlmClient: request shape, reply parsing, caching") {
  ScoreServer srv;
  const std::string cache_file =
      (std::filesystem::temp_directory_path() / "escnav_test_cache.json").string();
  std::filesystem::remove(cache_file);

  LlmEndpointConfig cfg;
  cfg.base_url = srv.url();
  cfg.model = "test-model";
  cfg.cache_path = cache_file;
  cfg.token_env = "ESCNAV_TEST_TOKEN";
  setenv("ESCNAV_TEST_TOKEN", "sekrit", 1);

  {
    LlmClient client(cfg);
    const auto scores = client.fetch_scores("toilet", {"bathroom", "kitchen"}, ScoreLevel::Room);
    CHECK(scores.at("bathroom") == doctest::Approx(0.9));
    CHECK(scores.at("kitchen") == doctest::Approx(0.1));
    CHECK(srv.requests == 1);
    CHECK(srv.auth_header == "Bearer sekrit");

    const json body = json::parse(srv.last_body);
    CHECK(body.at("model") == "test-model");
    REQUIRE(body.at("messages").size() == 1);
    CHECK(body.at("messages")[0].at("role") == "user");
    const std::string content = body.at("messages")[0].at("content").get<std::string>();
    CHECK(content.find("toilet") != std::string::npos);
    CHECK(content.find("bathroom") != std::string::npos);

    // Identical request: served from cache, no network.
    client.fetch_scores("toilet", {"bathroom", "kitchen"}, ScoreLevel::Room);
    CHECK(srv.requests == 1);
  }

  // A fresh client with the same cache file stays offline too.
  {
    LlmClient client(cfg);
    const auto scores = client.fetch_scores("toilet", {"bathroom", "kitchen"}, ScoreLevel::Room);
    CHECK(scores.at("bathroom") == doctest::Approx(0.9));
    CHECK(srv.requests == 1);
  }
  std::filesystem::remove(cache_file);
}

TEST_CASE("LlmScorer: clamps generative scores and caches per query") {
  ScoreServer srv;
  srv.reply_content = "bathroom: 3.5\nkitchen: 0.4";  // >1 treated as percent? 3.5 -> 0.035

  LlmEndpointConfig cfg;
  cfg.base_url = srv.url();
  cfg.model = "m";
  LlmScorer scorer(cfg);
  const auto scores = scorer.score_candidates("toilet", {"bathroom", "kitchen"}, ScoreLevel::Room);
  CHECK(scores.at("bathroom") == doctest::Approx(0.035));
  CHECK(scores.at("kitchen") == doctest::Approx(0.4));
  CHECK(srv.requests == 1);
  scorer.score_candidates("toilet", {"bathroom", "kitchen"}, ScoreLevel::Room);
  CHECK(srv.requests == 1);
}

TEST_CASE("LlmClient: transport errors carry the endpoint identity") {
  LlmEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
  cfg.model = "m";
  cfg.timeout_seconds = 1.0;
  LlmClient client(cfg);
  CHECK_THROWS_WITH_AS(client.fetch_scores("toilet", {"bathroom"}, ScoreLevel::Room),
                       doctest::Contains("127.0.0.1:1"), std::runtime_error);
}

TEST_CASE("LlmClient: unparseable replies surface the raw text") {
  ScoreServer srv;
  srv.reply_content = "I cannot help with that.";
  LlmEndpointConfig cfg;
  cfg.base_url = srv.url();
  cfg.model = "m";
  LlmClient client(cfg);
  CHECK_THROWS_WITH_AS(client.fetch_scores("toilet", {"bathroom"}, ScoreLevel::Room),
                       doctest::Contains("I cannot help"), std::runtime_error);
}

TEST_CASE("score table file round-trip") {
  const ScoreTable t = ScoreTable::builtin_defaults();
  const ScoreTable back = ScoreTable::from_json(t.to_json());
  CHECK(back.to_json() == t.to_json());
  CHECK_THROWS_AS(ScoreTable::from_json(R"({"toilet": {"rooms": {"bathroom": 1.5}}})"),
                  std::runtime_error);
}
