#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "escnav/commonsense.hpp"

namespace escnav {

struct LlmEndpointConfig {
  std::string base_url;           // e.g. http://localhost:8080
  std::string model;
  std::string token_env = "ESCNAV_LLM_TOKEN";  // env var holding the auth token
  double timeout_seconds = 30.0;
  std::string cache_path;         // empty = in-memory only
  // Generative scores are used directly (clamped); min-max is the alternate
  // normalization for models that answer with unbounded scores.
  bool minmax_normalize = false;
  // Alternate question templates; {goal} and {candidates} are substituted.
  std::string object_prompt =
      "Among {candidates}, can you give the scores of likelihood to find a {goal} nearby? "
      "Answer one per line as 'name: score' with scores between 0 and 1.";
  std::string room_prompt =
      "Among {candidates}, can you give the scores of likelihood to find a {goal} inside? "
      "Answer one per line as 'name: score' with scores between 0 and 1.";
};

// Parses "candidate: number" lines; numbers above 1 are treated as percent.
// Candidates missing from the reply fall back to the neutral 0.5.
std::map<std::string, double> parse_score_reply(const std::string& reply,
                                                const std::vector<std::string>& candidates);

std::string render_prompt(const std::string& tmpl, const std::string& goal,
                          const std::vector<std::string>& candidates);

// One POST to {base_url}/v1/chat/completions. Throws on transport errors
// (message includes the endpoint identity) and on unparseable replies
// (message includes the raw text). A warm cache short-circuits the network.
class LlmClient {
 public:
  explicit LlmClient(LlmEndpointConfig cfg);
  ~LlmClient();

  std::map<std::string, double> fetch_scores(const std::string& goal,
                                             const std::vector<std::string>& candidates,
                                             ScoreLevel level);

  // Raw reply for a request, from cache or network.
  std::string complete(const std::string& prompt);

  const LlmEndpointConfig& config() const { return cfg_; }
  size_t network_calls() const { return network_calls_; }

 private:
  void load_cache();
  void save_cache() const;

  LlmEndpointConfig cfg_;
  std::map<std::string, std::string> cache_;  // request hash -> raw reply
  size_t network_calls_ = 0;
};

class LlmScorer : public Scorer {
 public:
  explicit LlmScorer(LlmEndpointConfig cfg) : client_(std::move(cfg)) {}

  LlmClient& client() { return client_; }

 protected:
  std::map<std::string, double> compute(const std::string& goal,
                                        const std::vector<std::string>& candidates,
                                        ScoreLevel level) override;

 private:
  LlmClient client_;
};

}  // namespace escnav
