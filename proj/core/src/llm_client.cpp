#include "escnav/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace escnav {

using nlohmann::json;

namespace {

// FNV-1a; stable across runs so the on-disk cache stays valid.
std::string content_hash(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string render_prompt(const std::string& tmpl, const std::string& goal,
                          const std::vector<std::string>& candidates) {
  std::string joined;
  for (size_t i = 0; i < candidates.size(); ++i) {
    joined += candidates[i];
    if (i + 1 < candidates.size()) joined += ", ";
  }
  std::string out = tmpl;
  for (const auto& [key, value] :
       {std::pair<std::string, std::string>{"{goal}", goal}, {"{candidates}", joined}}) {
    size_t pos;
    while ((pos = out.find(key)) != std::string::npos) out.replace(pos, key.size(), value);
  }
  return out;
}

std::map<std::string, double> parse_score_reply(const std::string& reply,
                                                const std::vector<std::string>& candidates) {
  std::map<std::string, double> found;
  std::istringstream ss(reply);
  std::string line;
  bool any = false;
  while (std::getline(ss, line)) {
    const size_t colon = line.rfind(':');
    if (colon == std::string::npos) continue;
    std::string name = trim(line.substr(0, colon));
    // Tolerate "- name" / "* name" bullets.
    while (!name.empty() && (name.front() == '-' || name.front() == '*' || name.front() == ' '))
      name.erase(name.begin());
    const std::string value_text = trim(line.substr(colon + 1));
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str()) continue;
    for (const auto& c : candidates) {
      if (lower(c) == lower(name)) {
        found[c] = value > 1.0 ? value / 100.0 : value;
        any = true;
        break;
      }
    }
  }
  if (!any)
    throw std::runtime_error("unparseable score reply: \"" + reply + "\"");
  for (const auto& c : candidates)
    if (!found.count(c)) found[c] = kNeutralScore;
  return found;
}

LlmClient::LlmClient(LlmEndpointConfig cfg) : cfg_(std::move(cfg)) { load_cache(); }

LlmClient::~LlmClient() = default;

void LlmClient::load_cache() {
  if (cfg_.cache_path.empty()) return;
  std::ifstream in(cfg_.cache_path);
  if (!in) return;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.empty()) return;
  const json parsed = json::parse(text);
  for (const auto& [k, v] : parsed.items()) cache_[k] = v.get<std::string>();
}

void LlmClient::save_cache() const {
  if (cfg_.cache_path.empty()) return;
  json j = json::object();
  for (const auto& [k, v] : cache_) j[k] = v;
  std::ofstream out(cfg_.cache_path);
  out << j.dump(2);
}

std::string LlmClient::complete(const std::string& prompt) {
  const std::string key = content_hash(cfg_.model + "\x1f" + prompt);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  httplib::Client http(cfg_.base_url);
  http.set_connection_timeout(static_cast<int>(cfg_.timeout_seconds));
  http.set_read_timeout(static_cast<int>(cfg_.timeout_seconds));
  if (!cfg_.token_env.empty()) {
    const char* token = std::getenv(cfg_.token_env.c_str());
    if (token && *token) http.set_bearer_token_auth(token);
  }

  const json body = {{"model", cfg_.model},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  auto res = http.Post("/v1/chat/completions", body.dump(), "application/json");
  ++network_calls_;
  if (!res)
    throw std::runtime_error("LLM endpoint unreachable: " + cfg_.base_url + " (" +
                             httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    throw std::runtime_error("LLM endpoint " + cfg_.base_url + " returned HTTP " +
                             std::to_string(res->status));
  std::string reply;
  try {
    reply = json::parse(res->body).at("choices").at(0).at("message").at("content")
                .get<std::string>();
  } catch (const json::exception&) {
    throw std::runtime_error("malformed completion payload from " + cfg_.base_url + ": " +
                             res->body);
  }
  cache_[key] = reply;
  save_cache();
  return reply;
}

std::map<std::string, double> LlmClient::fetch_scores(const std::string& goal,
                                                      const std::vector<std::string>& candidates,
                                                      ScoreLevel level) {
  const std::string& tmpl =
      level == ScoreLevel::Object ? cfg_.object_prompt : cfg_.room_prompt;
  const std::string reply = complete(render_prompt(tmpl, goal, candidates));
  return parse_score_reply(reply, candidates);
}

std::map<std::string, double> LlmScorer::compute(const std::string& goal,
                                                 const std::vector<std::string>& candidates,
                                                 ScoreLevel level) {
  std::map<std::string, double> raw = client_.fetch_scores(goal, candidates, level);
  if (client_.config().minmax_normalize) return normalize_scores(raw);
  for (auto& [k, v] : raw) v = std::clamp(v, 0.0, 1.0);
  return raw;
}

}  // namespace escnav
