#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace escnav {

enum class ScoreLevel { Object, Room };

// Neutral default for candidates with no entry; it pulls the positive and
// negative co-occurrence rules equally.
inline constexpr double kNeutralScore = 0.5;

// Per-goal co-occurrence scores S(G|o), S(G|r) in [0,1].
struct ScoreTable {
  struct GoalScores {
    std::map<std::string, double> objects;
    std::map<std::string, double> rooms;
  };
  std::map<std::string, GoalScores> goals;

  std::string to_json() const;
  static ScoreTable from_json(const std::string& text);
  static ScoreTable load_file(const std::string& path);

  // Obvious indoor priors for the default vocabulary; fixture data for the
  // offline benchmark suite.
  static ScoreTable builtin_defaults();
};

// Min-max normalization to [0,1]; degenerate inputs map to 0.5.
std::map<std::string, double> normalize_scores(const std::map<std::string, double>& raw);

class Scorer {
 public:
  virtual ~Scorer() = default;

  // Complete map over candidates, all values in [0,1]. Results are cached
  // per (goal, candidate set, level).
  std::map<std::string, double> score_candidates(const std::string& goal,
                                                 const std::vector<std::string>& candidates,
                                                 ScoreLevel level);

 protected:
  virtual std::map<std::string, double> compute(const std::string& goal,
                                                const std::vector<std::string>& candidates,
                                                ScoreLevel level) = 0;

 private:
  std::mutex mutex_;
  std::map<std::string, std::map<std::string, double>> cache_;
};

class TableScorer : public Scorer {
 public:
  explicit TableScorer(ScoreTable table) : table_(std::move(table)) {}

 protected:
  std::map<std::string, double> compute(const std::string& goal,
                                        const std::vector<std::string>& candidates,
                                        ScoreLevel level) override;

 private:
  ScoreTable table_;
};

}  // namespace escnav
