#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace escnav {

// Łukasiewicz relaxation of conjunction, disjunction, negation over [0,1].
double luk_and(double a, double b);
double luk_or(double a, double b);
double luk_neg(double a);

enum class LukOp { And, Or, Neg };

// Checked variant; throws std::invalid_argument on operands outside [0,1].
double luk_eval(LukOp op, double a, std::optional<double> b = std::nullopt);

enum class AtomKind { Observed, Target };

using AtomId = int;

struct Atom {
  std::string predicate;
  std::vector<std::string> args;
  double value = 0.0;  // fixed for Observed; ignored for Target
  AtomKind kind = AtomKind::Observed;
  // Solver tie-break metadata for target atoms: smaller wins.
  double tie_distance = 0.0;
  int tie_id = 0;
};

// Pattern term: an uppercase-tagged variable or a constant symbol.
struct Term {
  bool is_variable = false;
  std::string text;

  static Term var(std::string name) { return {true, std::move(name)}; }
  static Term constant(std::string symbol) { return {false, std::move(symbol)}; }
};

struct LiteralPattern {
  std::string predicate;
  std::vector<Term> args;
  bool negated = false;
};

// Weighted first-order rule: body conjunction implies head.
struct RuleTemplate {
  std::string name;
  double weight = 1.0;
  std::vector<LiteralPattern> body;
  LiteralPattern head;
  int exponent = 1;  // p in {1, 2}
};

struct BoundLiteral {
  AtomId atom = -1;
  bool negated = false;
};

struct GroundRule {
  int template_index = -1;
  std::vector<BoundLiteral> body;
  BoundLiteral head;
};

struct SumConstraint {
  std::vector<AtomId> atoms;  // target atoms summing to `total`
  double total = 1.0;
};

// Instantiated soft-logic program. Assignments are full value vectors
// parallel to `atoms`; observed entries are fixed by base_assignment().
class Grounding {
 public:
  AtomId add_atom(Atom atom);
  std::optional<AtomId> find_atom(const std::string& predicate,
                                  const std::vector<std::string>& args) const;

  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(AtomId id) const { return atoms_[id]; }
  std::vector<AtomId> target_ids() const;

  std::vector<RuleTemplate> templates;
  std::vector<GroundRule> rules;
  std::vector<SumConstraint> constraints;

  // Observed values filled in, targets at 0.
  std::vector<double> base_assignment() const;

  bool feasible(const std::vector<double>& assignment, double tol = 1e-6) const;

  // Debug dump: atoms, ground rules and their distances at `assignment`.
  std::string dump_json(const std::vector<double>& assignment) const;

 private:
  std::vector<Atom> atoms_;
  std::map<std::pair<std::string, std::vector<std::string>>, AtomId> index_;
};

// Distance to satisfaction [max(0, body - head)]^p of one ground rule.
double rule_distance(const Grounding& g, const GroundRule& rule,
                     const std::vector<double>& assignment);

// All valid bindings of `templates` against the grounding's atoms. With
// `prune`, bindings whose body contains a zero-valued observed literal are
// dropped; pruning never changes total energy.
std::vector<GroundRule> ground_rules(const Grounding& g,
                                     const std::vector<RuleTemplate>& templates,
                                     bool prune = true);

// Weighted sum of rule distances. Throws when `check_feasible` and the
// assignment violates a sum constraint beyond 1e-6.
double total_energy(const Grounding& g, const std::vector<double>& assignment,
                    bool check_feasible = true);

struct OneHotSolution {
  std::vector<double> assignment;
  double energy = 0.0;
  AtomId chosen = -1;
};

// MAP over the one-hot encodings of the (single) sum constraint; ties break
// by smaller tie_distance, then smaller tie_id.
OneHotSolution solve_one_hot(const Grounding& g);

struct ContinuousSolution {
  std::vector<double> assignment;
  double energy = 0.0;
  int iterations = 0;
};

// Projected subgradient on the probability simplex, step 0.1/sqrt(t),
// initialized at the uniform point. Returns the best iterate.
ContinuousSolution solve_continuous(const Grounding& g, double eps = 1e-4,
                                    int max_iter = 500);

// Euclidean projection onto the simplex {y >= 0, sum y = total}.
std::vector<double> project_simplex(std::vector<double> v, double total = 1.0);

}  // namespace escnav
