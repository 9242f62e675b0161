#include "escnav/softlogic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace escnav {

double luk_and(double a, double b) { return std::max(0.0, a + b - 1.0); }
double luk_or(double a, double b) { return std::min(a + b, 1.0); }
double luk_neg(double a) { return 1.0 - a; }

double luk_eval(LukOp op, double a, std::optional<double> b) {
  auto check = [](double v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("Lukasiewicz operand outside [0,1]");
  };
  check(a);
  if (op == LukOp::Neg) {
    if (b) throw std::invalid_argument("negation takes one operand");
    return luk_neg(a);
  }
  if (!b) throw std::invalid_argument("binary operator needs two operands");
  check(*b);
  return op == LukOp::And ? luk_and(a, *b) : luk_or(a, *b);
}

AtomId Grounding::add_atom(Atom atom) {
  const auto key = std::make_pair(atom.predicate, atom.args);
  if (index_.count(key))
    throw std::invalid_argument("duplicate atom " + atom.predicate);
  const AtomId id = static_cast<AtomId>(atoms_.size());
  index_[key] = id;
  atoms_.push_back(std::move(atom));
  return id;
}

std::optional<AtomId> Grounding::find_atom(const std::string& predicate,
                                           const std::vector<std::string>& args) const {
  const auto it = index_.find(std::make_pair(predicate, args));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<AtomId> Grounding::target_ids() const {
  std::vector<AtomId> out;
  for (size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].kind == AtomKind::Target) out.push_back(static_cast<AtomId>(i));
  return out;
}

std::vector<double> Grounding::base_assignment() const {
  std::vector<double> v(atoms_.size(), 0.0);
  for (size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].kind == AtomKind::Observed) v[i] = atoms_[i].value;
  return v;
}

bool Grounding::feasible(const std::vector<double>& assignment, double tol) const {
  for (const auto& c : constraints) {
    double sum = 0.0;
    for (const AtomId id : c.atoms) sum += assignment[id];
    if (std::abs(sum - c.total) > tol) return false;
  }
  return true;
}

namespace {

double literal_value(const Grounding& g, const BoundLiteral& lit,
                     const std::vector<double>& assignment) {
  if (lit.atom < 0 || lit.atom >= static_cast<AtomId>(g.atoms().size()))
    throw std::invalid_argument("ground rule references unbound atom");
  const double v = assignment[lit.atom];
  return lit.negated ? luk_neg(v) : v;
}

}  // namespace

double rule_distance(const Grounding& g, const GroundRule& rule,
                     const std::vector<double>& assignment) {
  const RuleTemplate& tmpl = g.templates[rule.template_index];
  double body = 1.0;  // conjunction identity
  for (const BoundLiteral& lit : rule.body)
    body = luk_and(body, literal_value(g, lit, assignment));
  const double head = literal_value(g, rule.head, assignment);
  const double d = std::max(0.0, body - head);
  return tmpl.exponent == 2 ? d * d : d;
}

namespace {

// Backtracking join over the literal patterns of one template.
void bind_literals(const Grounding& g, const RuleTemplate& tmpl, size_t li,
                   std::map<std::string, std::string>& binding,
                   std::vector<BoundLiteral>& bound, int template_index, bool prune,
                   std::vector<GroundRule>& out) {
  const bool is_head = li == tmpl.body.size();
  const LiteralPattern& pat = is_head ? tmpl.head : tmpl.body[li];

  for (size_t ai = 0; ai < g.atoms().size(); ++ai) {
    const Atom& atom = g.atoms()[ai];
    if (atom.predicate != pat.predicate) continue;
    if (atom.args.size() != pat.args.size()) continue;

    std::vector<std::string> newly_bound;
    bool ok = true;
    for (size_t k = 0; k < pat.args.size(); ++k) {
      const Term& t = pat.args[k];
      if (!t.is_variable) {
        if (atom.args[k] != t.text) { ok = false; break; }
      } else {
        const auto it = binding.find(t.text);
        if (it == binding.end()) {
          binding[t.text] = atom.args[k];
          newly_bound.push_back(t.text);
        } else if (it->second != atom.args[k]) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      // Zero-valued observed body literal: the conjunction is 0 and the
      // rule can never be violated, so the binding may be skipped.
      const double effective =
          atom.kind == AtomKind::Observed
              ? (pat.negated ? luk_neg(atom.value) : atom.value)
              : 1.0;
      if (prune && !is_head && atom.kind == AtomKind::Observed && effective == 0.0) {
        ok = false;
      } else {
        bound.push_back({static_cast<AtomId>(ai), pat.negated});
        if (is_head) {
          GroundRule rule;
          rule.template_index = template_index;
          rule.body.assign(bound.begin(), bound.end() - 1);
          rule.head = bound.back();
          out.push_back(std::move(rule));
        } else {
          bind_literals(g, tmpl, li + 1, binding, bound, template_index, prune, out);
        }
        bound.pop_back();
      }
    }
    for (const auto& name : newly_bound) binding.erase(name);
  }
}

}  // namespace

std::vector<GroundRule> ground_rules(const Grounding& g,
                                     const std::vector<RuleTemplate>& templates,
                                     bool prune) {
  std::vector<GroundRule> out;
  for (size_t ti = 0; ti < templates.size(); ++ti) {
    const RuleTemplate& tmpl = templates[ti];
    std::vector<const LiteralPattern*> patterns;
    for (const auto& pat : tmpl.body) patterns.push_back(&pat);
    patterns.push_back(&tmpl.head);
    for (const LiteralPattern* pat : patterns) {
      bool known = false;
      for (const auto& atom : g.atoms())
        if (atom.predicate == pat->predicate) { known = true; break; }
      if (!known)
        throw std::invalid_argument("template '" + tmpl.name +
                                    "' references unknown predicate '" + pat->predicate + "'");
    }
    std::map<std::string, std::string> binding;
    std::vector<BoundLiteral> bound;
    bind_literals(g, tmpl, 0, binding, bound, static_cast<int>(ti), prune, out);
  }
  return out;
}

double total_energy(const Grounding& g, const std::vector<double>& assignment,
                    bool check_feasible) {
  if (assignment.size() != g.atoms().size())
    throw std::invalid_argument("assignment size mismatch");
  for (const AtomId id : g.target_ids()) {
    const double v = assignment[id];
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("target value outside [0,1]");
  }
  if (check_feasible && !g.feasible(assignment))
    throw std::invalid_argument("assignment violates a sum constraint");
  double energy = 0.0;
  for (const GroundRule& rule : g.rules)
    energy += g.templates[rule.template_index].weight * rule_distance(g, rule, assignment);
  return energy;
}

OneHotSolution solve_one_hot(const Grounding& g) {
  if (g.constraints.size() != 1)
    throw std::invalid_argument("solve_one_hot expects exactly one sum constraint");
  const auto& targets = g.constraints[0].atoms;
  if (targets.empty()) throw std::invalid_argument("no target atoms to solve over");

  OneHotSolution best;
  best.energy = std::numeric_limits<double>::infinity();
  std::vector<double> assignment = g.base_assignment();
  for (const AtomId candidate : targets) {
    for (const AtomId id : targets) assignment[id] = 0.0;
    assignment[candidate] = 1.0;
    const double energy = total_energy(g, assignment, false);
    const Atom& atom = g.atom(candidate);
    bool better = energy < best.energy;
    if (!better && energy == best.energy && best.chosen >= 0) {
      const Atom& incumbent = g.atom(best.chosen);
      better = atom.tie_distance < incumbent.tie_distance ||
               (atom.tie_distance == incumbent.tie_distance && atom.tie_id < incumbent.tie_id);
    }
    if (better) {
      best.energy = energy;
      best.chosen = candidate;
      best.assignment = assignment;
    }
  }
  return best;
}

std::vector<double> project_simplex(std::vector<double> v, double total) {
  // Euclidean projection (Held et al. / Duchi et al. sorting scheme).
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double candidate = (cumulative - total) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) tau = candidate;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

namespace {

// Subgradient of the weighted energy with respect to each target atom.
void accumulate_subgradient(const Grounding& g, const std::vector<double>& assignment,
                            const std::vector<AtomId>& targets,
                            std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<int> target_slot(g.atoms().size(), -1);
  for (size_t i = 0; i < targets.size(); ++i) target_slot[targets[i]] = static_cast<int>(i);

  for (const GroundRule& rule : g.rules) {
    const RuleTemplate& tmpl = g.templates[rule.template_index];
    double body = 1.0;
    for (const BoundLiteral& lit : rule.body)
      body = luk_and(body, literal_value(g, lit, assignment));
    const double head = literal_value(g, rule.head, assignment);
    const double margin = body - head;
    if (margin <= 0.0) continue;  // hinge inactive: zero subgradient
    const double outer =
        tmpl.exponent == 2 ? 2.0 * margin * tmpl.weight : tmpl.weight;
    // With the hinge active no inner conjunction clamps, so each literal
    // contributes linearly.
    for (const BoundLiteral& lit : rule.body) {
      const int slot = target_slot[lit.atom];
      if (slot >= 0) grad[slot] += outer * (lit.negated ? -1.0 : 1.0);
    }
    const int head_slot = target_slot[rule.head.atom];
    if (head_slot >= 0) grad[head_slot] += outer * (rule.head.negated ? 1.0 : -1.0);
  }
}

}  // namespace

ContinuousSolution solve_continuous(const Grounding& g, double eps, int max_iter) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  if (g.constraints.size() != 1)
    throw std::invalid_argument("solve_continuous expects exactly one sum constraint");
  const auto& targets = g.constraints[0].atoms;
  if (targets.empty()) throw std::invalid_argument("no target atoms to solve over");

  const size_t n = targets.size();
  std::vector<double> y(n, g.constraints[0].total / static_cast<double>(n));
  std::vector<double> assignment = g.base_assignment();
  auto write_targets = [&](const std::vector<double>& vals) {
    for (size_t i = 0; i < n; ++i) assignment[targets[i]] = vals[i];
  };

  write_targets(y);
  ContinuousSolution best;
  best.assignment = assignment;
  best.energy = total_energy(g, assignment, false);

  std::vector<double> grad(n, 0.0);
  double previous_best = best.energy;
  for (int t = 1; t <= max_iter; ++t) {
    accumulate_subgradient(g, assignment, targets, grad);
    const double step = 0.1 / std::sqrt(static_cast<double>(t));
    for (size_t i = 0; i < n; ++i) y[i] -= step * grad[i];
    y = project_simplex(std::move(y), g.constraints[0].total);
    write_targets(y);
    const double energy = total_energy(g, assignment, false);
    best.iterations = t;
    if (energy < best.energy) {
      best.energy = energy;
      best.assignment = assignment;
    }
    if (t % 25 == 0) {  // check improvement over a window of iterations
      if (previous_best - best.energy < eps) break;
      previous_best = best.energy;
    }
  }
  return best;
}

std::string Grounding::dump_json(const std::vector<double>& assignment) const {
  nlohmann::json j;
  nlohmann::json atoms = nlohmann::json::array();
  for (size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    atoms.push_back({{"id", i},
                     {"predicate", a.predicate},
                     {"args", a.args},
                     {"kind", a.kind == AtomKind::Observed ? "observed" : "target"},
                     {"value", assignment.empty() ? a.value : assignment[i]}});
  }
  j["atoms"] = atoms;
  nlohmann::json rules_json = nlohmann::json::array();
  for (const GroundRule& r : rules) {
    nlohmann::json lits = nlohmann::json::array();
    for (const BoundLiteral& lit : r.body)
      lits.push_back({{"atom", lit.atom}, {"negated", lit.negated}});
    nlohmann::json entry = {{"template", templates[r.template_index].name},
                            {"weight", templates[r.template_index].weight},
                            {"body", lits},
                            {"head", {{"atom", r.head.atom}, {"negated", r.head.negated}}}};
    if (!assignment.empty()) entry["distance"] = rule_distance(*this, r, assignment);
    rules_json.push_back(entry);
  }
  j["ground_rules"] = rules_json;
  nlohmann::json cons = nlohmann::json::array();
  for (const SumConstraint& c : constraints)
    cons.push_back({{"atoms", c.atoms}, {"total", c.total}});
  j["constraints"] = cons;
  return j.dump(2);
}

}  // namespace escnav
