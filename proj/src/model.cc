#include "fscp/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fscp {

namespace {

constexpr double kRowSumTolerance = 1e-9;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string format_values(const std::vector<int>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

bool in_domain(const Variable& v, int value) {
  return std::binary_search(v.domain.begin(), v.domain.end(), value);
}

}  // namespace

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::kDecision: return "decision";
    case VarKind::kRandom: return "random";
    case VarKind::kAuxiliary: return "auxiliary";
  }
  return "?";
}

const char* to_string(Relation rel) {
  switch (rel) {
    case Relation::kEq: return "==";
    case Relation::kLe: return "<=";
    case Relation::kGe: return ">=";
    case Relation::kLt: return "<";
    case Relation::kGt: return ">";
    case Relation::kNe: return "!=";
  }
  return "?";
}

std::optional<Relation> parse_relation(const std::string& text) {
  if (text == "==" || text == "=") return Relation::kEq;
  if (text == "<=") return Relation::kLe;
  if (text == ">=") return Relation::kGe;
  if (text == "<") return Relation::kLt;
  if (text == ">") return Relation::kGt;
  if (text == "!=") return Relation::kNe;
  return std::nullopt;
}

std::vector<VarId> Cpt::scope() const {
  std::vector<VarId> out = parents;
  out.push_back(child);
  return out;
}

std::vector<VarId> Constraint::scope() const {
  if (is_linear()) {
    std::vector<VarId> out;
    for (const LinearTerm& t : linear().terms) {
      if (std::find(out.begin(), out.end(), t.var) == out.end()) out.push_back(t.var);
    }
    return out;
  }
  return table().scope;
}

bool operator==(const Variable& a, const Variable& b) {
  return a.id == b.id && a.name == b.name && a.kind == b.kind &&
         a.domain == b.domain && a.stage == b.stage;
}
bool operator==(const CptRow& a, const CptRow& b) {
  return a.parent_values == b.parent_values && a.dist == b.dist;
}
bool operator==(const Cpt& a, const Cpt& b) {
  return a.child == b.child && a.parents == b.parents && a.rows == b.rows;
}
bool operator==(const LinearTerm& a, const LinearTerm& b) {
  return a.coef == b.coef && a.var == b.var;
}
bool operator==(const LinearConstraint& a, const LinearConstraint& b) {
  return a.terms == b.terms && a.rel == b.rel && a.rhs == b.rhs;
}
bool operator==(const TableConstraint& a, const TableConstraint& b) {
  return a.scope == b.scope && a.tuples == b.tuples;
}
bool operator==(const Constraint& a, const Constraint& b) { return a.body == b.body; }

Problem::Problem(std::string name, std::vector<Variable> variables,
                 std::vector<Cpt> cpts, std::vector<Constraint> constraints,
                 VarId utility_variable, Objective objective)
    : name_(std::move(name)),
      variables_(std::move(variables)),
      cpts_(std::move(cpts)),
      constraints_(std::move(constraints)),
      utility_variable_(utility_variable),
      objective_(objective) {}

std::optional<VarId> Problem::find_variable(const std::string& name) const {
  for (const Variable& v : variables_) {
    if (v.name == name) return v.id;
  }
  return std::nullopt;
}

bool operator==(const Problem& a, const Problem& b) {
  return a.name_ == b.name_ && a.variables_ == b.variables_ && a.cpts_ == b.cpts_ &&
         a.constraints_ == b.constraints_ &&
         a.utility_variable_ == b.utility_variable_ && a.objective_ == b.objective_;
}

// ---------------------------------------------------------------------------
// ProblemBuilder

VarId ProblemBuilder::add_variable(std::string name, VarKind kind,
                                   std::vector<int> domain, int stage) {
  Variable v;
  v.id = static_cast<VarId>(variables_.size());
  v.name = std::move(name);
  v.kind = kind;
  v.domain = std::move(domain);
  v.stage = kind == VarKind::kAuxiliary ? 0 : stage;
  variables_.push_back(std::move(v));
  return variables_.back().id;
}

VarId ProblemBuilder::add_decision(std::string name, std::vector<int> domain, int stage) {
  return add_variable(std::move(name), VarKind::kDecision, std::move(domain), stage);
}

VarId ProblemBuilder::add_random(std::string name, std::vector<int> domain, int stage) {
  return add_variable(std::move(name), VarKind::kRandom, std::move(domain), stage);
}

VarId ProblemBuilder::add_auxiliary(std::string name, std::vector<int> domain) {
  return add_variable(std::move(name), VarKind::kAuxiliary, std::move(domain), 0);
}

void ProblemBuilder::add_prior(VarId child, const std::vector<double>& probs) {
  add_cpt(child, {}, {probs});
}

void ProblemBuilder::add_cpt(VarId child, std::vector<VarId> parents,
                             const std::vector<std::vector<double>>& rows) {
  Cpt cpt;
  cpt.child = child;
  cpt.parents = std::move(parents);
  std::size_t combos = 1;
  for (VarId p : cpt.parents) combos *= variables_.at(p).domain.size();
  if (rows.size() != combos) {
    throw std::invalid_argument("add_cpt: expected " + std::to_string(combos) +
                                " rows for child '" + variables_.at(child).name + "'");
  }
  const std::vector<int>& child_domain = variables_.at(child).domain;
  for (std::size_t r = 0; r < combos; ++r) {
    CptRow row;
    std::size_t rest = r;
    row.parent_values.resize(cpt.parents.size());
    for (std::size_t k = cpt.parents.size(); k-- > 0;) {
      const auto& dom = variables_[cpt.parents[k]].domain;
      row.parent_values[k] = dom[rest % dom.size()];
      rest /= dom.size();
    }
    if (rows[r].size() != child_domain.size()) {
      throw std::invalid_argument("add_cpt: row width does not match child domain");
    }
    for (std::size_t i = 0; i < child_domain.size(); ++i) {
      row.dist.emplace_back(child_domain[i], rows[r][i]);
    }
    cpt.rows.push_back(std::move(row));
  }
  cpts_.push_back(std::move(cpt));
}

void ProblemBuilder::add_cpt(Cpt cpt) { cpts_.push_back(std::move(cpt)); }

void ProblemBuilder::add_linear(std::vector<LinearTerm> terms, Relation rel,
                                std::int64_t rhs) {
  constraints_.push_back(Constraint{LinearConstraint{std::move(terms), rel, rhs}});
}

void ProblemBuilder::add_table(std::vector<VarId> scope,
                               std::vector<std::vector<int>> tuples) {
  constraints_.push_back(Constraint{TableConstraint{std::move(scope), std::move(tuples)}});
}

Problem ProblemBuilder::build() const {
  return Problem(name_, variables_, cpts_, constraints_, utility_, objective_);
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const Violation& v : violations) out << v.entity << ": " << v.message << "\n";
  return out.str();
}

namespace {

class Validator {
 public:
  explicit Validator(const Problem& p) : p_(p) {}

  ValidationReport run() {
    check_variables();
    check_cpts();
    check_constraints();
    check_utility();
    return std::move(report_);
  }

 private:
  void add(std::string entity, std::string message) {
    report_.violations.push_back({std::move(entity), std::move(message)});
  }

  bool valid_id(VarId id) const { return id >= 0 && id < p_.num_variables(); }

  std::string var_entity(VarId id) const {
    return "variable '" + p_.variable(id).name + "'";
  }

  std::string var_name(VarId id) const {
    return valid_id(id) ? "'" + p_.variable(id).name + "'" : "#" + std::to_string(id);
  }

  void check_variables() {
    std::set<std::string> names;
    for (int i = 0; i < p_.num_variables(); ++i) {
      const Variable& v = p_.variable(i);
      std::string entity = "variable '" + v.name + "'";
      if (v.id != i) add(entity, "id " + std::to_string(v.id) + " does not match position " + std::to_string(i));
      if (v.name.empty()) add("variable #" + std::to_string(i), "name is empty");
      if (!names.insert(v.name).second) add(entity, "duplicate variable name");
      if (v.domain.empty()) add(entity, "domain is empty");
      for (std::size_t k = 1; k < v.domain.size(); ++k) {
        if (v.domain[k - 1] >= v.domain[k]) {
          add(entity, "domain is not sorted and duplicate-free");
          break;
        }
      }
      if (v.kind != VarKind::kAuxiliary && v.stage < 0) add(entity, "stage is negative");
    }
  }

  void check_cpts() {
    const auto& cpts = p_.cpts();
    std::vector<int> cpt_count(p_.num_variables(), 0);
    for (std::size_t c = 0; c < cpts.size(); ++c) {
      const Cpt& cpt = cpts[c];
      std::string entity = "cpt[" + std::to_string(c) + "] (child " + var_name(cpt.child) + ")";
      bool ids_ok = valid_id(cpt.child);
      if (!valid_id(cpt.child)) {
        add(entity, "child is not a known variable");
      } else {
        ++cpt_count[cpt.child];
        if (p_.variable(cpt.child).kind != VarKind::kRandom) add(entity, "child is not a random variable");
      }
      std::set<VarId> seen;
      for (VarId parent : cpt.parents) {
        if (!valid_id(parent)) {
          add(entity, "parent #" + std::to_string(parent) + " is not a known variable");
          ids_ok = false;
          continue;
        }
        if (p_.variable(parent).kind != VarKind::kRandom) add(entity, "parent " + var_name(parent) + " is not a random variable");
        if (parent == cpt.child) add(entity, "child is its own parent");
        if (!seen.insert(parent).second) add(entity, "duplicate parent " + var_name(parent));
      }
      if (ids_ok) check_rows(cpt, entity);
    }
    for (const Variable& v : p_.variables()) {
      if (v.kind != VarKind::kRandom) continue;
      if (cpt_count[v.id] == 0) add(var_entity(v.id), "random variable has no cpt");
      if (cpt_count[v.id] > 1) add(var_entity(v.id), "random variable is the child of " + std::to_string(cpt_count[v.id]) + " cpts");
    }
    check_acyclic();
  }

  void check_rows(const Cpt& cpt, const std::string& entity) {
    const Variable& child = p_.variable(cpt.child);
    std::set<std::vector<int>> covered;
    for (const CptRow& row : cpt.rows) {
      std::string row_entity = entity + " row " + format_values(row.parent_values);
      if (row.parent_values.size() != cpt.parents.size()) {
        add(row_entity, "expected " + std::to_string(cpt.parents.size()) + " parent values");
        continue;
      }
      bool in_range = true;
      for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
        if (!in_domain(p_.variable(cpt.parents[k]), row.parent_values[k])) {
          add(row_entity, "value " + std::to_string(row.parent_values[k]) + " not in domain of parent " + var_name(cpt.parents[k]));
          in_range = false;
        }
      }
      if (in_range && !covered.insert(row.parent_values).second) add(row_entity, "duplicate row");
      double sum = 0.0;
      std::set<int> keys;
      for (const auto& [value, prob] : row.dist) {
        if (!in_domain(child, value)) add(row_entity, "value " + std::to_string(value) + " not in domain of child");
        if (!keys.insert(value).second) add(row_entity, "duplicate entry for value " + std::to_string(value));
        if (!(prob >= 0.0 && prob <= 1.0)) add(row_entity, "probability " + format_double(prob) + " outside [0, 1]");
        sum += prob;
      }
      if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) add(row_entity, "row sums to " + format_double(sum));
    }
    std::size_t combos = 1;
    for (VarId parent : cpt.parents) combos *= p_.variable(parent).domain.size();
    if (covered.size() < combos) {
      add(entity, "covers " + std::to_string(covered.size()) + " of " + std::to_string(combos) + " parent assignments");
    }
  }

  // The parent relation of the CPTs must form a Bayesian network (a DAG).
  void check_acyclic() {
    const int n = p_.num_variables();
    std::vector<std::vector<VarId>> parents(n);
    for (const Cpt& cpt : p_.cpts()) {
      if (!valid_id(cpt.child)) continue;
      for (VarId q : cpt.parents) {
        if (valid_id(q)) parents[cpt.child].push_back(q);
      }
    }
    std::vector<int> color(n, 0);
    for (VarId start = 0; start < n; ++start) {
      if (color[start]) continue;
      std::vector<std::pair<VarId, std::size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next < parents[v].size()) {
          VarId q = parents[v][next++];
          if (color[q] == 1) {
            add(var_entity(q), "cpt parent relation has a cycle");
            return;
          }
          if (color[q] == 0) {
            color[q] = 1;
            stack.push_back({q, 0});
          }
        } else {
          color[v] = 2;
          stack.pop_back();
        }
      }
    }
  }

  void check_constraints() {
    const auto& cons = p_.constraints();
    for (std::size_t c = 0; c < cons.size(); ++c) {
      std::string entity = "constraint[" + std::to_string(c) + "]";
      std::vector<VarId> scope = cons[c].scope();
      if (scope.empty()) {
        add(entity, "scope is empty");
        continue;
      }
      bool ids_ok = true;
      bool has_controllable = false;
      for (VarId v : scope) {
        if (!valid_id(v)) {
          add(entity, "variable #" + std::to_string(v) + " is not a known variable");
          ids_ok = false;
          continue;
        }
        if (p_.variable(v).kind != VarKind::kRandom) has_controllable = true;
      }
      if (ids_ok && !has_controllable) add(entity, "scope has no decision or auxiliary variable");
      if (!cons[c].is_linear()) {
        const TableConstraint& t = cons[c].table();
        std::set<VarId> uniq(t.scope.begin(), t.scope.end());
        if (uniq.size() != t.scope.size()) add(entity, "table scope has duplicate variables");
        for (const auto& tuple : t.tuples) {
          if (tuple.size() != t.scope.size()) {
            add(entity, "tuple " + format_values(tuple) + " does not match scope size");
            break;
          }
        }
      }
    }
  }

  void check_utility() {
    VarId u = p_.utility_variable();
    if (!valid_id(u)) {
      add("utility_variable", "not a known variable");
      return;
    }
    if (p_.variable(u).kind != VarKind::kAuxiliary) add("utility_variable", "'" + p_.variable(u).name + "' is not auxiliary");
    bool used = false;
    for (const Constraint& c : p_.constraints()) {
      std::vector<VarId> scope = c.scope();
      if (std::find(scope.begin(), scope.end(), u) != scope.end()) used = true;
    }
    if (!used) add("utility_variable", "'" + p_.variable(u).name + "' appears in no constraint");
  }

  const Problem& p_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Problem& problem) { return Validator(problem).run(); }

std::vector<VarId> total_order(const Problem& problem) {
  std::vector<VarId> order;
  for (const Variable& v : problem.variables()) {
    if (v.is_branchable()) order.push_back(v.id);
  }
  auto rank = [&](VarId id) {
    const Variable& v = problem.variable(id);
    return std::pair{v.stage, v.kind == VarKind::kDecision ? 0 : 1};
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](VarId a, VarId b) { return rank(a) < rank(b); });
  return order;
}

std::size_t FactorGraph::edge_count() const {
  std::size_t n = 0;
  for (const FactorNode& f : factors) n += f.scope.size();
  return n;
}

std::vector<std::pair<VarId, int>> FactorGraph::edges() const {
  std::vector<std::pair<VarId, int>> out;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    for (VarId v : factors[f].scope) out.emplace_back(v, static_cast<int>(f));
  }
  return out;
}

FactorGraph factor_graph(const Problem& problem) {
  FactorGraph g;
  g.num_variables = problem.num_variables();
  g.factors_of_variable.resize(g.num_variables);
  auto add = [&](FactorKind kind, int index, std::vector<VarId> scope) {
    int f = static_cast<int>(g.factors.size());
    for (VarId v : scope) g.factors_of_variable[v].push_back(f);
    g.factors.push_back({kind, index, std::move(scope)});
  };
  for (std::size_t i = 0; i < problem.cpts().size(); ++i) {
    add(FactorKind::kCpt, static_cast<int>(i), problem.cpts()[i].scope());
  }
  for (std::size_t i = 0; i < problem.constraints().size(); ++i) {
    add(FactorKind::kConstraint, static_cast<int>(i), problem.constraints()[i].scope());
  }
  return g;
}

InvalidProblemError::InvalidProblemError(ValidationReport report)
    : report_(std::move(report)), message_("invalid problem:\n" + report_.to_string()) {}

}  // namespace fscp
