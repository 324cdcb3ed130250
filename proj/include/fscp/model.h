// Problem representation for factored stochastic constraint programs.
//
// A problem is a set of integer variables (decision, random or auxiliary),
// one conditional probability table per random variable, hard constraints,
// a single auxiliary utility variable and an objective sense. Problems are
// immutable once built; use ProblemBuilder to assemble one.

#ifndef FSCP_MODEL_H_
#define FSCP_MODEL_H_

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fscp {

using VarId = int;

enum class VarKind { kDecision, kRandom, kAuxiliary };
enum class Objective { kMaximize, kMinimize };

const char* to_string(VarKind kind);

struct Variable {
  VarId id = 0;
  std::string name;
  VarKind kind = VarKind::kDecision;
  std::vector<int> domain;  // sorted, duplicate-free
  int stage = 0;            // unused for auxiliary variables

  bool is_branchable() const { return kind != VarKind::kAuxiliary; }
};

// One row of a conditional probability table: the distribution of the child
// for one assignment of the parents. Child values absent from `dist` have
// probability zero.
struct CptRow {
  std::vector<int> parent_values;
  std::vector<std::pair<int, double>> dist;  // (child value, probability)
};

struct Cpt {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<CptRow> rows;

  // Parents followed by the child.
  std::vector<VarId> scope() const;
};

enum class Relation { kEq, kLe, kGe, kLt, kGt, kNe };

const char* to_string(Relation rel);
std::optional<Relation> parse_relation(const std::string& text);

struct LinearTerm {
  std::int64_t coef = 0;
  VarId var = 0;
};

// sum(coef * var) <rel> rhs
struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Relation rel = Relation::kEq;
  std::int64_t rhs = 0;
};

struct TableConstraint {
  std::vector<VarId> scope;
  std::vector<std::vector<int>> tuples;  // allowed assignments
};

struct Constraint {
  std::variant<LinearConstraint, TableConstraint> body;

  std::vector<VarId> scope() const;
  bool is_linear() const { return std::holds_alternative<LinearConstraint>(body); }
  const LinearConstraint& linear() const { return std::get<LinearConstraint>(body); }
  const TableConstraint& table() const { return std::get<TableConstraint>(body); }
};

class Problem {
 public:
  Problem() = default;
  Problem(std::string name, std::vector<Variable> variables,
          std::vector<Cpt> cpts, std::vector<Constraint> constraints,
          VarId utility_variable, Objective objective);

  const std::string& name() const { return name_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(VarId id) const { return variables_[id]; }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  const std::vector<Cpt>& cpts() const { return cpts_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  VarId utility_variable() const { return utility_variable_; }
  Objective objective() const { return objective_; }

  std::optional<VarId> find_variable(const std::string& name) const;

  friend bool operator==(const Problem&, const Problem&);

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
  std::vector<Constraint> constraints_;
  VarId utility_variable_ = 0;
  Objective objective_ = Objective::kMaximize;
};

bool operator==(const Variable& a, const Variable& b);
bool operator==(const CptRow& a, const CptRow& b);
bool operator==(const Cpt& a, const Cpt& b);
bool operator==(const LinearTerm& a, const LinearTerm& b);
bool operator==(const LinearConstraint& a, const LinearConstraint& b);
bool operator==(const TableConstraint& a, const TableConstraint& b);
bool operator==(const Constraint& a, const Constraint& b);

// Incremental construction used by loaders, generators and tests.
class ProblemBuilder {
 public:
  explicit ProblemBuilder(std::string name = "model") : name_(std::move(name)) {}

  VarId add_variable(std::string name, VarKind kind, std::vector<int> domain,
                     int stage = 0);
  VarId add_decision(std::string name, std::vector<int> domain, int stage);
  VarId add_random(std::string name, std::vector<int> domain, int stage);
  VarId add_auxiliary(std::string name, std::vector<int> domain);

  // Prior for a parentless random variable; `probs` follows its domain order.
  void add_prior(VarId child, const std::vector<double>& probs);
  // Full table: `rows[i]` is the child distribution (domain order) for the
  // i-th parent assignment in mixed-radix order, first parent most significant.
  void add_cpt(VarId child, std::vector<VarId> parents,
               const std::vector<std::vector<double>>& rows);
  void add_cpt(Cpt cpt);

  void add_linear(std::vector<LinearTerm> terms, Relation rel, std::int64_t rhs);
  void add_table(std::vector<VarId> scope, std::vector<std::vector<int>> tuples);

  void set_utility(VarId var) { utility_ = var; }
  void set_objective(Objective objective) { objective_ = objective; }

  const Variable& variable(VarId id) const { return variables_[id]; }

  Problem build() const;

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
  std::vector<Constraint> constraints_;
  VarId utility_ = -1;
  Objective objective_ = Objective::kMaximize;
};

struct Violation {
  std::string entity;   // e.g. "variable 'W'", "cpt[2] (child 'S1')"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Checks every structural invariant of the problem. Violations are data; the
// function never throws.
ValidationReport validate(const Problem& problem);

// Decision and random variables ordered by stage, decisions before randoms
// within a stage, declaration order within each group. Auxiliary variables
// are excluded.
std::vector<VarId> total_order(const Problem& problem);

enum class FactorKind { kCpt, kConstraint };

struct FactorNode {
  FactorKind kind = FactorKind::kCpt;
  int index = 0;  // into Problem::cpts() or Problem::constraints()
  std::vector<VarId> scope;
};

// Bipartite variable/factor graph. Factors are numbered CPTs first, then
// constraints, in declaration order.
struct FactorGraph {
  int num_variables = 0;
  std::vector<FactorNode> factors;
  std::vector<std::vector<int>> factors_of_variable;

  std::size_t edge_count() const;
  std::vector<std::pair<VarId, int>> edges() const;
};

FactorGraph factor_graph(const Problem& problem);

// Thrown by operations that require a problem passing validate().
class InvalidProblemError : public std::exception {
 public:
  explicit InvalidProblemError(ValidationReport report);
  const char* what() const noexcept override { return message_.c_str(); }
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
  std::string message_;
};

}  // namespace fscp

#endif  // FSCP_MODEL_H_
