#include "fscp/oracle.h"

#include <algorithm>
#include <limits>
#include <string>

namespace fscp {

namespace {

constexpr int kUnset = std::numeric_limits<int>::min();

bool satisfied(const Constraint& c, const std::vector<int>& values) {
  if (c.is_linear()) {
    const LinearConstraint& lin = c.linear();
    std::int64_t lhs = 0;
    for (const LinearTerm& t : lin.terms) lhs += t.coef * values[t.var];
    switch (lin.rel) {
      case Relation::kEq: return lhs == lin.rhs;
      case Relation::kLe: return lhs <= lin.rhs;
      case Relation::kGe: return lhs >= lin.rhs;
      case Relation::kLt: return lhs < lin.rhs;
      case Relation::kGt: return lhs > lin.rhs;
      case Relation::kNe: return lhs != lin.rhs;
    }
    return false;
  }
  const TableConstraint& tab = c.table();
  for (const auto& tuple : tab.tuples) {
    bool match = true;
    for (std::size_t i = 0; i < tab.scope.size() && match; ++i) {
      match = tuple[i] == values[tab.scope[i]];
    }
    if (match) return true;
  }
  return false;
}

double cpt_entry(const Cpt& cpt, const std::vector<int>& values) {
  for (const CptRow& row : cpt.rows) {
    bool match = true;
    for (std::size_t i = 0; i < cpt.parents.size() && match; ++i) {
      match = row.parent_values[i] == values[cpt.parents[i]];
    }
    if (!match) continue;
    for (const auto& [value, p] : row.dist) {
      if (value == values[cpt.child]) return p;
    }
    return 0.0;
  }
  return 0.0;
}

class Enumerator {
 public:
  Enumerator(const Problem& problem, std::uint64_t bound) : p_(problem) {
    ValidationReport report = validate(problem);
    if (!report.ok()) throw InvalidProblemError(std::move(report));
    std::uint64_t size = state_space_size(problem);
    if (size > bound) {
      throw OracleRefused("state space of " + std::to_string(size) + " assignments exceeds the bound " +
                          std::to_string(bound));
    }
    order_ = total_order(problem);
    values_.assign(problem.num_variables(), kUnset);
    for (const Variable& v : problem.variables()) {
      if (v.kind == VarKind::kAuxiliary) aux_.push_back(v.id);
    }
    // Each constraint is checked as soon as its last auxiliary is assigned.
    checks_.resize(aux_.size() + 1);
    std::vector<int> aux_pos(problem.num_variables(), -1);
    for (std::size_t i = 0; i < aux_.size(); ++i) aux_pos[aux_[i]] = static_cast<int>(i);
    for (std::size_t c = 0; c < problem.constraints().size(); ++c) {
      int last = -1;
      for (VarId v : problem.constraints()[c].scope()) last = std::max(last, aux_pos[v]);
      checks_[last + 1].push_back(static_cast<int>(c));
    }
  }

  std::vector<int>& values() { return values_; }

  // Value of the subtree below the current partial assignment; variables
  // already set are skipped.
  std::optional<double> solve(std::size_t pos) {
    while (pos < order_.size() && values_[order_[pos]] != kUnset) ++pos;
    if (pos == order_.size()) return leaf();
    const VarId x = order_[pos];
    const bool maximize = p_.objective() == Objective::kMaximize;
    const bool is_random = p_.variable(x).kind == VarKind::kRandom;
    std::optional<double> result;
    for (int value : p_.variable(x).domain) {
      values_[x] = value;
      std::optional<double> child = solve(pos + 1);
      values_[x] = kUnset;
      if (is_random) {
        if (!child) return std::nullopt;
        result = result.value_or(0.0) + *child;
      } else if (child && (!result || (maximize ? *child > *result : *child < *result))) {
        result = child;
      }
    }
    return result;
  }

  void collect(std::size_t pos, std::vector<Scenario>& out) {
    if (pos == order_.size()) {
      Scenario s;
      s.probability = probability();
      s.utility = utility();
      s.values = values_;
      if (!s.utility) {
        for (VarId a : aux_) s.values[a] = kUnset;
      }
      out.push_back(std::move(s));
      return;
    }
    const VarId x = order_[pos];
    for (int value : p_.variable(x).domain) {
      values_[x] = value;
      collect(pos + 1, out);
    }
    values_[x] = kUnset;
  }

 private:
  double probability() const {
    double p = 1.0;
    for (const Cpt& cpt : p_.cpts()) p *= cpt_entry(cpt, values_);
    return p;
  }

  // Solves the auxiliaries; assigns them on success.
  std::optional<std::int64_t> utility() {
    found_.reset();
    ambiguous_ = false;
    search_aux(0);
    if (found_) {
      for (std::size_t i = 0; i < aux_.size(); ++i) values_[aux_[i]] = solution_[i];
    }
    if (ambiguous_) throw UtilityNotDetermined("auxiliary constraints admit several utility values");
    return found_;
  }

  void search_aux(std::size_t i) {
    for (int c : checks_[i]) {
      if (!satisfied(p_.constraints()[c], values_)) return;
    }
    if (i == aux_.size()) {
      std::int64_t u = values_[p_.utility_variable()];
      if (!found_) {
        found_ = u;
        solution_.clear();
        for (VarId a : aux_) solution_.push_back(values_[a]);
      } else if (*found_ != u) {
        ambiguous_ = true;
      }
      return;
    }
    for (int value : p_.variable(aux_[i]).domain) {
      values_[aux_[i]] = value;
      search_aux(i + 1);
      if (ambiguous_) break;
    }
    values_[aux_[i]] = kUnset;
  }

  std::optional<double> leaf() {
    double p = probability();
    std::optional<std::int64_t> u;
    try {
      u = utility();
    } catch (const UtilityNotDetermined&) {
      if (p > 0.0) throw;
      u = 0;
    }
    for (VarId a : aux_) values_[a] = kUnset;
    if (!u) {
      if (p > 0.0) return std::nullopt;
      return 0.0;
    }
    return p * static_cast<double>(*u);
  }

  const Problem& p_;
  std::vector<VarId> order_;
  std::vector<VarId> aux_;
  std::vector<std::vector<int>> checks_;
  std::vector<int> values_;
  std::optional<std::int64_t> found_;
  std::vector<int> solution_;
  bool ambiguous_ = false;
};

}  // namespace

std::uint64_t state_space_size(const Problem& problem) {
  std::uint64_t size = 1;
  for (const Variable& v : problem.variables()) {
    if (v.kind == VarKind::kAuxiliary) continue;
    std::uint64_t d = v.domain.size();
    if (d == 0) return 0;
    if (size > std::numeric_limits<std::uint64_t>::max() / d) return std::numeric_limits<std::uint64_t>::max();
    size *= d;
  }
  return size;
}

std::vector<Scenario> scenarios(const Problem& problem, std::uint64_t bound) {
  Enumerator e(problem, bound);
  std::vector<Scenario> out;
  e.collect(0, out);
  return out;
}

std::optional<double> enumerate(const Problem& problem, std::uint64_t bound) {
  Enumerator e(problem, bound);
  return e.solve(0);
}

double evaluate_policy(const Problem& problem, const PolicyTree& policy, std::uint64_t bound) {
  std::vector<std::string> issues = check_policy_shape(policy, problem);
  if (!issues.empty()) {
    std::string msg = "malformed policy:";
    for (const std::string& s : issues) msg += "\n  " + s;
    throw PolicyShapeError(msg);
  }
  Enumerator e(problem, bound);
  std::vector<int>& values = e.values();
  auto walk = [&](auto&& self, int id) -> double {
    const PolicyNode& node = policy.nodes[id];
    if (node.kind == PolicyNode::Kind::kLeaf) {
      std::optional<double> v = e.solve(0);
      if (!v) throw std::logic_error("policy reaches an infeasible scenario");
      return *v;
    }
    double total = 0.0;
    for (const auto& [value, child] : node.branches) {
      values[node.var] = value;
      total += self(self, child);
    }
    values[node.var] = kUnset;
    return total;
  };
  return walk(walk, policy.root);
}

}  // namespace fscp
