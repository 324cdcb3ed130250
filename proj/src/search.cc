#include "fscp/search.h"

#include <algorithm>

#include "and_or_engine.h"

namespace fscp {

GraphShape& GraphShape::operator+=(const GraphShape& o) {
  nodes += o.nodes;
  edges += o.edges;
  and_nodes += o.and_nodes;
  or_nodes += o.or_nodes;
  leaves += o.leaves;
  failures += o.failures;
  return *this;
}

EdgeWeigher::EdgeWeigher(const Problem& problem)
    : problem_(&problem), cpts_of_var_(problem.num_variables()) {
  for (std::size_t c = 0; c < problem.cpts().size(); ++c) {
    const Cpt& cpt = problem.cpts()[c];
    Table t;
    t.parents = cpt.parents;
    t.child = cpt.child;
    const auto& child_dom = problem.variable(cpt.child).domain;
    std::size_t stride = child_dom.size();
    t.strides.resize(cpt.parents.size());
    for (std::size_t k = cpt.parents.size(); k-- > 0;) {
      t.strides[k] = stride;
      stride *= problem.variable(cpt.parents[k]).domain.size();
    }
    t.probs.assign(stride, 0.0);
    for (const CptRow& row : cpt.rows) {
      std::size_t base = 0;
      for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
        const auto& dom = problem.variable(cpt.parents[k]).domain;
        base += t.strides[k] * (std::lower_bound(dom.begin(), dom.end(), row.parent_values[k]) - dom.begin());
      }
      for (const auto& [value, prob] : row.dist) {
        t.probs[base + (std::lower_bound(child_dom.begin(), child_dom.end(), value) - child_dom.begin())] = prob;
      }
    }
    tables_.push_back(std::move(t));
    for (VarId v : cpt.scope()) cpts_of_var_[v].push_back(static_cast<int>(c));
  }
}

double EdgeWeigher::entry(int c, const DomainState& state) const {
  const Table& t = tables_[c];
  std::size_t index = state.min_index(t.child);
  for (std::size_t k = 0; k < t.parents.size(); ++k) {
    index += t.strides[k] * state.min_index(t.parents[k]);
  }
  return t.probs[index];
}

PendingFactors EdgeWeigher::pending(const DomainState& state) const {
  PendingFactors out;
  out.utility_fired = state.is_assigned(problem_->utility_variable());
  for (std::size_t c = 0; c < tables_.size(); ++c) {
    const Table& t = tables_[c];
    bool full = state.is_assigned(t.child) &&
                std::all_of(t.parents.begin(), t.parents.end(),
                            [&](VarId p) { return state.is_assigned(p); });
    if (!full) out.cpts.push_back(static_cast<int>(c));
  }
  return out;
}

PendingFactors EdgeWeigher::initial() const {
  PendingFactors out;
  for (std::size_t c = 0; c < tables_.size(); ++c) out.cpts.push_back(static_cast<int>(c));
  return out;
}

EdgeWeight EdgeWeigher::weigh(const PendingFactors& before, const DomainState& after) const {
  EdgeWeight w;
  for (int c : before.cpts) {
    const Table& t = tables_[c];
    if (!after.is_assigned(t.child)) continue;
    if (!std::all_of(t.parents.begin(), t.parents.end(),
                     [&](VarId p) { return after.is_assigned(p); })) {
      continue;
    }
    w.probability *= entry(c, after);
  }
  w.weight = w.probability;
  VarId u = problem_->utility_variable();
  if (!before.utility_fired && after.is_assigned(u)) {
    w.utility = after.value(u);
    w.weight *= static_cast<double>(*w.utility);
  }
  return w;
}

EdgeWeight edge_weight(const PendingFactors& before, const DomainState& after,
                       const Problem& problem) {
  return EdgeWeigher(problem).weigh(before, after);
}

TreeResult solve_tree(const Problem& problem, const SearchOptions& options) {
  ValidationReport report = validate(problem);
  if (!report.ok()) throw InvalidProblemError(std::move(report));
  internal::TreeGraph graph;
  internal::AndOrEngine<internal::TreeGraph> engine(problem, options, graph, nullptr);
  auto root = engine.run();
  TreeResult result;
  result.value = root.value;
  result.stats = engine.stats();
  result.shape = root.node.ref;
  return result;
}

}  // namespace fscp
