// Depth-first And-Or search shared by tree search and diagram compilation.
// Both front ends run this exact code, so their aggregation order (and hence
// their floating-point results) are identical; the diagram front end only
// adds the cache lookup/store around node expansion.

#ifndef FSCP_SRC_AND_OR_ENGINE_H_
#define FSCP_SRC_AND_OR_ENGINE_H_

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

#include "fscp/compile.h"
#include "fscp/constraints.h"
#include "fscp/diagram.h"
#include "fscp/model.h"
#include "fscp/search.h"

namespace fscp::internal {

// Counts the shape of the explicit search tree without materializing it.
struct TreeGraph {
  static constexpr bool kCaching = false;
  using Ref = GraphShape;
  struct Builder {
    GraphShape shape;
  };

  Ref leaf() {
    GraphShape s;
    s.nodes = s.leaves = 1;
    return s;
  }
  Ref failure() {
    GraphShape s;
    s.nodes = s.failures = 1;
    return s;
  }
  Builder begin(NodeKind kind, VarId) {
    Builder b;
    b.shape.nodes = 1;
    (kind == NodeKind::kAnd ? b.shape.and_nodes : b.shape.or_nodes) = 1;
    return b;
  }
  void add_edge(Builder& b, int, const EdgeWeight&, const Ref& child) {
    b.shape.edges += 1;
    b.shape += child;
  }
  Ref finish(Builder& b, double) { return b.shape; }
};

// Appends nodes to an arena in post-order.
struct DiagramGraph {
  static constexpr bool kCaching = true;
  using Ref = NodeId;
  struct Builder {
    NodeKind kind;
    VarId var;
    std::vector<AoddEdge> edges;
  };

  Aodd& dd;

  Ref leaf() { return dd.add_leaf(); }
  Ref failure() { return dd.add_failure(); }
  Builder begin(NodeKind kind, VarId var) { return Builder{kind, var, {}}; }
  void add_edge(Builder& b, int label, const EdgeWeight& w, const Ref& child) {
    b.edges.push_back(AoddEdge{label, w, child});
  }
  Ref finish(Builder& b, double value) {
    return dd.add_node(b.kind, b.var, value, std::move(b.edges));
  }
};

// Materializes the full search tree (no sharing).
struct UnsharedDiagramGraph : DiagramGraph {
  static constexpr bool kCaching = false;
};

template <class Graph>
class AndOrEngine {
 public:
  using Ref = typename Graph::Ref;

  struct Outcome {
    Ref ref{};
    bool failed = false;
    double value = 0.0;
  };

  struct RootOutcome {
    Outcome node;
    EdgeWeight root_weight;
    std::optional<double> value;
  };

  AndOrEngine(const Problem& problem, const SearchOptions& options, Graph& graph, Cache* cache)
      : problem_(problem),
        options_(options),
        graph_(graph),
        cache_(cache),
        state_(problem),
        propagator_(problem),
        weigher_(problem),
        order_(total_order(problem)),
        maximize_(problem.objective() == Objective::kMaximize) {
    if constexpr (Graph::kCaching) keys_.emplace(problem);
    for (const Variable& v : problem.variables()) {
      if (v.kind == VarKind::kAuxiliary) auxiliaries_.push_back(v.id);
    }
  }

  RootOutcome run() {
    start_ = std::chrono::steady_clock::now();
    RootOutcome out;
    PropagationResult res = propagator_.propagate(state_);
    if (!res.ok()) {
      out.node = fail_fresh();
    } else {
      out.root_weight = weigher_.weigh(weigher_.initial(), state_);
      out.node = expand(0);
      if (!out.node.failed) out.value = out.root_weight.weight * out.node.value;
    }
    stats_.elapsed_seconds = elapsed();
    return out;
  }

  const SearchStats& stats() const { return stats_; }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void tick() {
    if (options_.timeout_seconds > 0 && (++ticks_ & 1023u) == 0 &&
        elapsed() > options_.timeout_seconds) {
      throw SearchTimeout();
    }
  }

  Outcome fail_fresh() {
    ++stats_.failure_count;
    return {graph_.failure(), true, 0.0};
  }

  bool better(double candidate, double incumbent) const {
    return maximize_ ? candidate > incumbent : candidate < incumbent;
  }

  Outcome leaf() {
    for (VarId v : auxiliaries_) {
      if (!state_.is_assigned(v)) {
        throw UndeterminedAuxiliaryError("auxiliary variable '" + problem_.variable(v).name +
                                         "' is not fixed by propagation on a complete path");
      }
    }
    ++stats_.leaf_count;
    return {graph_.leaf(), false, 1.0};
  }

  // `state_` is stable on entry; every variable before `pos` is assigned.
  Outcome expand(std::size_t pos) {
    while (pos < order_.size() && state_.is_assigned(order_[pos])) ++pos;
    if (pos == order_.size()) return leaf();
    const VarId x = order_[pos];

    ContextKey key;
    if constexpr (Graph::kCaching) {
      key = keys_->build(state_, x);
      if (const CachedNode* hit = cache_->lookup(key)) {
        return {hit->node, hit->failed, hit->value};
      }
    }
    tick();
    ++stats_.nodes_expanded;

    const bool is_and = problem_.variable(x).kind == VarKind::kRandom;
    // Random variables only change by branching (propagation that would
    // shrink one fails instead), so only CPTs over x can fire on these edges.
    PendingFactors pending;
    pending.utility_fired = state_.is_assigned(problem_.utility_variable());
    for (int c : weigher_.cpts_of(x)) {
      if (!fully_assigned(c)) pending.cpts.push_back(c);
    }

    auto builder = graph_.begin(is_and ? NodeKind::kAnd : NodeKind::kOr, x);
    bool any = false;
    double value = 0.0;
    for (int label : state_.values(x)) {
      DomainState::Mark mark = state_.checkpoint();
      Outcome child;
      EdgeWeight w;
      PropagationResult res = propagator_.assign_and_propagate(state_, x, label);
      if (!res.ok()) {
        child = fail_fresh();
      } else {
        w = weigher_.weigh(pending, state_);
        if (options_.prune_zero_weight && w.weight == 0.0) {
          child = {graph_.leaf(), false, 1.0};
        } else {
          child = expand(pos + 1);
        }
      }
      state_.restore(mark);
      // a failed observation fails the And node; not cached
      if (child.failed && is_and) return fail_fresh();
      graph_.add_edge(builder, label, w, child.ref);
      if (child.failed) continue;
      const double contribution = w.weight * child.value;
      if (!any) {
        value = contribution;
      } else if (is_and) {
        value += contribution;
      } else if (better(contribution, value)) {
        value = contribution;
      }
      any = true;
    }

    Outcome out = any ? Outcome{graph_.finish(builder, value), false, value} : fail_fresh();
    if constexpr (Graph::kCaching) cache_->store(key, CachedNode{out.ref, out.failed, out.value});
    return out;
  }

  bool fully_assigned(int cpt) const {
    const Cpt& c = problem_.cpts()[cpt];
    if (!state_.is_assigned(c.child)) return false;
    for (VarId p : c.parents) {
      if (!state_.is_assigned(p)) return false;
    }
    return true;
  }

  const Problem& problem_;
  SearchOptions options_;
  Graph& graph_;
  Cache* cache_;
  DomainState state_;
  Propagator propagator_;
  EdgeWeigher weigher_;
  std::optional<ContextKeyBuilder> keys_;
  std::vector<VarId> order_;
  std::vector<VarId> auxiliaries_;
  bool maximize_;
  SearchStats stats_;
  std::chrono::steady_clock::time_point start_;
  unsigned ticks_ = 0;
};

}  // namespace fscp::internal

#endif  // FSCP_SRC_AND_OR_ENGINE_H_
