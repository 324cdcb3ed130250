// And-Or decision diagrams: storage, evaluation, policy extraction,
// statistics and DOT export.

#ifndef FSCP_DIAGRAM_H_
#define FSCP_DIAGRAM_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fscp/model.h"
#include "fscp/search.h"

namespace fscp {

using NodeId = int;

enum class NodeKind { kAnd, kOr, kLeaf, kFailure };

const char* to_string(NodeKind kind);

struct AoddEdge {
  int label = 0;  // value assigned to the branching variable
  EdgeWeight weight;
  NodeId child = -1;

  bool zero_weight() const { return weight.weight == 0.0; }
};

struct AoddNode {
  NodeKind kind = NodeKind::kLeaf;
  VarId var = -1;      // branching variable of And/Or nodes
  double value = 0.0;  // 1 for leaves; meaningless for failures
  std::vector<AoddEdge> edges;  // ascending label order
};

class AoddStructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nodes live in an arena and refer to each other by index. The diagram's
// value is root_weight().weight * node(root()).value; the root weight holds
// whatever fired before the first branching (usually 1).
class Aodd {
 public:
  NodeId add_leaf();
  NodeId add_failure();
  NodeId add_node(NodeKind kind, VarId var, double value, std::vector<AoddEdge> edges);
  void set_root(NodeId root, EdgeWeight root_weight = {});

  NodeId root() const { return root_; }
  const EdgeWeight& root_weight() const { return root_weight_; }
  const AoddNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<AoddNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool feasible() const;
  // Value stored at compile time; nullopt for an infeasible diagram.
  std::optional<double> stored_value() const;

  // Copy holding only nodes reachable from the root, numbered in
  // breadth-first order from the root (root = 0).
  Aodd compacted() const;

 private:
  std::vector<AoddNode> nodes_;
  NodeId root_ = -1;
  EdgeWeight root_weight_;
};

// Recomputes every node value bottom-up, memoized over the DAG. Returns
// nullopt when the root fails. Throws AoddStructureError on cycles, dangling
// references or an unset root.
std::optional<double> evaluate(const Aodd& dd, Objective objective);

// Expands the diagram as a tree and solves it without memoization. The
// result must equal evaluate(); exponential, for tests on small diagrams.
std::optional<double> evaluate_unfolded(const Aodd& dd, Objective objective);
// Node count of the tree obtained by expanding shared nodes.
std::uint64_t unfolded_size(const Aodd& dd);

GraphShape stats(const Aodd& dd);

struct PolicyNode {
  enum class Kind { kDecision, kRandom, kLeaf };
  Kind kind = Kind::kLeaf;
  VarId var = -1;
  // Decision: exactly one (chosen value, child). Random: one per kept value.
  std::vector<std::pair<int, int>> branches;
  double utility = 0.0;      // leaves
  double probability = 0.0;  // leaves: product of fired CPT entries on the path
};

struct PolicyTree {
  std::vector<PolicyNode> nodes;
  int root = -1;
};

// Follows the optimal choice at Or nodes (ties toward the smallest value)
// and every positive-probability branch at And nodes, unfolding shared nodes.
// Throws AoddStructureError for an infeasible diagram.
PolicyTree extract_policy(const Aodd& dd, Objective objective);

// Shape violations: decision nodes with other than one child, random nodes
// with repeated values, values outside domains, kinds that do not match the
// variable, or paths that break total_order. Empty when well formed.
std::vector<std::string> check_policy_shape(const PolicyTree& policy, const Problem& problem);

// Or nodes are circles, And nodes double circles, failures red diamonds.
// Edges read "label / weight" with 6 significant digits.
std::string to_dot(const Aodd& dd, const Problem& problem);

// Nested JSON: decision {var, value, child}, random {var, branches}, leaf
// {utility, probability}.
std::string policy_to_json(const PolicyTree& policy, const Problem& problem);

}  // namespace fscp

#endif  // FSCP_DIAGRAM_H_
