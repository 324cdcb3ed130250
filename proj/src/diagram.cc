#include "fscp/diagram.h"

#include <cstdio>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fscp {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kAnd: return "and";
    case NodeKind::kOr: return "or";
    case NodeKind::kLeaf: return "leaf";
    case NodeKind::kFailure: return "failure";
  }
  return "?";
}

NodeId Aodd::add_leaf() {
  nodes_.push_back(AoddNode{NodeKind::kLeaf, -1, 1.0, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Aodd::add_failure() {
  nodes_.push_back(AoddNode{NodeKind::kFailure, -1, 0.0, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Aodd::add_node(NodeKind kind, VarId var, double value, std::vector<AoddEdge> edges) {
  nodes_.push_back(AoddNode{kind, var, value, std::move(edges)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Aodd::set_root(NodeId root, EdgeWeight root_weight) {
  root_ = root;
  root_weight_ = root_weight;
}

bool Aodd::feasible() const {
  return root_ >= 0 && root_ < static_cast<NodeId>(nodes_.size()) &&
         nodes_[root_].kind != NodeKind::kFailure;
}

std::optional<double> Aodd::stored_value() const {
  if (!feasible()) return std::nullopt;
  return root_weight_.weight * nodes_[root_].value;
}

Aodd Aodd::compacted() const {
  Aodd out;
  if (root_ < 0 || root_ >= static_cast<NodeId>(nodes_.size())) {
    throw AoddStructureError("compacted: root is not set");
  }
  std::vector<NodeId> remap(nodes_.size(), -1);
  std::vector<NodeId> order{root_};
  remap[root_] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const AoddEdge& e : nodes_[order[i]].edges) {
      if (e.child < 0 || e.child >= static_cast<NodeId>(nodes_.size())) {
        throw AoddStructureError("compacted: dangling edge");
      }
      if (remap[e.child] < 0) {
        remap[e.child] = static_cast<NodeId>(order.size());
        order.push_back(e.child);
      }
    }
  }
  out.nodes_.reserve(order.size());
  for (NodeId old : order) {
    AoddNode n = nodes_[old];
    for (AoddEdge& e : n.edges) e.child = remap[e.child];
    out.nodes_.push_back(std::move(n));
  }
  out.root_ = 0;
  out.root_weight_ = root_weight_;
  return out;
}

namespace {

void check_root(const Aodd& dd) {
  if (dd.root() < 0 || dd.root() >= static_cast<NodeId>(dd.size())) {
    throw AoddStructureError("diagram root is not set");
  }
}

struct Evaluator {
  const Aodd& dd;
  bool maximize;
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<char> color;
  std::vector<double> value;
  std::vector<char> failed;

  bool visit(NodeId id) {
    if (id < 0 || id >= static_cast<NodeId>(dd.size())) {
      throw AoddStructureError("dangling edge to node " + std::to_string(id));
    }
    if (color[id] == 2) return !failed[id];
    if (color[id] == 1) throw AoddStructureError("cycle through node " + std::to_string(id));
    color[id] = 1;
    const AoddNode& n = dd.node(id);
    bool ok = true;
    double v = 0.0;
    switch (n.kind) {
      case NodeKind::kLeaf: v = 1.0; break;
      case NodeKind::kFailure: ok = false; break;
      case NodeKind::kAnd:
      case NodeKind::kOr: {
        bool any = false;
        for (const AoddEdge& e : n.edges) {
          bool child_ok = visit(e.child);
          if (!child_ok) {
            if (n.kind == NodeKind::kAnd) ok = false;
            continue;
          }
          double c = e.weight.weight * value[e.child];
          if (!any) {
            v = c;
          } else if (n.kind == NodeKind::kAnd) {
            v += c;
          } else if (maximize ? c > v : c < v) {
            v = c;
          }
          any = true;
        }
        if (!any) ok = false;
        break;
      }
    }
    color[id] = 2;
    value[id] = v;
    failed[id] = !ok;
    return ok;
  }
};

std::optional<double> unfolded_value(const Aodd& dd, NodeId id, bool maximize) {
  const AoddNode& n = dd.node(id);
  if (n.kind == NodeKind::kLeaf) return 1.0;
  if (n.kind == NodeKind::kFailure) return std::nullopt;
  std::optional<double> best;
  double sum = 0.0;
  for (const AoddEdge& e : n.edges) {
    std::optional<double> c = unfolded_value(dd, e.child, maximize);
    if (!c) {
      if (n.kind == NodeKind::kAnd) return std::nullopt;
      continue;
    }
    double contribution = e.weight.weight * *c;
    if (!best) {
      best = contribution;
      sum = contribution;
    } else if (n.kind == NodeKind::kAnd) {
      sum += contribution;
    } else if (maximize ? contribution > *best : contribution < *best) {
      best = contribution;
    }
  }
  if (!best) return std::nullopt;
  return n.kind == NodeKind::kAnd ? sum : *best;
}

}  // namespace

std::optional<double> evaluate(const Aodd& dd, Objective objective) {
  check_root(dd);
  Evaluator ev{dd, objective == Objective::kMaximize,
               std::vector<char>(dd.size(), 0), std::vector<double>(dd.size(), 0.0),
               std::vector<char>(dd.size(), 0)};
  if (!ev.visit(dd.root())) return std::nullopt;
  return dd.root_weight().weight * ev.value[dd.root()];
}

std::optional<double> evaluate_unfolded(const Aodd& dd, Objective objective) {
  check_root(dd);
  std::optional<double> v = unfolded_value(dd, dd.root(), objective == Objective::kMaximize);
  if (!v) return std::nullopt;
  return dd.root_weight().weight * *v;
}

std::uint64_t unfolded_size(const Aodd& dd) {
  check_root(dd);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> size(dd.size(), 0);
  // children precede parents in reverse breadth-first order only for
  // compacted diagrams, so use an explicit post-order instead
  std::vector<char> state(dd.size(), 0);
  std::vector<std::pair<NodeId, std::size_t>> stack{{dd.root(), 0}};
  state[dd.root()] = 1;
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const AoddNode& n = dd.node(id);
    if (next < n.edges.size()) {
      NodeId c = n.edges[next++].child;
      if (c < 0 || c >= static_cast<NodeId>(dd.size())) throw AoddStructureError("dangling edge");
      if (state[c] == 1) throw AoddStructureError("cycle in diagram");
      if (state[c] == 0) {
        state[c] = 1;
        stack.push_back({c, 0});
      }
      continue;
    }
    std::uint64_t s = 1;
    for (const AoddEdge& e : n.edges) s = size[e.child] > kMax - s ? kMax : s + size[e.child];
    size[id] = s;
    state[id] = 2;
    stack.pop_back();
  }
  return size[dd.root()];
}

GraphShape stats(const Aodd& dd) {
  check_root(dd);
  GraphShape s;
  std::vector<char> seen(dd.size(), 0);
  std::vector<NodeId> queue{dd.root()};
  seen[dd.root()] = 1;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const AoddNode& n = dd.node(queue[i]);
    ++s.nodes;
    s.edges += n.edges.size();
    switch (n.kind) {
      case NodeKind::kAnd: ++s.and_nodes; break;
      case NodeKind::kOr: ++s.or_nodes; break;
      case NodeKind::kLeaf: ++s.leaves; break;
      case NodeKind::kFailure: ++s.failures; break;
    }
    for (const AoddEdge& e : n.edges) {
      if (e.child < 0 || e.child >= static_cast<NodeId>(dd.size())) throw AoddStructureError("dangling edge");
      if (!seen[e.child]) {
        seen[e.child] = 1;
        queue.push_back(e.child);
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Policies

namespace {

struct PolicyBuilder {
  const Aodd& dd;
  bool maximize;
  PolicyTree tree;

  int build(NodeId id, double probability, std::optional<std::int64_t> utility) {
    const AoddNode& n = dd.node(id);
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    switch (n.kind) {
      case NodeKind::kFailure:
        throw AoddStructureError("policy reaches a failure node");
      case NodeKind::kLeaf: {
        PolicyNode& leaf = tree.nodes[index];
        leaf.kind = PolicyNode::Kind::kLeaf;
        leaf.probability = probability;
        leaf.utility = utility ? static_cast<double>(*utility) : 0.0;
        return index;
      }
      case NodeKind::kOr: {
        const AoddEdge* best = nullptr;
        double best_value = 0.0;
        for (const AoddEdge& e : n.edges) {
          const AoddNode& c = dd.node(e.child);
          if (c.kind == NodeKind::kFailure) continue;
          double v = e.weight.weight * c.value;
          if (!best || (maximize ? v > best_value : v < best_value)) {
            best = &e;
            best_value = v;
          }
        }
        if (!best) throw AoddStructureError("or node without a feasible child");
        tree.nodes[index].kind = PolicyNode::Kind::kDecision;
        tree.nodes[index].var = n.var;
        int child = build(best->child, probability * best->weight.probability,
                          best->weight.utility ? best->weight.utility : utility);
        tree.nodes[index].branches.emplace_back(best->label, child);
        return index;
      }
      case NodeKind::kAnd: {
        tree.nodes[index].kind = PolicyNode::Kind::kRandom;
        tree.nodes[index].var = n.var;
        for (const AoddEdge& e : n.edges) {
          if (e.weight.probability == 0.0) continue;
          int child = build(e.child, probability * e.weight.probability,
                            e.weight.utility ? e.weight.utility : utility);
          tree.nodes[index].branches.emplace_back(e.label, child);
        }
        return index;
      }
    }
    return index;
  }
};

}  // namespace

PolicyTree extract_policy(const Aodd& dd, Objective objective) {
  check_root(dd);
  if (!dd.feasible()) throw AoddStructureError("cannot extract a policy from an infeasible diagram");
  PolicyBuilder b{dd, objective == Objective::kMaximize, {}};
  b.tree.root = b.build(dd.root(), dd.root_weight().probability, dd.root_weight().utility);
  return std::move(b.tree);
}

std::vector<std::string> check_policy_shape(const PolicyTree& policy, const Problem& problem) {
  std::vector<std::string> issues;
  std::vector<int> position(problem.num_variables(), -1);
  std::vector<VarId> order = total_order(problem);
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);
  const int n = static_cast<int>(policy.nodes.size());
  if (policy.root < 0 || policy.root >= n) return {"root is not set"};

  std::vector<std::pair<int, int>> stack{{policy.root, -1}};  // (node, last position)
  std::vector<int> visits(n, 0);
  while (!stack.empty()) {
    auto [id, last] = stack.back();
    stack.pop_back();
    std::string where = "node " + std::to_string(id);
    if (++visits[id] > 1) {
      issues.push_back(where + ": reached twice (not a tree)");
      continue;
    }
    const PolicyNode& node = policy.nodes[id];
    if (node.kind == PolicyNode::Kind::kLeaf) {
      if (!node.branches.empty()) issues.push_back(where + ": leaf has children");
      continue;
    }
    if (node.var < 0 || node.var >= problem.num_variables()) {
      issues.push_back(where + ": unknown variable");
      continue;
    }
    const Variable& var = problem.variable(node.var);
    bool decision = node.kind == PolicyNode::Kind::kDecision;
    if (decision && var.kind != VarKind::kDecision) issues.push_back(where + ": '" + var.name + "' is not a decision variable");
    if (!decision && var.kind != VarKind::kRandom) issues.push_back(where + ": '" + var.name + "' is not a random variable");
    if (position[node.var] <= last) issues.push_back(where + ": '" + var.name + "' breaks the variable order");
    if (decision && node.branches.size() != 1) issues.push_back(where + ": decision node must have exactly one child");
    if (!decision && node.branches.empty()) issues.push_back(where + ": random node has no branches");
    std::set<int> labels;
    for (const auto& [value, child] : node.branches) {
      if (!std::binary_search(var.domain.begin(), var.domain.end(), value)) {
        issues.push_back(where + ": value " + std::to_string(value) + " outside the domain of '" + var.name + "'");
      }
      if (!labels.insert(value).second) issues.push_back(where + ": repeated value " + std::to_string(value));
      if (child < 0 || child >= n) {
        issues.push_back(where + ": dangling child");
        continue;
      }
      stack.push_back({child, position[node.var]});
    }
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const Aodd& dd, const Problem& problem) {
  std::ostringstream out;
  out << "digraph aodd {\n";
  if (dd.root() >= 0 && dd.root_weight().weight != 1.0) {
    out << "  label=\"root weight " << sig6(dd.root_weight().weight) << "\";\n";
  }
  for (std::size_t i = 0; i < dd.size(); ++i) {
    const AoddNode& n = dd.node(static_cast<NodeId>(i));
    out << "  n" << i << " [";
    switch (n.kind) {
      case NodeKind::kOr:
      case NodeKind::kAnd:
        out << "shape=" << (n.kind == NodeKind::kOr ? "circle" : "doublecircle") << ", label=\""
            << escape(problem.variable(n.var).name) << "\\n" << sig6(n.value) << "\"";
        break;
      case NodeKind::kLeaf:
        out << "shape=box, label=\"" << sig6(n.value) << "\"";
        break;
      case NodeKind::kFailure:
        out << "shape=diamond, color=red, style=filled, fillcolor=red, label=\"\"";
        break;
    }
    out << "];\n";
  }
  for (std::size_t i = 0; i < dd.size(); ++i) {
    for (const AoddEdge& e : dd.node(static_cast<NodeId>(i)).edges) {
      out << "  n" << i << " -> n" << e.child << " [label=\"" << e.label << " / "
          << sig6(e.weight.weight) << "\"";
      if (e.zero_weight()) out << ", style=dashed";
      out << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

namespace {

nlohmann::ordered_json policy_json(const PolicyTree& policy, int id, const Problem& problem) {
  const PolicyNode& n = policy.nodes.at(id);
  nlohmann::ordered_json j;
  switch (n.kind) {
    case PolicyNode::Kind::kLeaf:
      j["utility"] = n.utility;
      j["probability"] = n.probability;
      break;
    case PolicyNode::Kind::kDecision:
      j["var"] = problem.variable(n.var).name;
      j["value"] = n.branches.at(0).first;
      j["child"] = policy_json(policy, n.branches.at(0).second, problem);
      break;
    case PolicyNode::Kind::kRandom: {
      j["var"] = problem.variable(n.var).name;
      nlohmann::ordered_json branches = nlohmann::ordered_json::object();
      for (const auto& [value, child] : n.branches) {
        branches[std::to_string(value)] = policy_json(policy, child, problem);
      }
      j["branches"] = std::move(branches);
      break;
    }
  }
  return j;
}

}  // namespace

std::string policy_to_json(const PolicyTree& policy, const Problem& problem) {
  return policy_json(policy, policy.root, problem).dump(2) + "\n";
}

}  // namespace fscp
