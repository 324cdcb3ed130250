#include <catch_amalgamated.hpp>

#include "fixtures.h"
#include "fscp/bench.h"
#include "fscp/compile.h"
#include "fscp/diagram.h"
#include "json.hpp"
#include "random_instances.h"

using namespace fscp;

namespace {

EdgeWeight weight(double w) {
  EdgeWeight e;
  e.weight = w;
  e.probability = w;
  return e;
}

Problem two_decision_problem() {
  ProblemBuilder b("tiny");
  VarId d = b.add_decision("d", {1, 2}, 1);
  VarId u = b.add_auxiliary("U", {1, 2});
  b.add_linear({{1, u}, {-1, d}}, Relation::kEq, 0);
  b.set_utility(u);
  return b.build();
}

}  // namespace

TEST_CASE("evaluate examples", "[diagram][evaluate]") {
  SECTION("single leaf") {
    Aodd dd;
    dd.set_root(dd.add_leaf());
    CHECK(evaluate(dd, Objective::kMaximize) == 1.0);
    GraphShape s = stats(dd);
    CHECK(s.nodes == 1);
    CHECK(s.edges == 0);
  }
  SECTION("Or root over two weighted leaves") {
    Aodd dd;
    NodeId a = dd.add_leaf();
    NodeId b = dd.add_leaf();
    NodeId root = dd.add_node(NodeKind::kOr, 0, 3.0, {{1, weight(2.0), a}, {2, weight(3.0), b}});
    dd.set_root(root);
    CHECK(evaluate(dd, Objective::kMaximize) == 3.0);
    CHECK(evaluate(dd, Objective::kMinimize) == 2.0);
    CHECK(evaluate_unfolded(dd, Objective::kMaximize) == 3.0);
  }
  SECTION("failures") {
    Aodd dd;
    NodeId leaf = dd.add_leaf();
    NodeId fail = dd.add_failure();
    NodeId or_node = dd.add_node(NodeKind::kOr, 0, 0.5, {{0, weight(1.0), fail}, {1, weight(0.5), leaf}});
    dd.set_root(or_node);
    CHECK(evaluate(dd, Objective::kMaximize) == 0.5);
    Aodd all_fail;
    NodeId f = all_fail.add_failure();
    all_fail.set_root(all_fail.add_node(NodeKind::kAnd, 0, 0.0, {{0, weight(1.0), f}}));
    CHECK_FALSE(evaluate(all_fail, Objective::kMaximize).has_value());
  }
  SECTION("structural errors") {
    Aodd unset;
    unset.add_leaf();
    CHECK_THROWS_AS(evaluate(unset, Objective::kMaximize), AoddStructureError);
    Aodd dangling;
    dangling.set_root(dangling.add_node(NodeKind::kOr, 0, 0.0, {{0, weight(1.0), 7}}));
    CHECK_THROWS_AS(evaluate(dangling, Objective::kMaximize), AoddStructureError);
    CHECK_THROWS_AS(stats(dangling), AoddStructureError);
    Aodd cyclic;
    NodeId a = cyclic.add_node(NodeKind::kOr, 0, 0.0, {{0, weight(1.0), 1}});
    cyclic.add_node(NodeKind::kOr, 0, 0.0, {{0, weight(1.0), a}});
    cyclic.set_root(a);
    CHECK_THROWS_AS(evaluate(cyclic, Objective::kMaximize), AoddStructureError);
    CHECK_THROWS_AS(unfolded_size(cyclic), AoddStructureError);
  }
  SECTION("root weight scales the value") {
    Aodd dd;
    EdgeWeight w;
    w.weight = 4.0;
    w.utility = 4;
    dd.set_root(dd.add_leaf(), w);
    CHECK(evaluate(dd, Objective::kMaximize) == 4.0);
  }
}

TEST_CASE("compiled diagrams re-evaluate exactly", "[diagram][evaluate]") {
  std::vector<Problem> problems{gen_production(2, 1), gen_production(3, 2),
                                generate({Family::kInvestment, Variant::kChain, 2, 3, 0.6})};
  for (std::uint64_t seed = 0; seed < 150; ++seed) problems.push_back(testing::random_instance(seed));
  for (const Problem& p : problems) {
    CompileResult c = compile_aodd(p);
    CHECK(evaluate(c.dd, p.objective()) == c.value);
    CHECK(c.dd.stored_value() == c.value);
    CHECK(evaluate_unfolded(c.dd, p.objective()) == c.value);
    // compacted: root first, every node reachable
    CHECK(c.dd.root() == 0);
    CHECK(stats(c.dd).nodes == c.dd.size());
    for (const AoddNode& n : c.dd.nodes()) {
      if (n.kind == NodeKind::kAnd) {
        for (const AoddEdge& e : n.edges) CHECK(c.dd.node(e.child).kind != NodeKind::kFailure);
      }
      for (std::size_t i = 1; i < n.edges.size(); ++i) CHECK(n.edges[i - 1].label < n.edges[i].label);
    }
  }
}

TEST_CASE("extract_policy", "[diagram][policy]") {
  SECTION("argmax decision") {
    Problem p = two_decision_problem();
    PolicyTree t = extract_policy(compile_aodd(p).dd, p.objective());
    REQUIRE(t.nodes[t.root].kind == PolicyNode::Kind::kDecision);
    REQUIRE(t.nodes[t.root].branches.size() == 1);
    CHECK(t.nodes[t.root].branches[0].first == 2);
    const PolicyNode& leaf = t.nodes[t.nodes[t.root].branches[0].second];
    CHECK(leaf.kind == PolicyNode::Kind::kLeaf);
    CHECK(leaf.utility == 2.0);
    CHECK(leaf.probability == 1.0);
  }
  SECTION("ties go to the smallest value") {
    ProblemBuilder b;
    VarId d = b.add_decision("d", {3, 5, 7}, 1);
    VarId u = b.add_auxiliary("U", {1});
    b.add_linear({{1, u}, {0, d}}, Relation::kEq, 1);
    b.add_linear({{1, d}}, Relation::kGe, 0);
    b.set_utility(u);
    Problem p = b.build();
    PolicyTree t = extract_policy(compile_aodd(p).dd, p.objective());
    CHECK(t.nodes[t.root].branches[0].first == 3);
  }
  SECTION("production: V2 depends on S1") {
    Problem p = gen_production(2, 1);
    PolicyTree t = extract_policy(compile_aodd(p).dd, p.objective());
    CHECK(check_policy_shape(t, p).empty());
    const PolicyNode& v1 = t.nodes[t.root];
    REQUIRE(p.variable(v1.var).name == "V1");
    CHECK(v1.branches[0].first == 2);
    const PolicyNode& s1 = t.nodes[v1.branches[0].second];
    REQUIRE(s1.branches.size() == 2);
    int v2_after_low = t.nodes[s1.branches[0].second].branches[0].first;
    int v2_after_high = t.nodes[s1.branches[1].second].branches[0].first;
    CHECK(v2_after_low != v2_after_high);
  }
  SECTION("infeasible diagram") {
    Aodd dd;
    dd.set_root(dd.add_failure());
    CHECK_THROWS_AS(extract_policy(dd, Objective::kMaximize), AoddStructureError);
  }
  SECTION("random instances give well-formed policies") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Problem p = testing::random_instance(seed);
      CompileResult c = compile_aodd(p);
      if (!c.feasible()) continue;
      PolicyTree t = extract_policy(c.dd, p.objective());
      INFO("seed " << seed);
      CHECK(check_policy_shape(t, p).empty());
    }
  }
}

TEST_CASE("check_policy_shape finds defects", "[diagram][policy]") {
  Problem p = two_decision_problem();
  PolicyTree t;
  t.nodes.resize(3);
  t.nodes[0].kind = PolicyNode::Kind::kDecision;
  t.nodes[0].var = 0;
  t.nodes[0].branches = {{1, 1}, {2, 2}};
  t.root = 0;
  CHECK_FALSE(check_policy_shape(t, p).empty());
  t.nodes[0].branches = {{9, 1}};
  CHECK_FALSE(check_policy_shape(t, p).empty());
  t.nodes[0].branches = {{2, 1}};
  CHECK(check_policy_shape(t, p).empty());
  t.nodes[0].kind = PolicyNode::Kind::kRandom;
  CHECK_FALSE(check_policy_shape(t, p).empty());
}

TEST_CASE("stats compare modes", "[diagram][stats]") {
  Problem p = gen_production(2, 1);
  CompileResult c = compile_aodd(p);
  TreeResult t = solve_tree(p);
  GraphShape s = stats(c.dd);
  CHECK(s.nodes < t.shape.nodes);
  CHECK(s.nodes == s.and_nodes + s.or_nodes + s.leaves + s.failures);
}

TEST_CASE("to_dot", "[diagram][dot]") {
  Problem p = two_decision_problem();
  SECTION("single leaf") {
    Aodd dd;
    dd.set_root(dd.add_leaf());
    std::string dot = to_dot(dd, p);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(std::count(dot.begin(), dot.end(), '[') == 1);
    CHECK(dot.find("->") == std::string::npos);
  }
  SECTION("failure node and edge labels") {
    Aodd dd;
    NodeId leaf = dd.add_leaf();
    NodeId fail = dd.add_failure();
    EdgeWeight w;
    w.weight = 0.25;
    w.probability = 0.25;
    dd.set_root(dd.add_node(NodeKind::kOr, 0, 0.25, {{1, weight(1.0), fail}, {2, w, leaf}}));
    std::string dot = to_dot(dd, p);
    CHECK(dot.find("shape=diamond") != std::string::npos);
    CHECK(dot.find("color=red") != std::string::npos);
    CHECK(dot.find("label=\"2 / 0.25\"") != std::string::npos);
    CHECK(dot.find("shape=circle, label=\"d\\n0.25\"") != std::string::npos);
  }
  SECTION("And nodes are double circles; output is deterministic") {
    Problem q = gen_production(2, 1);
    CompileResult c = compile_aodd(q);
    std::string dot = to_dot(c.dd, q);
    CHECK(dot.find("doublecircle") != std::string::npos);
    CHECK(dot == to_dot(compile_aodd(q).dd, q));
    CHECK(dot.back() == '\n');
  }
}

TEST_CASE("policy_to_json", "[diagram][policy]") {
  Problem p = testing::single_random();
  PolicyTree t = extract_policy(compile_aodd(p).dd, p.objective());
  auto j = nlohmann::json::parse(policy_to_json(t, p));
  CHECK(j["var"] == "s");
  CHECK(j["branches"]["1"]["utility"] == 1.0);
  CHECK(j["branches"]["2"]["probability"] == 0.7);

  Problem q = two_decision_problem();
  auto k = nlohmann::json::parse(policy_to_json(extract_policy(compile_aodd(q).dd, q.objective()), q));
  CHECK(k["var"] == "d");
  CHECK(k["value"] == 2);
  CHECK(k["child"]["utility"] == 2.0);
}
