#include <catch_amalgamated.hpp>
#include <cmath>

#include "fixtures.h"
#include "fscp/bench.h"
#include "fscp/compile.h"
#include "fscp/oracle.h"
#include "fscp/search.h"
#include "random_instances.h"

using namespace fscp;
using Catch::Matchers::WithinAbs;

namespace {

// Same problem with U' = -U and the objective sense swapped.
Problem negated(const Problem& p) {
  std::vector<Variable> vars = p.variables();
  const Variable& u = p.variable(p.utility_variable());
  Variable neg{static_cast<VarId>(vars.size()), u.name + "_neg", VarKind::kAuxiliary, {}, 0};
  for (auto it = u.domain.rbegin(); it != u.domain.rend(); ++it) neg.domain.push_back(-*it);
  vars.push_back(neg);
  std::vector<Constraint> cons = p.constraints();
  cons.push_back(Constraint{LinearConstraint{{{1, neg.id}, {1, u.id}}, Relation::kEq, 0}});
  Objective flipped = p.objective() == Objective::kMaximize ? Objective::kMinimize : Objective::kMaximize;
  return Problem(p.name(), vars, p.cpts(), cons, neg.id, flipped);
}

// Three chained random variables, no constraint besides the utility sum.
Problem pure_random() {
  ProblemBuilder b;
  VarId a = b.add_random("a", {0, 1}, 1);
  VarId c = b.add_random("c", {0, 1, 2}, 2);
  VarId e = b.add_random("e", {1, 2}, 3);
  b.add_prior(a, {0.2, 0.8});
  b.add_cpt(c, {a}, {{0.1, 0.3, 0.6}, {0.5, 0.25, 0.25}});
  b.add_cpt(e, {c}, {{0.9, 0.1}, {0.4, 0.6}, {0.3, 0.7}});
  VarId u = b.add_auxiliary("U", {1, 2, 3, 4, 5});
  b.add_linear({{1, u}, {-1, a}, {-1, c}, {-1, e}}, Relation::kEq, 0);
  b.set_utility(u);
  return b.build();
}

void leaf_probabilities(const Aodd& dd, NodeId id, double p, std::vector<double>& out) {
  const AoddNode& n = dd.node(id);
  if (n.kind == NodeKind::kLeaf) {
    out.push_back(p);
    return;
  }
  for (const AoddEdge& e : n.edges) leaf_probabilities(dd, e.child, p * e.weight.probability, out);
}

}  // namespace

TEST_CASE("solve_tree examples", "[search]") {
  SECTION("single decision, maximize") {
    TreeResult r = solve_tree(testing::single_decision());
    REQUIRE(r.feasible());
    CHECK(*r.value == 2.0);
  }
  SECTION("single decision, minimize") {
    CHECK(*solve_tree(testing::single_decision(Objective::kMinimize)).value == 1.0);
  }
  SECTION("single random variable") {
    TreeResult r = solve_tree(testing::single_random());
    CHECK_THAT(*r.value, WithinAbs(1.7, 1e-12));
    CHECK(r.stats.leaf_count == 2);
  }
  SECTION("production planning equals the oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Problem p = gen_production(2, seed);
      TreeResult r = solve_tree(p);
      std::optional<double> o = enumerate(p);
      REQUIRE(r.feasible() == o.has_value());
      CHECK_THAT(*r.value, WithinAbs(*o, 1e-9));
    }
  }
}

TEST_CASE("edge weights", "[search][weight]") {
  Problem p = gen_production(2, 1);
  EdgeWeigher w(p);
  DomainState s(p);
  REQUIRE(propagate(s, p).ok());

  SECTION("nothing fires") {
    PendingFactors before = w.pending(s);
    REQUIRE(assign_and_propagate(s, *p.find_variable("V1"), 2, p).ok());
    EdgeWeight e = w.weigh(before, s);
    CHECK(e.weight == 1.0);
    CHECK_FALSE(e.utility_fired_now());
  }
  SECTION("prior of H1 fires alone") {
    VarId h1 = *p.find_variable("H1");
    PendingFactors before = w.pending(s);
    REQUIRE(assign_and_propagate(s, h1, 1, p).ok());
    EdgeWeight e = w.weigh(before, s);
    const Cpt& prior = p.cpts()[0];
    REQUIRE(prior.child == h1);
    CHECK(e.weight == prior.rows[0].dist[0].second);
    CHECK(edge_weight(before, s, p).weight == e.weight);
  }
  SECTION("probability and utility on one edge") {
    ProblemBuilder b;
    VarId d = b.add_decision("d", {1, 2}, 1);
    VarId x = b.add_random("x", {0, 1}, 1);
    b.add_prior(x, {0.5, 0.5});
    VarId u = b.add_auxiliary("U", {0, 1, 2, 3});
    b.add_linear({{1, u}, {-1, d}, {-1, x}}, Relation::kEq, 0);
    b.set_utility(u);
    Problem q = b.build();
    EdgeWeigher wq(q);
    DomainState t(q);
    REQUIRE(assign_and_propagate(t, d, 2, q).ok());
    PendingFactors before = wq.pending(t);
    REQUIRE(assign_and_propagate(t, x, 1, q).ok());
    EdgeWeight e = wq.weigh(before, t);
    CHECK(e.probability == 0.5);
    CHECK(e.utility == 3);
    CHECK(e.weight == 1.5);
    // the utility fires only once per path
    PendingFactors after = wq.pending(t);
    CHECK(after.utility_fired);
    CHECK(wq.weigh(after, t).weight == 1.0);
  }
}

TEST_CASE("failure handling", "[search][failure]") {
  SECTION("a failed decision is skipped by the Or node") {
    // d in {0,1}; s in {0,1}; s <= d. d = 0 fails by random reduction.
    ProblemBuilder b;
    VarId d = b.add_decision("d", {0, 1}, 1);
    VarId s = b.add_random("s", {0, 1}, 1);
    b.add_prior(s, {0.5, 0.5});
    b.add_linear({{1, s}, {-1, d}}, Relation::kLe, 0);
    VarId u = b.add_auxiliary("U", {0, 1, 2});
    b.add_linear({{1, u}, {1, d}, {-1, s}}, Relation::kEq, 1);
    b.set_utility(u);
    Problem p = b.build();
    TreeResult r = solve_tree(p);
    REQUIRE(r.feasible());
    // U = 1 - d + s at d = 1: 0.5 * 0 + 0.5 * 1
    CHECK(*r.value == 0.5);
    CHECK(r.stats.failure_count == 1);
  }
  SECTION("every decision failing makes the problem infeasible") {
    ProblemBuilder b;
    VarId d = b.add_decision("d", {0, 1}, 1);
    VarId s = b.add_random("s", {0, 1, 2}, 2);
    b.add_prior(s, {0.2, 0.3, 0.5});
    b.add_linear({{1, s}, {-1, d}}, Relation::kLe, 0);
    VarId u = b.add_auxiliary("U", {0, 1});
    b.add_linear({{1, u}, {-1, d}}, Relation::kEq, 0);
    b.set_utility(u);
    TreeResult r = solve_tree(b.build());
    CHECK_FALSE(r.feasible());
  }
  SECTION("a failed And child fails the And node immediately") {
    // s observed first, then d with d != s and d != 1 - s: no answer for
    // either observation, found only after branching.
    ProblemBuilder b;
    VarId s = b.add_random("s", {0, 1}, 1);
    VarId d = b.add_decision("d", {0, 1}, 2);
    b.add_prior(s, {0.4, 0.6});
    b.add_linear({{1, d}, {-1, s}}, Relation::kNe, 0);
    b.add_linear({{1, d}, {1, s}}, Relation::kNe, 1);
    VarId u = b.add_auxiliary("U", {0, 1});
    b.add_linear({{1, u}, {-1, d}}, Relation::kEq, 0);
    b.set_utility(u);
    Problem p = b.build();
    TreeResult r = solve_tree(p);
    CHECK_FALSE(r.feasible());
    // s = 0 fails, then the And node fails without trying s = 1
    CHECK(r.stats.failure_count == 2);
    CHECK(r.stats.nodes_expanded == 1);
    CHECK(r.stats.leaf_count == 0);
    CHECK_FALSE(enumerate(p).has_value());
  }
}

TEST_CASE("path products and normalization", "[search][property]") {
  Problem p = pure_random();
  Aodd tree = build_search_tree(p);
  std::vector<double> probs;
  leaf_probabilities(tree, tree.root(), tree.root_weight().probability, probs);
  CHECK(probs.size() == 12);
  double total = 0.0;
  for (double x : probs) total += x;
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  std::optional<double> v = solve_tree(p).value;
  CHECK_THAT(*v, WithinAbs(*enumerate(p), 1e-12));
}

TEST_CASE("objective duality", "[search][property]") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    Problem p = testing::random_instance(seed);
    TreeResult a = solve_tree(p);
    TreeResult b = solve_tree(negated(p));
    REQUIRE(a.feasible() == b.feasible());
    if (!a.feasible()) continue;
    CHECK_THAT(*b.value, WithinAbs(-*a.value, 1e-9));
    ++compared;
  }
  CHECK(compared > 30);
}

TEST_CASE("tree search agrees with the oracle", "[search][oracle]") {
  for (std::uint64_t seed = 1000; seed < 1150; ++seed) {
    Problem p = testing::random_instance(seed);
    TreeResult r = solve_tree(p);
    std::optional<double> o = enumerate(p);
    INFO("seed " << seed);
    REQUIRE(r.feasible() == o.has_value());
    if (o) CHECK_THAT(*r.value, WithinAbs(*o, 1e-9));
  }
}

TEST_CASE("search errors", "[search]") {
  SECTION("invalid problem") {
    ProblemBuilder b;
    b.add_decision("d", {0, 1}, 1);
    CHECK_THROWS_AS(solve_tree(b.build()), InvalidProblemError);
  }
  SECTION("auxiliary not fixed on a complete path") {
    ProblemBuilder b;
    VarId d = b.add_decision("d", {0, 1}, 1);
    VarId u = b.add_auxiliary("U", {0, 1});
    b.add_linear({{1, u}, {-1, d}}, Relation::kGe, 0);
    b.set_utility(u);
    CHECK_THROWS_AS(solve_tree(b.build()), UndeterminedAuxiliaryError);
  }
  SECTION("timeout") {
    Problem p = generate({Family::kKnapsack, Variant::kChain, 7, 42, 0.6});
    SearchOptions o;
    o.timeout_seconds = 0.05;
    CHECK_THROWS_AS(solve_tree(p, o), SearchTimeout);
  }
}

TEST_CASE("zero-weight pruning is opt-in", "[search]") {
  // U = d * s through a table; P(s = 0) = 0.
  ProblemBuilder b;
  VarId d = b.add_decision("d", {0, 1}, 1);
  VarId s = b.add_random("s", {0, 2}, 1);
  b.add_prior(s, {0.0, 1.0});
  VarId r = b.add_random("r", {0, 1}, 2);
  b.add_prior(r, {0.5, 0.5});
  VarId u = b.add_auxiliary("U", {0, 2});
  b.add_table({d, s, u}, {{0, 0, 0}, {0, 2, 0}, {1, 0, 0}, {1, 2, 2}});
  b.set_utility(u);
  Problem p = b.build();
  TreeResult plain = solve_tree(p);
  SearchOptions o;
  o.prune_zero_weight = true;
  TreeResult pruned = solve_tree(p, o);
  CHECK(*plain.value == 2.0);
  CHECK(*pruned.value == 2.0);
  CHECK(pruned.shape.nodes < plain.shape.nodes);
}
