// Acceptance checks. Prints one PASS/FAIL line per criterion; exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fscp/bench.h"
#include "fscp/cli.h"
#include "fscp/compile.h"
#include "fscp/constraints.h"
#include "fscp/diagram.h"
#include "fscp/oracle.h"
#include "fscp/search.h"
#include "json.hpp"
#include "random_instances.h"

using namespace fscp;

namespace {

constexpr double kOracleTolerance = 1e-9;
constexpr int kRandomInstances = 250;
constexpr std::uint64_t kFirstSeed = 7000;
constexpr double kC1Budget = 60.0;
constexpr double kC3Budget = 600.0;
constexpr double kC5Budget = 120.0;
constexpr double kC5TreeProbe = 20.0;
constexpr std::uint64_t kBenchSeed = 42;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct SizePoint {
  int stages;
  std::uint64_t tree_nodes;
  std::uint64_t dd_nodes;
  double ratio() const { return static_cast<double>(tree_nodes) / static_cast<double>(dd_nodes); }
};

SizePoint measure(Family family, Variant variant, int stages) {
  Problem p = generate({family, variant, stages, kBenchSeed, 0.6});
  CompileResult dd = compile_aodd(p);
  TreeResult tree = solve_tree(p);
  if (tree.value != dd.value) throw std::runtime_error("tree and diagram values differ");
  return {stages, tree.shape.nodes, stats(dd.dd).nodes};
}

std::string describe(const std::vector<SizePoint>& pts) {
  std::string out;
  for (const SizePoint& s : pts) {
    out += " s=" + std::to_string(s.stages) + ":" + std::to_string(s.tree_nodes) + "/" +
           std::to_string(s.dd_nodes) + "=" + fmt("%.2f", s.ratio());
  }
  return out;
}

bool strictly_increasing(const std::vector<SizePoint>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].ratio() > pts[i - 1].ratio())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  auto start = Clock::now();
  int feasible = 0, infeasible = 0, bad = 0;
  double worst = 0.0;
  std::string first_bad;
  for (int i = 0; i < kRandomInstances; ++i) {
    std::uint64_t seed = kFirstSeed + i;
    Problem p = testing::random_instance(seed);
    TreeResult tree = solve_tree(p);
    CompileResult dd = compile_aodd(p);
    std::optional<double> oracle = enumerate(p);
    bool ok = tree.feasible() == oracle.has_value() && dd.value == tree.value;
    if (ok && oracle) {
      double diff = std::abs(*tree.value - *oracle);
      worst = std::max(worst, diff);
      ok = diff <= kOracleTolerance;
    }
    if (!ok && bad++ == 0) first_bad = "seed " + std::to_string(seed);
    (oracle ? feasible : infeasible)++;
  }
  double t = since(start);
  std::string detail = std::to_string(kRandomInstances) + " instances (" + std::to_string(feasible) +
                       " feasible, " + std::to_string(infeasible) + " infeasible), max |tree-oracle| " +
                       fmt("%.3g", worst) + ", " + fmt("%.2f", t) + " s";
  if (bad) detail += ", " + std::to_string(bad) + " mismatches, first " + first_bad;
  return {bad == 0 && t < kC1Budget && feasible > 0 && infeasible > 0, detail};
}

Outcome criterion_2() {
  Problem p = gen_production(2, kBenchSeed);
  VarId h1 = *p.find_variable("H1");
  auto key_at = [&](int v2, int s2) {
    DomainState s(p);
    Propagator prop(p);
    if (!prop.propagate(s).ok()) throw std::runtime_error("root propagation failed");
    std::pair<const char*, int> path[] = {{"V1", 2}, {"S1", 1}, {"V2", v2}, {"S2", s2}};
    for (auto [name, value] : path) {
      if (!prop.assign_and_propagate(s, *p.find_variable(name), value).ok()) {
        throw std::runtime_error("path fails");
      }
    }
    return context_key(s, p, h1);
  };
  ContextKey a = key_at(2, 2), b = key_at(1, 2), c = key_at(2, 1), d = key_at(1, 1);
  std::vector<std::string> restricted;
  for (VarId v : a.restricted_variables(p)) {
    if (p.variable(v).kind != VarKind::kAuxiliary) restricted.push_back(p.variable(v).name);
  }
  bool scope_ok = restricted == std::vector<std::string>{"S1", "S2"};
  bool pairs_ok = a == b && c == d && !(a == c);
  CompileResult r = compile_aodd(p);
  std::uint64_t hits = r.cache.hits_by_var[h1];
  std::string names;
  for (const std::string& n : restricted) names += (names.empty() ? "" : ",") + n;
  return {scope_ok && pairs_ok && hits >= 2,
          "context at H1 = {" + names + "}, merge pairs equal: " + (pairs_ok ? "yes" : "no") +
              ", cache hits at H1 = " + std::to_string(hits)};
}

Outcome criterion_3() {
  auto start = Clock::now();
  std::vector<SizePoint> knapsack, investment;
  for (int s = 2; s <= 6; ++s) knapsack.push_back(measure(Family::kKnapsack, Variant::kChain, s));
  for (int s = 2; s <= 5; ++s) investment.push_back(measure(Family::kInvestment, Variant::kChain, s));
  double t = since(start);
  bool ok = strictly_increasing(knapsack) && strictly_increasing(investment) && t < kC3Budget;
  return {ok, "Knapsack-C" + describe(knapsack) + "; Investment-C" + describe(investment) + "; " +
                  fmt("%.1f", t) + " s"};
}

Outcome criterion_4() {
  SizePoint chain = measure(Family::kKnapsack, Variant::kChain, 4);
  SizePoint hidden = measure(Family::kKnapsack, Variant::kHidden, 4);
  return {hidden.ratio() < chain.ratio(),
          "stages=4 ratio Knapsack-H " + fmt("%.2f", hidden.ratio()) + " vs Knapsack-C " + fmt("%.2f", chain.ratio())};
}

Outcome criterion_5() {
  Problem p = generate({Family::kKnapsack, Variant::kChain, 15, kBenchSeed, 0.6});
  auto start = Clock::now();
  SearchOptions options;
  options.timeout_seconds = kC5Budget;
  CompileResult r = compile_aodd(p, options);
  double t = since(start);
  std::string tree_note;
  SearchOptions probe;
  probe.timeout_seconds = kC5TreeProbe;
  try {
    solve_tree(p, probe);
    tree_note = "tree mode finished";
  } catch (const SearchTimeout&) {
    tree_note = "tree mode timed out after " + fmt("%.0f", kC5TreeProbe) + " s";
  }
  return {r.feasible() && t < kC5Budget,
          "Knapsack-C 15 stages dd value " + fmt("%.6f", r.value.value_or(NAN)) + ", " +
              std::to_string(stats(r.dd).nodes) + " nodes, " + fmt("%.2f", t) + " s; " + tree_note};
}

Outcome criterion_6() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  std::string first_bad;
  for (int i = 0; i < kRandomInstances; ++i) {
    std::uint64_t seed = kFirstSeed + i;
    Problem p = testing::random_instance(seed);
    CompileResult dd = compile_aodd(p);
    if (!dd.feasible()) continue;
    ++checked;
    PolicyTree policy = extract_policy(dd.dd, p.objective());
    bool ok = check_policy_shape(policy, p).empty();
    if (ok) {
      double diff = std::abs(evaluate_policy(p, policy) - *dd.value);
      worst = std::max(worst, diff);
      ok = diff <= kOracleTolerance;
    }
    if (!ok && bad++ == 0) first_bad = "seed " + std::to_string(seed);
  }
  std::string detail = std::to_string(checked) + " feasible instances, max |policy-dd| " + fmt("%.3g", worst);
  if (bad) detail += ", " + std::to_string(bad) + " failures, first " + first_bad;
  return {bad == 0 && checked > 0, detail};
}

Outcome criterion_7() {
  std::vector<std::string> failed;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) failed.push_back(what);
  };

  // S1 <= V1, V1 decision, S1 random.
  ProblemBuilder b;
  VarId v1 = b.add_decision("V1", {1, 2}, 1);
  VarId s1 = b.add_random("S1", {1, 2}, 1);
  b.add_prior(s1, {0.5, 0.5});
  b.add_linear({{1, s1}, {-1, v1}}, Relation::kLe, 0);
  VarId u = b.add_auxiliary("U", {1, 2});
  b.add_linear({{1, u}, {-1, v1}}, Relation::kEq, 0);
  b.set_utility(u);
  Problem p = b.build();

  {
    DomainState s(p);
    s.assign(v1, 1);
    expect(propagate(s, p).status == PropagationStatus::kRandomReduction, "random reduction on propagate");
  }
  {
    DomainState s(p);
    expect(assign_and_propagate(s, v1, 1, p).status == PropagationStatus::kRandomReduction,
           "random reduction after a decision");
  }
  {
    DomainState s(p);
    PropagationResult r = assign_and_propagate(s, s1, 2, p);
    expect(r.ok() && s.values(s1) == std::vector<int>{2}, "branching on a random variable is exempt");
    expect(s.values(v1) == std::vector<int>{2}, "decision pruning is allowed");
  }
  {
    // V1 = 1 fails, so the Or node keeps only V1 = 2: U = 2.
    TreeResult r = solve_tree(p);
    expect(r.value == 2.0, "Or node skips a failed child");
  }
  {
    // s observed, then d with d != s and d != 1 - s: s = 0 fails after
    // branching, which fails the And node and the whole problem.
    ProblemBuilder q;
    VarId s = q.add_random("s", {0, 1}, 1);
    VarId d = q.add_decision("d", {0, 1}, 2);
    q.add_prior(s, {0.4, 0.6});
    q.add_linear({{1, d}, {-1, s}}, Relation::kNe, 0);
    q.add_linear({{1, d}, {1, s}}, Relation::kNe, 1);
    VarId uq = q.add_auxiliary("U", {0, 1});
    q.add_linear({{1, uq}, {-1, d}}, Relation::kEq, 0);
    q.set_utility(uq);
    Problem pq = q.build();
    TreeResult tr = solve_tree(pq);
    expect(!tr.feasible() && tr.stats.failure_count == 2 && tr.stats.leaf_count == 0,
           "failed And child fails the And node immediately");
    CompileResult cr = compile_aodd(pq);
    expect(!cr.feasible() && cr.cache.entries == 0, "And-child failure is not cached");
  }
  {
    // A failed Or node (every decision fails) is cached as a failure.
    ProblemBuilder q;
    VarId s = q.add_random("s", {0, 1}, 1);
    VarId x = q.add_random("x", {0, 1}, 2);
    VarId d = q.add_decision("d", {0, 1}, 3);
    q.add_prior(s, {0.5, 0.5});
    q.add_prior(x, {0.5, 0.5});
    q.add_table({d, s}, {{0, 0}, {1, 0}});
    VarId uq = q.add_auxiliary("U", {0, 1});
    q.add_linear({{1, uq}, {-1, d}}, Relation::kEq, 0);
    q.set_utility(uq);
    Problem pq = q.build();
    CompileResult cr = compile_aodd(pq);
    expect(!cr.feasible(), "GAC-detected failure makes the problem infeasible");
  }
  std::string detail = failed.empty() ? "all directed checks pass" : "failed:";
  for (const std::string& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string without_wall_time(const std::string& stats_text) {
  auto j = nlohmann::ordered_json::parse(stats_text);
  j.erase("elapsed_seconds");
  return j.dump();
}

Outcome criterion_8() {
  struct Files {
    std::string model, stats, dot, policy, out;
  };
  auto run_once = [](const std::string& tag, const std::vector<std::string>& gen_args,
                     const std::string& mode) {
    Files f;
    std::string prefix = "acceptance_" + tag + "_";
    std::string model = prefix + "model.json", stats = prefix + "stats.json", dot = prefix + "d.dot",
                policy = prefix + "policy.json";
    std::vector<std::string> gen = gen_args;
    gen.push_back("-o");
    gen.push_back(model);
    std::ostringstream out, err;
    if (run_cli(gen, out, err) != 0) throw std::runtime_error("gen failed: " + err.str());
    std::vector<std::string> solve{"solve", model, "--mode", mode, "--stats", stats, "--policy", policy};
    if (mode == "dd") {
      solve.push_back("--dot");
      solve.push_back(dot);
    }
    if (run_cli(solve, out, err) != 0) throw std::runtime_error("solve failed: " + err.str());
    f.model = slurp(model);
    f.stats = without_wall_time(slurp(stats));
    f.dot = mode == "dd" ? slurp(dot) : "";
    f.policy = slurp(policy);
    f.out = out.str();
    for (const std::string& path : {model, stats, dot, policy}) std::remove(path.c_str());
    return f;
  };
  std::vector<std::vector<std::string>> specs{
      {"gen", "knapsack", "--variant", "chain", "--stages", "4", "--seed", "42"},
      {"gen", "knapsack", "--variant", "hidden", "--stages", "3", "--seed", "7"},
      {"gen", "investment", "--variant", "chain", "--stages", "3", "--seed", "5"},
      {"gen", "production", "--stages", "2", "--seed", "42"}};
  int runs = 0;
  for (const auto& spec : specs) {
    for (const std::string mode : {"dd", "tree"}) {
      Files a = run_once("a", spec, mode);
      Files b = run_once("b", spec, mode);
      ++runs;
      if (a.model != b.model || a.stats != b.stats || a.dot != b.dot || a.policy != b.policy || a.out != b.out) {
        return {false, "difference for '" + spec[1] + "' in mode " + mode};
      }
    }
  }
  return {true, std::to_string(runs) + " repeated gen+solve runs byte-identical (model, value, stats, policy, DOT)"};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", criterion_1);
  report(2, "context correctness", criterion_2);
  report(3, "size reduction trend", criterion_3);
  report(4, "hidden-variant degradation", criterion_4);
  report(5, "scaling headroom", criterion_5);
  report(6, "policy soundness", criterion_6);
  report(7, "propagation semantics", criterion_7);
  report(8, "determinism", criterion_8);
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
