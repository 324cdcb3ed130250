// Small hand-built problems shared by the unit tests.

#ifndef FSCP_TESTS_FIXTURES_H_
#define FSCP_TESTS_FIXTURES_H_

#include "fscp/model.h"

namespace fscp::testing {

// d in {1,2}, U = d.
inline Problem single_decision(Objective objective = Objective::kMaximize) {
  ProblemBuilder b("single-decision");
  VarId d = b.add_decision("d", {1, 2}, 1);
  VarId u = b.add_auxiliary("U", {1, 2});
  b.add_linear({{1, u}, {-1, d}}, Relation::kEq, 0);
  b.set_utility(u);
  b.set_objective(objective);
  return b.build();
}

// s in {1,2} with P = (0.3, 0.7), U = s.
inline Problem single_random() {
  ProblemBuilder b("single-random");
  VarId s = b.add_random("s", {1, 2}, 1);
  b.add_prior(s, {0.3, 0.7});
  VarId u = b.add_auxiliary("U", {1, 2});
  b.add_linear({{1, u}, {-1, s}}, Relation::kEq, 0);
  b.set_utility(u);
  return b.build();
}

// One factor spanning every variable: d1 s1 d2 s2 all in a single table,
// so no two nodes share a context.
inline Problem no_sharing() {
  ProblemBuilder b("no-sharing");
  VarId d1 = b.add_decision("d1", {0, 1}, 1);
  VarId s1 = b.add_random("s1", {0, 1}, 1);
  VarId d2 = b.add_decision("d2", {0, 1}, 2);
  VarId s2 = b.add_random("s2", {0, 1}, 2);
  b.add_prior(s1, {0.25, 0.75});
  b.add_prior(s2, {0.6, 0.4});
  VarId u = b.add_auxiliary("U", {0, 1, 2, 3, 4, 5, 6});
  std::vector<std::vector<int>> tuples;
  for (int a = 0; a < 2; ++a)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) tuples.push_back({a, b1, c, e, a + 2 * b1 + c * e + (a ^ c) * 2});
  b.add_table({d1, s1, d2, s2, u}, std::move(tuples));
  b.set_utility(u);
  return b.build();
}

}  // namespace fscp::testing

#endif  // FSCP_TESTS_FIXTURES_H_
