// Brute-force reference evaluator. Enumerates every assignment of the
// decision and random variables in total_order, solves the auxiliaries by
// plain backtracking and evaluates the alternating max/sum expression
// directly. Shares no code with the propagation or search machinery.

#ifndef FSCP_ORACLE_H_
#define FSCP_ORACLE_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fscp/diagram.h"
#include "fscp/model.h"

namespace fscp {

inline constexpr std::uint64_t kOracleDefaultBound = 10'000'000;

// Thrown when the decision/random state space exceeds the bound.
class OracleRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a positive-probability scenario admits auxiliary solutions
// with different utility values.
class UtilityNotDetermined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PolicyShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Scenario {
  std::vector<int> values;     // indexed by VarId; auxiliaries solved if feasible
  double probability = 0.0;    // product of all CPT entries
  std::optional<std::int64_t> utility;  // nullopt when the constraints fail
};

// Product of the domain sizes of all decision and random variables,
// saturating at UINT64_MAX.
std::uint64_t state_space_size(const Problem& problem);

// Every full assignment of decision and random variables, in total_order
// lexicographic order.
std::vector<Scenario> scenarios(const Problem& problem, std::uint64_t bound = kOracleDefaultBound);

// Optimal expected utility, or nullopt if no policy satisfies the
// constraints in every positive-probability scenario.
std::optional<double> enumerate(const Problem& problem, std::uint64_t bound = kOracleDefaultBound);

// Expected utility of following `policy`. Variables the policy leaves open
// on a path (for instance decisions forced by propagation) are resolved as
// in enumerate(). Throws PolicyShapeError for a malformed policy and
// std::logic_error if the policy reaches an infeasible scenario.
double evaluate_policy(const Problem& problem, const PolicyTree& policy,
                       std::uint64_t bound = kOracleDefaultBound);

}  // namespace fscp

#endif  // FSCP_ORACLE_H_
