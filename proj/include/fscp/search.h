// And-Or tree search for the expected-utility objective.
//
// Or nodes branch on decision variables and take the max (or min) over
// weighted children; And nodes branch on random variables and sum weighted
// children. Edge weights carry all probability and utility mass: a path's
// product of edge weights equals P(s) * U(v, s), so leaves have value 1.

#ifndef FSCP_SEARCH_H_
#define FSCP_SEARCH_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fscp/constraints.h"
#include "fscp/model.h"

namespace fscp {

struct SearchOptions {
  // Abort with SearchTimeout after this many seconds; <= 0 disables.
  double timeout_seconds = 0.0;
  // Skip the subtree below edges of weight exactly 0. Off by default: such
  // subtrees may still fail, which changes feasibility verdicts.
  bool prune_zero_weight = false;
};

class SearchTimeout : public std::runtime_error {
 public:
  SearchTimeout() : std::runtime_error("search timed out") {}
};

// A complete path left an auxiliary variable undetermined by propagation.
class UndeterminedAuxiliaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchStats {
  std::uint64_t nodes_expanded = 0;  // internal nodes whose children were generated
  std::uint64_t leaf_count = 0;
  std::uint64_t failure_count = 0;   // failed propagations and failed nodes
  double elapsed_seconds = 0.0;
};

// Node/edge counts of a search tree or diagram.
struct GraphShape {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  std::uint64_t and_nodes = 0;
  std::uint64_t or_nodes = 0;
  std::uint64_t leaves = 0;
  std::uint64_t failures = 0;

  GraphShape& operator+=(const GraphShape& o);
  friend bool operator==(const GraphShape&, const GraphShape&) = default;
};

// Factors still waiting to fire at a node: CPTs with an unassigned scope
// variable, and whether the utility variable is already fixed.
struct PendingFactors {
  std::vector<int> cpts;
  bool utility_fired = false;
};

struct EdgeWeight {
  double weight = 1.0;       // probability * utility (if fired)
  double probability = 1.0;  // product of the CPT entries that fired
  std::optional<std::int64_t> utility;  // utility value, if it fired here

  bool utility_fired_now() const { return utility.has_value(); }
};

// Flattened CPTs for constant-time lookup of fully assigned entries.
class EdgeWeigher {
 public:
  explicit EdgeWeigher(const Problem& problem);

  // Summary of `state` for use as the `before` side of an edge.
  PendingFactors pending(const DomainState& state) const;
  // Summary of a state in which nothing is assigned yet.
  PendingFactors initial() const;
  // Product of the pending CPTs that are fully assigned in `after`, times the
  // utility value if it is fixed in `after` and had not fired before.
  EdgeWeight weigh(const PendingFactors& before, const DomainState& after) const;

  // Entry of cpt `c` at the (fully assigned) state.
  double entry(int c, const DomainState& state) const;
  const std::vector<int>& cpts_of(VarId v) const { return cpts_of_var_[v]; }

 private:
  struct Table {
    std::vector<VarId> parents;
    VarId child;
    std::vector<std::size_t> strides;  // per parent, in units of child domain size
    std::vector<double> probs;
  };

  const Problem* problem_;
  std::vector<Table> tables_;
  std::vector<std::vector<int>> cpts_of_var_;
};

EdgeWeight edge_weight(const PendingFactors& before, const DomainState& after,
                       const Problem& problem);

struct TreeResult {
  std::optional<double> value;  // nullopt when infeasible
  SearchStats stats;
  GraphShape shape;

  bool feasible() const { return value.has_value(); }
};

// Depth-first And-Or tree search in total_order, without caching.
// Throws InvalidProblemError if the problem does not validate.
TreeResult solve_tree(const Problem& problem, const SearchOptions& options = {});

}  // namespace fscp

#endif  // FSCP_SEARCH_H_
