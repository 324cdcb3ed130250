// Domain state with trail-based undo, and the propagation engine.
//
// Propagation follows the stochastic failure semantics: besides domain
// wipe-out, removing any value of a random variable is a failure, since it
// means some scenario violates a hard constraint. Linear constraints are
// filtered with bounds reasoning, table constraints with generalized arc
// consistency.

#ifndef FSCP_CONSTRAINTS_H_
#define FSCP_CONSTRAINTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fscp/model.h"

namespace fscp {

// Current value set of every variable, stored as bitsets over the declared
// domain indices. The referenced Problem must outlive the state.
class DomainState {
 public:
  struct Mark {
    std::size_t trail_size = 0;
    std::size_t depth = 0;
  };

  explicit DomainState(const Problem& problem);

  const Problem& problem() const { return *problem_; }

  int size(VarId v) const { return sizes_[v]; }
  bool is_assigned(VarId v) const { return sizes_[v] == 1; }
  bool is_empty(VarId v) const { return sizes_[v] == 0; }
  bool is_full(VarId v) const { return sizes_[v] == static_cast<int>(domain(v).size()); }
  bool contains(VarId v, int value) const;
  bool contains_index(VarId v, int index) const;
  int min(VarId v) const;
  int max(VarId v) const;
  // Requires is_assigned(v).
  int value(VarId v) const { return min(v); }
  // Smallest current domain index, -1 when empty.
  int min_index(VarId v) const;
  std::vector<int> values(VarId v) const;
  std::span<const std::uint64_t> bits(VarId v) const;
  int num_words(VarId v) const { return word_count_[v]; }
  const std::vector<int>& domain(VarId v) const { return problem_->variable(v).domain; }

  // Trailed modifications. Each returns true when the current set changed.
  bool assign(VarId v, int value);
  bool remove_value(VarId v, int value);
  bool remove_above(VarId v, std::int64_t bound);
  bool remove_below(VarId v, std::int64_t bound);
  // Keep only the domain indices whose bit is set in `keep`.
  bool intersect(VarId v, std::span<const std::uint64_t> keep);

  // Nested checkpoints; restore must be called on the innermost open mark.
  Mark checkpoint();
  void restore(const Mark& mark);
  std::size_t open_checkpoints() const { return marks_.size(); }

  // Exact equality of all current sets (trail ignored).
  bool same_domains(const DomainState& other) const;

 private:
  struct TrailEntry {
    int var;
    int word;  // absolute word index
    std::uint64_t old_bits;
    int old_size;
  };

  void write_word(VarId v, int word, std::uint64_t bits);
  int last_index(VarId v) const;
  bool clear_from(VarId v, int index);   // clear indices >= index
  bool clear_below(VarId v, int index);  // clear indices < index

  const Problem* problem_;
  std::vector<int> offset_;
  std::vector<int> word_count_;
  std::vector<std::uint64_t> words_;
  std::vector<int> sizes_;
  std::vector<TrailEntry> trail_;
  std::vector<std::size_t> marks_;
};

enum class PropagationStatus { kStable, kEmptyDomain, kRandomReduction };

struct PropagationResult {
  PropagationStatus status = PropagationStatus::kStable;
  VarId var = -1;         // variable that failed, if any
  int constraint = -1;    // constraint being filtered at failure, if any

  bool ok() const { return status == PropagationStatus::kStable; }
  std::string describe(const Problem& problem) const;
};

// Holds the normalized constraint network of one problem. Strict relations
// are rewritten to <= / >= at construction. Stateless between calls, so one
// instance may serve several DomainStates on the same thread.
class Propagator {
 public:
  explicit Propagator(const Problem& problem);

  // Filters every constraint to a fixpoint.
  PropagationResult propagate(DomainState& state);
  // Sets `var` to `value` (an observation or decision, exempt from the
  // random-reduction rule) and filters the constraints it touches.
  PropagationResult assign_and_propagate(DomainState& state, VarId var, int value);

 private:
  struct Term {
    std::int64_t coef;
    VarId var;
  };
  enum class LinearKind { kLe, kEq, kNe };
  struct Linear {
    std::vector<Term> terms;
    LinearKind kind;
    std::int64_t rhs;
  };
  struct Table {
    std::vector<VarId> scope;
    // Tuples as domain indices; tuples with values outside a domain dropped.
    std::vector<std::vector<int>> tuples;
  };
  struct Compiled {
    bool is_linear;
    Linear linear;
    Table table;
  };

  PropagationResult run(DomainState& state);
  bool filter(int c, DomainState& state);
  bool filter_le(const std::vector<Term>& terms, std::int64_t rhs, int c, DomainState& state,
                 bool& changed);
  bool filter_linear(int c, DomainState& state);
  bool filter_ne(int c, DomainState& state);
  bool filter_table(int c, DomainState& state);
  // Applies a removal and reports failure per the stochastic rules.
  template <typename Op>
  bool prune(DomainState& state, VarId v, int c, Op op);
  void schedule_watchers(VarId v, int except);

  const Problem* problem_;
  std::vector<Compiled> constraints_;
  std::vector<std::vector<int>> watchers_;
  std::vector<int> queue_;
  std::vector<char> queued_;
  PropagationResult failure_;
  std::vector<std::uint64_t> scratch_;
};

// One-shot conveniences.
PropagationResult propagate(DomainState& state, const Problem& problem);
PropagationResult assign_and_propagate(DomainState& state, VarId var, int value,
                                       const Problem& problem);

}  // namespace fscp

#endif  // FSCP_CONSTRAINTS_H_
