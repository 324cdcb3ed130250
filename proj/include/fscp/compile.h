// Compilation of a problem into an And-Or decision diagram by depth-first
// And-Or search with context-keyed caching of solved subproblems.

#ifndef FSCP_COMPILE_H_
#define FSCP_COMPILE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fscp/constraints.h"
#include "fscp/diagram.h"
#include "fscp/model.h"
#include "fscp/search.h"

namespace fscp {

struct Restriction {
  VarId var = -1;
  std::vector<int> values;

  friend bool operator==(const Restriction&, const Restriction&) = default;
};

// Identifies a subproblem: the variable about to be branched on, plus the
// current set of every variable that occurs in an active factor (one with an
// unassigned variable in scope) and is narrower than its declared domain.
// Variables still at their full declared domain are left out; this loses
// nothing because the set of active factors is recoverable from the rest.
class ContextKey {
 public:
  ContextKey() = default;
  explicit ContextKey(std::vector<std::uint64_t> encoding) : words_(std::move(encoding)) {}

  VarId next_var() const { return static_cast<VarId>(words_.at(0)); }
  std::vector<Restriction> restrictions(const Problem& problem) const;
  std::vector<VarId> restricted_variables(const Problem& problem) const;
  // Canonical encoding: next_var, then (var id, bitset words...) per
  // restricted variable in ascending id order.
  std::span<const std::uint64_t> encoding() const { return words_; }
  std::size_t hash() const;

  friend bool operator==(const ContextKey&, const ContextKey&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

struct ContextKeyHash {
  std::size_t operator()(const ContextKey& key) const { return key.hash(); }
};

class ContextKeyBuilder {
 public:
  explicit ContextKeyBuilder(const Problem& problem);
  ContextKey build(const DomainState& state, VarId next_var);

 private:
  const Problem* problem_;
  FactorGraph graph_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<VarId> collected_;
};

ContextKey context_key(const DomainState& state, const Problem& problem, VarId next_var);

struct CacheReport {
  std::uint64_t entries = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double hit_rate = 0.0;  // hits / (hits + misses), 0 when unused
  std::vector<std::uint64_t> hits_by_var;  // indexed by the key's next_var
};

struct CachedNode {
  NodeId node = -1;
  bool failed = false;
  double value = 0.0;
};

// Subproblem cache for one compile run. Entries are never overwritten.
class Cache {
 public:
  explicit Cache(int num_variables = 0) : hits_by_var_(num_variables, 0) {}

  // Counts a hit or a miss.
  const CachedNode* lookup(const ContextKey& key);
  // Throws std::logic_error if the key is already present.
  void store(const ContextKey& key, const CachedNode& node);
  std::size_t size() const { return map_.size(); }

  CacheReport report() const;

 private:
  std::unordered_map<ContextKey, CachedNode, ContextKeyHash> map_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::vector<std::uint64_t> hits_by_var_;
};

CacheReport cache_report(const Cache& cache);

struct CompileResult {
  Aodd dd;                      // compacted; a single failure node if infeasible
  std::optional<double> value;  // nullopt when infeasible
  SearchStats stats;
  CacheReport cache;

  bool feasible() const { return value.has_value(); }
};

// Same traversal, aggregation and tie-breaking as solve_tree; subproblems
// with equal ContextKey are solved once and shared.
CompileResult compile_aodd(const Problem& problem, const SearchOptions& options = {});

// The explicit search tree of solve_tree as a diagram without shared nodes.
// Exponential; meant for policy extraction and tests on small models.
Aodd build_search_tree(const Problem& problem, const SearchOptions& options = {});

}  // namespace fscp

#endif  // FSCP_COMPILE_H_
