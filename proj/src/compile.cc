#include "fscp/compile.h"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "and_or_engine.h"

namespace fscp {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int words_for(const Problem& problem, VarId v) {
  return std::max<int>(1, (static_cast<int>(problem.variable(v).domain.size()) + 63) / 64);
}

}  // namespace

std::size_t ContextKey::hash() const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (std::uint64_t w : words_) h = mix(h ^ w);
  return static_cast<std::size_t>(h);
}

std::vector<Restriction> ContextKey::restrictions(const Problem& problem) const {
  std::vector<Restriction> out;
  std::size_t i = 1;
  while (i < words_.size()) {
    Restriction r;
    r.var = static_cast<VarId>(words_[i++]);
    const auto& dom = problem.variable(r.var).domain;
    int n = words_for(problem, r.var);
    for (int w = 0; w < n; ++w, ++i) {
      std::uint64_t bits = words_.at(i);
      while (bits) {
        r.values.push_back(dom[64 * w + std::countr_zero(bits)]);
        bits &= bits - 1;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<VarId> ContextKey::restricted_variables(const Problem& problem) const {
  std::vector<VarId> out;
  for (const Restriction& r : restrictions(problem)) out.push_back(r.var);
  return out;
}

ContextKeyBuilder::ContextKeyBuilder(const Problem& problem)
    : problem_(&problem), graph_(factor_graph(problem)), stamp_(problem.num_variables(), 0) {}

ContextKey ContextKeyBuilder::build(const DomainState& state, VarId next_var) {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  collected_.clear();
  for (const FactorNode& f : graph_.factors) {
    bool active = std::any_of(f.scope.begin(), f.scope.end(),
                              [&](VarId v) { return !state.is_assigned(v); });
    if (!active) continue;
    for (VarId v : f.scope) {
      if (stamp_[v] == epoch_) continue;
      stamp_[v] = epoch_;
      if (!state.is_full(v)) collected_.push_back(v);
    }
  }
  std::sort(collected_.begin(), collected_.end());
  std::vector<std::uint64_t> words;
  words.reserve(1 + 2 * collected_.size());
  words.push_back(static_cast<std::uint64_t>(next_var));
  for (VarId v : collected_) {
    words.push_back(static_cast<std::uint64_t>(v));
    for (std::uint64_t b : state.bits(v)) words.push_back(b);
  }
  return ContextKey(std::move(words));
}

ContextKey context_key(const DomainState& state, const Problem& problem, VarId next_var) {
  return ContextKeyBuilder(problem).build(state, next_var);
}

const CachedNode* Cache::lookup(const ContextKey& key) {
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  VarId v = key.next_var();
  if (v >= 0 && static_cast<std::size_t>(v) < hits_by_var_.size()) ++hits_by_var_[v];
  return &it->second;
}

void Cache::store(const ContextKey& key, const CachedNode& node) {
  if (!map_.emplace(key, node).second) {
    throw std::logic_error("Cache::store: key already present");
  }
}

CacheReport Cache::report() const {
  CacheReport r;
  r.entries = map_.size();
  r.hits = hits_;
  r.misses = misses_;
  r.hit_rate = hits_ + misses_ == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(hits_ + misses_);
  r.hits_by_var = hits_by_var_;
  return r;
}

CacheReport cache_report(const Cache& cache) { return cache.report(); }

CompileResult compile_aodd(const Problem& problem, const SearchOptions& options) {
  ValidationReport report = validate(problem);
  if (!report.ok()) throw InvalidProblemError(std::move(report));
  Aodd raw;
  internal::DiagramGraph graph{raw};
  Cache cache(problem.num_variables());
  internal::AndOrEngine<internal::DiagramGraph> engine(problem, options, graph, &cache);
  auto root = engine.run();
  raw.set_root(root.node.ref, root.root_weight);
  CompileResult result;
  result.dd = raw.compacted();
  result.value = root.value;
  result.stats = engine.stats();
  result.cache = cache.report();
  return result;
}

Aodd build_search_tree(const Problem& problem, const SearchOptions& options) {
  ValidationReport report = validate(problem);
  if (!report.ok()) throw InvalidProblemError(std::move(report));
  Aodd raw;
  internal::UnsharedDiagramGraph graph{{raw}};
  internal::AndOrEngine<internal::UnsharedDiagramGraph> engine(problem, options, graph, nullptr);
  auto root = engine.run();
  raw.set_root(root.node.ref, root.root_weight);
  return raw.compacted();
}

}  // namespace fscp
