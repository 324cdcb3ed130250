#include "fscp/constraints.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

namespace fscp {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

int index_of(const std::vector<int>& domain, int value) {
  auto it = std::lower_bound(domain.begin(), domain.end(), value);
  if (it == domain.end() || *it != value) return -1;
  return static_cast<int>(it - domain.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// DomainState

DomainState::DomainState(const Problem& problem) : problem_(&problem) {
  const int n = problem.num_variables();
  offset_.resize(n);
  word_count_.resize(n);
  sizes_.resize(n);
  int total = 0;
  for (VarId v = 0; v < n; ++v) {
    int dsize = static_cast<int>(problem.variable(v).domain.size());
    offset_[v] = total;
    word_count_[v] = std::max(1, (dsize + 63) / 64);
    total += word_count_[v];
    sizes_[v] = dsize;
  }
  words_.assign(total, 0);
  for (VarId v = 0; v < n; ++v) {
    int dsize = sizes_[v];
    for (int w = 0; w < word_count_[v]; ++w) {
      int bits = std::min(64, dsize - 64 * w);
      if (bits <= 0) break;
      words_[offset_[v] + w] = bits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    }
  }
}

bool DomainState::contains_index(VarId v, int index) const {
  if (index < 0 || index >= static_cast<int>(domain(v).size())) return false;
  return (words_[offset_[v] + index / 64] >> (index % 64)) & 1u;
}

bool DomainState::contains(VarId v, int value) const {
  return contains_index(v, index_of(domain(v), value));
}

int DomainState::min_index(VarId v) const {
  for (int w = 0; w < word_count_[v]; ++w) {
    std::uint64_t bits = words_[offset_[v] + w];
    if (bits) return 64 * w + std::countr_zero(bits);
  }
  return -1;
}

int DomainState::last_index(VarId v) const {
  for (int w = word_count_[v] - 1; w >= 0; --w) {
    std::uint64_t bits = words_[offset_[v] + w];
    if (bits) return 64 * w + 63 - std::countl_zero(bits);
  }
  return -1;
}

int DomainState::min(VarId v) const { return domain(v)[min_index(v)]; }
int DomainState::max(VarId v) const { return domain(v)[last_index(v)]; }

std::vector<int> DomainState::values(VarId v) const {
  std::vector<int> out;
  out.reserve(sizes_[v]);
  const auto& dom = domain(v);
  for (int w = 0; w < word_count_[v]; ++w) {
    std::uint64_t bits = words_[offset_[v] + w];
    while (bits) {
      out.push_back(dom[64 * w + std::countr_zero(bits)]);
      bits &= bits - 1;
    }
  }
  return out;
}

std::span<const std::uint64_t> DomainState::bits(VarId v) const {
  return {words_.data() + offset_[v], static_cast<std::size_t>(word_count_[v])};
}

void DomainState::write_word(VarId v, int word, std::uint64_t bits) {
  int abs = offset_[v] + word;
  std::uint64_t old = words_[abs];
  if (old == bits) return;
  trail_.push_back({v, abs, old, sizes_[v]});
  words_[abs] = bits;
  sizes_[v] += std::popcount(bits) - std::popcount(old);
}

bool DomainState::assign(VarId v, int value) {
  int index = index_of(domain(v), value);
  if (!contains_index(v, index)) {
    throw std::logic_error("assign: value " + std::to_string(value) + " not in current set of '" +
                           problem_->variable(v).name + "'");
  }
  if (sizes_[v] == 1) return false;
  for (int w = 0; w < word_count_[v]; ++w) {
    write_word(v, w, w == index / 64 ? std::uint64_t{1} << (index % 64) : 0);
  }
  return true;
}

bool DomainState::remove_value(VarId v, int value) {
  int index = index_of(domain(v), value);
  if (!contains_index(v, index)) return false;
  int w = index / 64;
  write_word(v, w, words_[offset_[v] + w] & ~(std::uint64_t{1} << (index % 64)));
  return true;
}

bool DomainState::clear_from(VarId v, int index) {
  bool changed = false;
  for (int w = index / 64; w < word_count_[v]; ++w) {
    std::uint64_t bits = words_[offset_[v] + w];
    int lo = 64 * w;
    std::uint64_t keep = index <= lo ? 0 : ((std::uint64_t{1} << (index - lo)) - 1);
    if (bits & ~keep) {
      write_word(v, w, bits & keep);
      changed = true;
    }
  }
  return changed;
}

bool DomainState::clear_below(VarId v, int index) {
  bool changed = false;
  int last_word = std::min(word_count_[v] - 1, index / 64);
  for (int w = 0; w <= last_word; ++w) {
    std::uint64_t bits = words_[offset_[v] + w];
    int lo = 64 * w;
    std::uint64_t drop = index >= lo + 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (index - lo)) - 1);
    if (bits & drop) {
      write_word(v, w, bits & ~drop);
      changed = true;
    }
  }
  return changed;
}

bool DomainState::remove_above(VarId v, std::int64_t bound) {
  const auto& dom = domain(v);
  auto it = std::upper_bound(dom.begin(), dom.end(), bound,
                             [](std::int64_t b, int x) { return b < x; });
  return clear_from(v, static_cast<int>(it - dom.begin()));
}

bool DomainState::remove_below(VarId v, std::int64_t bound) {
  const auto& dom = domain(v);
  auto it = std::lower_bound(dom.begin(), dom.end(), bound,
                             [](int x, std::int64_t b) { return x < b; });
  return clear_below(v, static_cast<int>(it - dom.begin()));
}

bool DomainState::intersect(VarId v, std::span<const std::uint64_t> keep) {
  bool changed = false;
  for (int w = 0; w < word_count_[v]; ++w) {
    std::uint64_t bits = words_[offset_[v] + w];
    std::uint64_t next = bits & keep[w];
    if (next != bits) {
      write_word(v, w, next);
      changed = true;
    }
  }
  return changed;
}

DomainState::Mark DomainState::checkpoint() {
  marks_.push_back(trail_.size());
  return {trail_.size(), marks_.size()};
}

void DomainState::restore(const Mark& mark) {
  if (marks_.empty() || mark.depth != marks_.size() || mark.trail_size != marks_.back()) {
    throw std::logic_error("DomainState::restore: mark is not the innermost checkpoint");
  }
  while (trail_.size() > mark.trail_size) {
    const TrailEntry& e = trail_.back();
    words_[e.word] = e.old_bits;
    sizes_[e.var] = e.old_size;
    trail_.pop_back();
  }
  marks_.pop_back();
}

bool DomainState::same_domains(const DomainState& other) const {
  return problem_ == other.problem_ && words_ == other.words_;
}

// ---------------------------------------------------------------------------
// Propagator

std::string PropagationResult::describe(const Problem& problem) const {
  std::string where;
  if (var >= 0) where += " on '" + problem.variable(var).name + "'";
  if (constraint >= 0) where += " in constraint[" + std::to_string(constraint) + "]";
  switch (status) {
    case PropagationStatus::kStable: return "stable";
    case PropagationStatus::kEmptyDomain: return "empty domain" + where;
    case PropagationStatus::kRandomReduction: return "random-variable reduction" + where;
  }
  return "?";
}

Propagator::Propagator(const Problem& problem) : problem_(&problem) {
  const int n = problem.num_variables();
  watchers_.resize(n);
  for (const Constraint& con : problem.constraints()) {
    Compiled c{};
    if (con.is_linear()) {
      c.is_linear = true;
      const LinearConstraint& lin = con.linear();
      // merge repeated variables, drop zero coefficients
      for (const LinearTerm& t : lin.terms) {
        auto it = std::find_if(c.linear.terms.begin(), c.linear.terms.end(),
                               [&](const Term& x) { return x.var == t.var; });
        if (it == c.linear.terms.end()) {
          c.linear.terms.push_back({t.coef, t.var});
        } else {
          it->coef += t.coef;
        }
      }
      std::erase_if(c.linear.terms, [](const Term& t) { return t.coef == 0; });
      std::int64_t rhs = lin.rhs;
      switch (lin.rel) {
        case Relation::kEq: c.linear.kind = LinearKind::kEq; break;
        case Relation::kNe: c.linear.kind = LinearKind::kNe; break;
        case Relation::kLe: c.linear.kind = LinearKind::kLe; break;
        case Relation::kLt: c.linear.kind = LinearKind::kLe; rhs -= 1; break;
        case Relation::kGe:
        case Relation::kGt:
          c.linear.kind = LinearKind::kLe;
          for (Term& t : c.linear.terms) t.coef = -t.coef;
          rhs = -(lin.rel == Relation::kGt ? rhs + 1 : rhs);
          break;
      }
      c.linear.rhs = rhs;
    } else {
      c.is_linear = false;
      const TableConstraint& tab = con.table();
      c.table.scope = tab.scope;
      for (const auto& tuple : tab.tuples) {
        std::vector<int> idx(tuple.size());
        bool ok = true;
        for (std::size_t k = 0; k < tuple.size() && ok; ++k) {
          idx[k] = index_of(problem.variable(tab.scope[k]).domain, tuple[k]);
          ok = idx[k] >= 0;
        }
        if (ok) c.table.tuples.push_back(std::move(idx));
      }
    }
    int id = static_cast<int>(constraints_.size());
    for (VarId v : con.scope()) watchers_[v].push_back(id);
    constraints_.push_back(std::move(c));
  }
  queued_.assign(constraints_.size(), 0);
}

void Propagator::schedule_watchers(VarId v, int except) {
  for (int c : watchers_[v]) {
    if (c != except && !queued_[c]) {
      queued_[c] = 1;
      queue_.push_back(c);
    }
  }
}

template <typename Op>
bool Propagator::prune(DomainState& state, VarId v, int c, Op op) {
  int before = state.size(v);
  if (!op()) return true;
  if (state.is_empty(v)) {
    failure_ = {PropagationStatus::kEmptyDomain, v, c};
    return false;
  }
  if (problem_->variable(v).kind == VarKind::kRandom && before > 1) {
    failure_ = {PropagationStatus::kRandomReduction, v, c};
    return false;
  }
  schedule_watchers(v, c);
  return true;
}

// sum(terms) <= rhs
bool Propagator::filter_le(const std::vector<Term>& terms, std::int64_t rhs, int c,
                           DomainState& state, bool& changed) {
  std::int64_t min_sum = 0;
  for (const Term& t : terms) {
    min_sum += t.coef > 0 ? t.coef * state.min(t.var) : t.coef * state.max(t.var);
  }
  if (min_sum > rhs) {
    failure_ = {PropagationStatus::kEmptyDomain, terms.empty() ? -1 : terms.front().var, c};
    return false;
  }
  for (const Term& t : terms) {
    std::int64_t own = t.coef > 0 ? t.coef * state.min(t.var) : t.coef * state.max(t.var);
    std::int64_t slack = rhs - (min_sum - own);
    bool pruned = false;
    bool ok = prune(state, t.var, c, [&] {
      pruned = t.coef > 0 ? state.remove_above(t.var, floor_div(slack, t.coef))
                          : state.remove_below(t.var, ceil_div(slack, t.coef));
      return pruned;
    });
    if (!ok) return false;
    changed = changed || pruned;
  }
  return true;
}

bool Propagator::filter_linear(int c, DomainState& state) {
  const Linear& lin = constraints_[c].linear;
  if (lin.kind == LinearKind::kNe) return filter_ne(c, state);
  if (lin.kind == LinearKind::kLe) {
    bool changed = false;
    return filter_le(lin.terms, lin.rhs, c, state, changed);
  }
  std::vector<Term> negated = lin.terms;
  for (Term& t : negated) t.coef = -t.coef;
  for (;;) {
    bool changed = false;
    if (!filter_le(lin.terms, lin.rhs, c, state, changed)) return false;
    if (!filter_le(negated, -lin.rhs, c, state, changed)) return false;
    if (!changed) return true;
  }
}

bool Propagator::filter_ne(int c, DomainState& state) {
  const Linear& lin = constraints_[c].linear;
  std::int64_t fixed = 0;
  const Term* open = nullptr;
  for (const Term& t : lin.terms) {
    if (state.is_assigned(t.var)) {
      fixed += t.coef * state.value(t.var);
    } else if (open) {
      return true;  // two or more unfixed terms: nothing to filter
    } else {
      open = &t;
    }
  }
  if (!open) {
    if (fixed != lin.rhs) return true;
    failure_ = {PropagationStatus::kEmptyDomain, lin.terms.empty() ? -1 : lin.terms.back().var, c};
    return false;
  }
  std::int64_t rest = lin.rhs - fixed;
  if (rest % open->coef != 0) return true;
  std::int64_t forbidden = rest / open->coef;
  if (forbidden < std::numeric_limits<int>::min() || forbidden > std::numeric_limits<int>::max()) return true;
  return prune(state, open->var, c,
               [&] { return state.remove_value(open->var, static_cast<int>(forbidden)); });
}

bool Propagator::filter_table(int c, DomainState& state) {
  const Table& tab = constraints_[c].table;
  const std::size_t arity = tab.scope.size();
  std::vector<int> base(arity);
  std::size_t total = 0;
  for (std::size_t k = 0; k < arity; ++k) {
    base[k] = static_cast<int>(total);
    total += state.num_words(tab.scope[k]);
  }
  scratch_.assign(total, 0);
  for (const auto& tuple : tab.tuples) {
    bool valid = true;
    for (std::size_t k = 0; k < arity && valid; ++k) valid = state.contains_index(tab.scope[k], tuple[k]);
    if (!valid) continue;
    for (std::size_t k = 0; k < arity; ++k) {
      scratch_[base[k] + tuple[k] / 64] |= std::uint64_t{1} << (tuple[k] % 64);
    }
  }
  for (std::size_t k = 0; k < arity; ++k) {
    VarId v = tab.scope[k];
    std::span<const std::uint64_t> keep(scratch_.data() + base[k], state.num_words(v));
    if (!prune(state, v, c, [&] { return state.intersect(v, keep); })) return false;
  }
  return true;
}

bool Propagator::filter(int c, DomainState& state) {
  return constraints_[c].is_linear ? filter_linear(c, state) : filter_table(c, state);
}

PropagationResult Propagator::run(DomainState& state) {
  failure_ = {};
  std::size_t head = 0;
  bool ok = true;
  while (head < queue_.size()) {
    int c = queue_[head++];
    queued_[c] = 0;
    if (!filter(c, state)) {
      ok = false;
      break;
    }
  }
  for (std::size_t i = head; i < queue_.size(); ++i) queued_[queue_[i]] = 0;
  queue_.clear();
  return ok ? PropagationResult{} : failure_;
}

PropagationResult Propagator::propagate(DomainState& state) {
  for (VarId v = 0; v < problem_->num_variables(); ++v) {
    if (state.is_empty(v)) return {PropagationStatus::kEmptyDomain, v, -1};
  }
  for (int c = 0; c < static_cast<int>(constraints_.size()); ++c) {
    if (!queued_[c]) {
      queued_[c] = 1;
      queue_.push_back(c);
    }
  }
  return run(state);
}

PropagationResult Propagator::assign_and_propagate(DomainState& state, VarId var, int value) {
  if (state.assign(var, value)) schedule_watchers(var, -1);
  return run(state);
}

PropagationResult propagate(DomainState& state, const Problem& problem) {
  return Propagator(problem).propagate(state);
}

PropagationResult assign_and_propagate(DomainState& state, VarId var, int value,
                                       const Problem& problem) {
  return Propagator(problem).assign_and_propagate(state, var, value);
}

}  // namespace fscp
