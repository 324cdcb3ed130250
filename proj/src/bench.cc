#include "fscp/bench.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fscp {

namespace {

// Portable draws: std::mt19937_64 output is fixed by the standard, the
// distribution classes are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Strictly positive distribution over n outcomes, rounded to 4 decimals.
  std::vector<double> distribution(std::size_t n) {
    std::vector<double> raw(n);
    for (double& x : raw) x = 0.1 + 0.9 * uniform();
    double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    std::vector<double> p(n);
    std::size_t largest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::max(1e-4, std::round(raw[i] / total * 1e4) / 1e4);
      if (p[i] > p[largest]) largest = i;
    }
    double rest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != largest) rest += p[i];
    }
    p[largest] = std::round((1.0 - rest) * 1e4) / 1e4;
    return p;
  }

  std::vector<std::vector<double>> table(std::size_t rows, std::size_t n) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < rows; ++r) out.push_back(distribution(n));
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<int> range(int lo, int hi) {
  std::vector<int> out(hi - lo + 1);
  std::iota(out.begin(), out.end(), lo);
  return out;
}

std::string name_of(const GenSpec& spec) {
  std::string name = std::string(to_string(spec.family));
  if (spec.family != Family::kProduction) name += std::string("-") + to_string(spec.variant);
  return name + "-T" + std::to_string(spec.stages) + "-s" + std::to_string(spec.seed);
}

// aux = take ? base : 0
void add_product_table(ProblemBuilder& b, VarId take, VarId base, VarId aux) {
  std::vector<std::vector<int>> tuples;
  for (int v : b.variable(base).domain) {
    tuples.push_back({0, v, 0});
    tuples.push_back({1, v, v});
  }
  b.add_table({take, base, aux}, std::move(tuples));
}

// next = prev + delta (prev absent for the first stage)
void add_accumulate(ProblemBuilder& b, VarId next, std::optional<VarId> prev,
                    std::vector<LinearTerm> delta) {
  std::vector<LinearTerm> terms{{1, next}};
  if (prev) terms.push_back({-1, *prev});
  for (LinearTerm t : delta) terms.push_back({-t.coef, t.var});
  b.add_linear(std::move(terms), Relation::kEq, 0);
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::kKnapsack: return "knapsack";
    case Family::kInvestment: return "investment";
    case Family::kProduction: return "production";
  }
  return "?";
}

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::kIndependent: return "independent";
    case Variant::kChain: return "chain";
    case Variant::kHidden: return "hidden";
  }
  return "?";
}

std::optional<Family> parse_family(const std::string& text) {
  if (text == "knapsack") return Family::kKnapsack;
  if (text == "investment") return Family::kInvestment;
  if (text == "production") return Family::kProduction;
  return std::nullopt;
}

std::optional<Variant> parse_variant(const std::string& text) {
  if (text == "independent" || text == "I" || text == "i") return Variant::kIndependent;
  if (text == "chain" || text == "C" || text == "c") return Variant::kChain;
  if (text == "hidden" || text == "H" || text == "h") return Variant::kHidden;
  return std::nullopt;
}

std::string check_spec(const GenSpec& spec) {
  if (spec.stages < 1) return "stages must be at least 1";
  if (spec.family == Family::kInvestment && spec.variant == Variant::kHidden) {
    return "variant 'hidden' is only defined for the knapsack family";
  }
  if (spec.family == Family::kKnapsack && !(spec.capacity_scale > 0.0)) {
    return "capacity scale must be positive";
  }
  return "";
}

Problem gen_knapsack(const GenSpec& spec) {
  if (std::string err = check_spec(spec); !err.empty()) throw std::invalid_argument(err);
  const int T = spec.stages;
  const std::vector<int> weights = range(1, 5);
  const std::vector<int> values = range(1, 3);
  const double mean_weight = 3.0;
  const int capacity = static_cast<int>(std::lround(spec.capacity_scale * T * mean_weight));
  Rng rng(spec.seed);
  ProblemBuilder b(name_of(spec));
  b.set_objective(Objective::kMaximize);

  std::vector<VarId> take(T), weight(T), value(T), hidden;
  for (int t = 0; t < T; ++t) {
    std::string s = std::to_string(t + 1);
    take[t] = b.add_decision("take" + s, {0, 1}, t + 1);
    weight[t] = b.add_random("weight" + s, weights, t + 1);
    value[t] = b.add_random("value" + s, values, t + 1);
  }
  if (spec.variant == Variant::kHidden) {
    for (int t = 0; t < T; ++t) hidden.push_back(b.add_random("hidden" + std::to_string(t + 1), {0, 1}, T + 1));
  }

  for (int t = 0; t < T; ++t) {
    switch (spec.variant) {
      case Variant::kIndependent:
        b.add_prior(weight[t], rng.distribution(weights.size()));
        b.add_prior(value[t], rng.distribution(values.size()));
        break;
      case Variant::kChain:
        if (t == 0) {
          b.add_prior(weight[t], rng.distribution(weights.size()));
          b.add_prior(value[t], rng.distribution(values.size()));
        } else {
          b.add_cpt(weight[t], {weight[t - 1]}, rng.table(weights.size(), weights.size()));
          b.add_cpt(value[t], {value[t - 1]}, rng.table(values.size(), values.size()));
        }
        break;
      case Variant::kHidden:
        b.add_cpt(weight[t], {hidden[t]}, rng.table(2, weights.size()));
        b.add_cpt(value[t], {hidden[t]}, rng.table(2, values.size()));
        break;
    }
  }
  if (spec.variant == Variant::kHidden) {
    for (int t = 0; t < T; ++t) {
      if (t == 0) {
        b.add_prior(hidden[t], rng.distribution(2));
      } else {
        b.add_cpt(hidden[t], {hidden[t - 1]}, rng.table(2, 2));
      }
    }
  }

  std::optional<VarId> load, gain;
  for (int t = 0; t < T; ++t) {
    std::string s = std::to_string(t + 1);
    VarId eff_weight = b.add_auxiliary("w_taken" + s, range(0, 5));
    VarId eff_value = b.add_auxiliary("v_taken" + s, range(0, 3));
    add_product_table(b, take[t], weight[t], eff_weight);
    add_product_table(b, take[t], value[t], eff_value);
    VarId next_load = b.add_auxiliary("load" + s, range(0, 5 * (t + 1)));
    VarId next_gain = b.add_auxiliary(t + 1 == T ? "U" : "gain" + s, range(0, 3 * (t + 1)));
    add_accumulate(b, next_load, load, {{1, eff_weight}});
    add_accumulate(b, next_gain, gain, {{1, eff_value}});
    load = next_load;
    gain = next_gain;
  }
  b.add_linear({{1, *load}}, Relation::kLe, capacity);
  b.set_utility(*gain);
  return b.build();
}

Problem gen_investment(const GenSpec& spec) {
  if (std::string err = check_spec(spec); !err.empty()) throw std::invalid_argument(err);
  const int T = spec.stages;
  const std::vector<int> returns = range(1, 4);
  Rng rng(spec.seed);
  ProblemBuilder b(name_of(spec));
  b.set_objective(Objective::kMaximize);

  // Option 1 puts more mass on high returns, option 2 on low ones.
  auto skewed = [&](bool high) {
    std::vector<double> p = rng.distribution(returns.size());
    std::sort(p.begin(), p.end());
    if (!high) std::reverse(p.begin(), p.end());
    return p;
  };
  auto skewed_table = [&](bool high) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < returns.size(); ++r) rows.push_back(skewed(high));
    return rows;
  };

  std::vector<VarId> option(T), r1(T), r2(T);
  for (int t = 0; t < T; ++t) {
    std::string s = std::to_string(t + 1);
    option[t] = b.add_decision("option" + s, {0, 1}, t + 1);
    r1[t] = b.add_random("r1_" + s, returns, t + 1);
    r2[t] = b.add_random("r2_" + s, returns, t + 1);
  }
  for (int t = 0; t < T; ++t) {
    if (spec.variant == Variant::kChain && t > 0) {
      b.add_cpt(r1[t], {r1[t - 1]}, skewed_table(true));
      b.add_cpt(r2[t], {r2[t - 1]}, skewed_table(false));
    } else {
      b.add_prior(r1[t], skewed(true));
      b.add_prior(r2[t], skewed(false));
    }
  }

  std::optional<VarId> balance, total;
  for (int t = 0; t < T; ++t) {
    std::string s = std::to_string(t + 1);
    // a1 = (1 - option) * r1, a2 = option * r2
    VarId a1 = b.add_auxiliary("ret1_" + s, range(0, 4));
    VarId a2 = b.add_auxiliary("ret2_" + s, range(0, 4));
    std::vector<std::vector<int>> t1, t2;
    for (int r : returns) {
      t1.push_back({0, r, r});
      t1.push_back({1, r, 0});
      t2.push_back({0, r, 0});
      t2.push_back({1, r, r});
    }
    b.add_table({option[t], r1[t], a1}, std::move(t1));
    b.add_table({option[t], r2[t], a2}, std::move(t2));
    // balance = sum(a1 - a2), must end non-negative
    VarId next_balance = b.add_auxiliary("balance" + s, range(-4 * (t + 1), 4 * (t + 1)));
    add_accumulate(b, next_balance, balance, {{1, a1}, {-1, a2}});
    int top = (4 + kInvestmentTaxBonus) * (t + 1);
    VarId next_total = b.add_auxiliary(t + 1 == T ? "U" : "total" + s, range(0, top));
    add_accumulate(b, next_total, total, {{1, a1}, {1, a2}, {kInvestmentTaxBonus, option[t]}});
    balance = next_balance;
    total = next_total;
  }
  b.add_linear({{1, *balance}}, Relation::kGe, 0);
  b.set_utility(*total);
  return b.build();
}

Problem gen_production(int stages, std::uint64_t seed) {
  GenSpec spec{Family::kProduction, Variant::kHidden, stages, seed, 0.6};
  if (std::string err = check_spec(spec); !err.empty()) throw std::invalid_argument(err);
  const int T = stages;
  Rng rng(seed);
  ProblemBuilder b(name_of(spec));
  b.set_objective(Objective::kMinimize);

  std::vector<VarId> supply(T), demand(T), hidden(T);
  for (int t = 0; t < T; ++t) {
    std::string s = std::to_string(t + 1);
    supply[t] = b.add_decision("V" + s, {1, 2}, t + 1);
    demand[t] = b.add_random("S" + s, {1, 2}, t + 1);
  }
  for (int t = 0; t < T; ++t) hidden[t] = b.add_random("H" + std::to_string(t + 1), {1, 2}, T + 1);

  // P(H1) P(S1|H1) P(H2|H1) P(S2|H2) ...
  for (int t = 0; t < T; ++t) {
    if (t == 0) {
      b.add_prior(hidden[0], rng.distribution(2));
    } else {
      b.add_cpt(hidden[t], {hidden[t - 1]}, rng.table(2, 2));
    }
    b.add_cpt(demand[t], {hidden[t]}, rng.table(2, 2));
  }

  // Surplus after quarter t: W_t = W_{t-1} + V_t - S_t, domain {0..2t}; the
  // last one is the utility U.
  std::optional<VarId> surplus;
  for (int t = 0; t < T; ++t) {
    std::string name = t + 1 == T ? "U" : (T == 2 ? "W" : "W" + std::to_string(t + 1));
    VarId next = b.add_auxiliary(name, range(0, 2 * (t + 1)));
    add_accumulate(b, next, surplus, {{1, supply[t]}, {-1, demand[t]}});
    surplus = next;
  }
  b.set_utility(*surplus);
  return b.build();
}

Problem generate(const GenSpec& spec) {
  switch (spec.family) {
    case Family::kKnapsack: return gen_knapsack(spec);
    case Family::kInvestment: return gen_investment(spec);
    case Family::kProduction: return gen_production(spec.stages, spec.seed);
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace fscp
