// Seeded generators for the benchmark families: stochastic knapsack,
// two-option investment, and production planning with a hidden market chain.
//
// Structure follows the published problem descriptions; the probability
// tables are not published, so every table is drawn from a seeded generator
// (strictly positive entries, rounded to 4 decimals, rows summing to 1).

#ifndef FSCP_BENCH_H_
#define FSCP_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>

#include "fscp/model.h"

namespace fscp {

enum class Family { kKnapsack, kInvestment, kProduction };
enum class Variant { kIndependent, kChain, kHidden };

const char* to_string(Family family);
const char* to_string(Variant variant);
std::optional<Family> parse_family(const std::string& text);
std::optional<Variant> parse_variant(const std::string& text);

struct GenSpec {
  Family family = Family::kKnapsack;
  Variant variant = Variant::kIndependent;
  int stages = 1;
  std::uint64_t seed = 0;
  // Knapsack capacity = round(capacity_scale * stages * mean item weight).
  double capacity_scale = 0.6;
};

// Empty when the spec is valid. Hidden is a knapsack-only variant;
// production ignores the variant.
std::string check_spec(const GenSpec& spec);

// Per stage: take_t in {0,1}; weight_t in {1..5}; value_t in {1,2,3}.
// Effective weight/value are tabled auxiliaries, accumulated stage by stage;
// the final accumulated weight is bounded by the capacity and the final
// accumulated value is the utility U (maximized).
Problem gen_knapsack(const GenSpec& spec);

// Per stage: option_t in {0,1} (0 = first option, 1 = second); returns
// r1_t, r2_t in {1..4}, the first option skewed toward high returns. The
// realized second-option return must not exceed the realized first-option
// return over the horizon. U = total realized return + kInvestmentTaxBonus
// per stage invested in the second option (maximized).
Problem gen_investment(const GenSpec& spec);
inline constexpr int kInvestmentTaxBonus = 2;

// V_t, S_t in {1,2}; hidden H_t in {1,2} with P(H1) P(S1|H1) P(H2|H1) ...;
// surplus W_t = W_{t-1} + V_t - S_t kept >= 0; U = final surplus
// (minimized). Hidden variables form a trailing stage.
Problem gen_production(int stages, std::uint64_t seed);

// Dispatches on spec.family; throws std::invalid_argument on a bad spec.
Problem generate(const GenSpec& spec);

}  // namespace fscp

#endif  // FSCP_BENCH_H_
