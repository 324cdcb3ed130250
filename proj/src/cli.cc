#include "fscp/cli.h"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "fscp/bench.h"
#include "fscp/compile.h"
#include "fscp/diagram.h"
#include "fscp/model_io.h"
#include "fscp/search.h"
#include "json.hpp"

namespace fscp {

namespace {

using Json = nlohmann::ordered_json;

struct GenArgs {
  std::string family;
  std::string variant = "independent";
  int stages = 1;
  std::uint64_t seed = 0;
  double capacity_scale = 0.6;
  std::string out = "-";
};

struct SolveArgs {
  std::string model;
  std::string mode = "dd";
  std::string stats;
  std::string policy;
  std::string dot;
  double timeout = 0.0;
};

struct CompareArgs {
  std::string model;
  double timeout = 0.0;
  bool no_header = false;
};

// Errors that map directly to an exit code.
struct Exit {
  int code;
  std::string message;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Exit{kExitUsage, "cannot write '" + path + "'"};
  f << text;
  if (!f) throw Exit{kExitUsage, "error writing '" + path + "'"};
}

Problem load_valid(const std::string& path) {
  Problem problem;
  try {
    problem = load_model(path);
  } catch (const ModelFormatError& e) {
    throw Exit{kExitInvalidModel, std::string("invalid model: ") + e.what()};
  }
  ValidationReport report = validate(problem);
  if (!report.ok()) throw Exit{kExitInvalidModel, "invalid model:\n" + report.to_string()};
  return problem;
}

Json shape_json(const GraphShape& s) {
  Json j;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["and_nodes"] = s.and_nodes;
  j["or_nodes"] = s.or_nodes;
  j["leaves"] = s.leaves;
  j["failure_nodes"] = s.failures;
  return j;
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  GenSpec spec;
  std::optional<Family> family = parse_family(a.family);
  if (!family) throw Exit{kExitUsage, "unknown family '" + a.family + "'"};
  std::optional<Variant> variant = parse_variant(a.variant);
  if (!variant) throw Exit{kExitUsage, "unknown variant '" + a.variant + "'"};
  spec.family = *family;
  spec.variant = *variant;
  spec.stages = a.stages;
  spec.seed = a.seed;
  spec.capacity_scale = a.capacity_scale;
  if (std::string err = check_spec(spec); !err.empty()) throw Exit{kExitUsage, err};
  std::string text = dump_model(generate(spec));
  if (a.out == "-") {
    out << text;
  } else {
    write_file(a.out, text);
  }
  return kExitOk;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  if (!a.dot.empty() && a.mode != "dd") throw Exit{kExitUsage, "--dot requires --mode dd"};
  Problem problem = load_valid(a.model);
  SearchOptions options;
  options.timeout_seconds = a.timeout;

  Json stats;
  stats["model"] = problem.name();
  stats["mode"] = a.mode;
  std::optional<double> value;
  std::optional<Aodd> dd;
  if (a.mode == "tree") {
    TreeResult r = solve_tree(problem, options);
    value = r.value;
    stats["feasible"] = r.feasible();
    stats["value"] = value ? Json(*value) : Json(nullptr);
    stats.update(shape_json(r.shape));
    stats["nodes_expanded"] = r.stats.nodes_expanded;
    stats["leaf_count"] = r.stats.leaf_count;
    stats["failure_count"] = r.stats.failure_count;
    stats["elapsed_seconds"] = r.stats.elapsed_seconds;
    if (!a.policy.empty() && value) dd = build_search_tree(problem, options);
  } else {
    CompileResult r = compile_aodd(problem, options);
    value = r.value;
    stats["feasible"] = r.feasible();
    stats["value"] = value ? Json(*value) : Json(nullptr);
    stats.update(shape_json(fscp::stats(r.dd)));
    stats["nodes_expanded"] = r.stats.nodes_expanded;
    stats["leaf_count"] = r.stats.leaf_count;
    stats["failure_count"] = r.stats.failure_count;
    stats["cache_entries"] = r.cache.entries;
    stats["cache_hits"] = r.cache.hits;
    stats["cache_misses"] = r.cache.misses;
    stats["cache_hit_rate"] = r.cache.hit_rate;
    stats["elapsed_seconds"] = r.stats.elapsed_seconds;
    dd = std::move(r.dd);
  }

  if (!a.stats.empty()) write_file(a.stats, stats.dump(2) + "\n");
  if (!a.dot.empty()) write_file(a.dot, to_dot(*dd, problem));
  if (!value) {
    out << "infeasible\n";
    return kExitInfeasible;
  }
  if (!a.policy.empty()) {
    write_file(a.policy, policy_to_json(extract_policy(*dd, problem.objective()), problem));
  }
  out << "value=" << format_value(*value) << "\n";
  return kExitOk;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  Problem problem = load_valid(a.model);
  SearchOptions options;
  options.timeout_seconds = a.timeout;
  TreeResult tree = solve_tree(problem, options);
  CompileResult dd = compile_aodd(problem, options);
  GraphShape dd_shape = stats(dd.dd);

  auto show = [](const std::optional<double>& v) { return v ? format_value(*v) : std::string("infeasible"); };
  double ratio = static_cast<double>(tree.shape.nodes) / static_cast<double>(dd_shape.nodes);
  if (!a.no_header) out << "model\ttree_value\tdd_value\ttree_nodes\tdd_nodes\tratio\n";
  out << problem.name() << '\t' << show(tree.value) << '\t' << show(dd.value) << '\t'
      << tree.shape.nodes << '\t' << dd_shape.nodes << '\t' << format_value(ratio) << '\n';
  if (tree.value != dd.value) {
    throw Exit{kExitInconsistent, "tree and diagram values differ"};
  }
  return tree.value ? kExitOk : kExitInfeasible;
}

}  // namespace

std::string format_value(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factored stochastic constraint program solver", "fscp"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a benchmark model");
  gen_cmd->add_option("family", gen.family, "knapsack | investment | production")->required();
  gen_cmd->add_option("--variant", gen.variant, "independent | chain | hidden");
  gen_cmd->add_option("--stages", gen.stages, "Number of stages")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--capacity-scale", gen.capacity_scale, "Knapsack capacity factor");
  gen_cmd->add_option("-o,--out", gen.out, "Output path ('-' for stdout)");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a model");
  solve_cmd->add_option("model", solve.model, "Model file")->required();
  solve_cmd->add_option("--mode", solve.mode, "tree | dd")->check(CLI::IsMember({"tree", "dd"}));
  solve_cmd->add_option("--stats", solve.stats, "Write run statistics (JSON)");
  solve_cmd->add_option("--policy", solve.policy, "Write the optimal policy (JSON)");
  solve_cmd->add_option("--dot", solve.dot, "Write the diagram as DOT (dd mode)");
  solve_cmd->add_option("--timeout", solve.timeout, "Abort after this many seconds");

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand("compare", "Solve in both modes and compare sizes");
  compare_cmd->add_option("model", compare.model, "Model file")->required();
  compare_cmd->add_option("--timeout", compare.timeout, "Per-mode timeout in seconds");
  compare_cmd->add_flag("--no-header", compare.no_header, "Omit the header line");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (solve_cmd->parsed()) return cmd_solve(solve, out);
    return cmd_compare(compare, out);
  } catch (const Exit& e) {
    err << e.message << "\n";
    return e.code;
  } catch (const SearchTimeout&) {
    err << "timeout\n";
    return kExitTimeout;
  } catch (const UndeterminedAuxiliaryError& e) {
    err << "invalid model: " << e.what() << "\n";
    return kExitInvalidModel;
  }
}

}  // namespace fscp
