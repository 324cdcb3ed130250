#include "fscp/model_io.h"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace fscp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ModelFormatError(where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::int64_t get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

int get_int32(const json& j, const std::string& where) {
  std::int64_t v = get_int(j, where);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(where, "integer out of range");
  }
  return static_cast<int>(v);
}

std::vector<int> get_int_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_int32(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const json& get_array(const json& obj, const char* key, const std::string& where) {
  const json& arr = require(obj, key, where);
  if (!arr.is_array()) fail(where + "." + key, "expected an array");
  return arr;
}

class Reader {
 public:
  Problem read(const json& root) {
    reject_unknown_keys(root, "model",
                        {"name", "objective", "utility_variable", "variables", "cpts", "constraints"});
    ProblemBuilder builder(get_string(require(root, "name", "model"), "model.name"));
    read_variables(get_array(root, "variables", "model"), builder);

    std::string objective = get_string(require(root, "objective", "model"), "model.objective");
    if (objective == "max") {
      builder.set_objective(Objective::kMaximize);
    } else if (objective == "min") {
      builder.set_objective(Objective::kMinimize);
    } else {
      fail("model.objective", "expected \"max\" or \"min\"");
    }
    builder.set_utility(lookup(require(root, "utility_variable", "model"), "model.utility_variable"));

    if (root.contains("cpts")) {
      const json& cpts = get_array(root, "cpts", "model");
      for (std::size_t i = 0; i < cpts.size(); ++i) {
        builder.add_cpt(read_cpt(cpts[i], "cpts[" + std::to_string(i) + "]"));
      }
    }
    if (root.contains("constraints")) {
      const json& cons = get_array(root, "constraints", "model");
      for (std::size_t i = 0; i < cons.size(); ++i) {
        read_constraint(cons[i], "constraints[" + std::to_string(i) + "]", builder);
      }
    }
    return builder.build();
  }

 private:
  void read_variables(const json& vars, ProblemBuilder& builder) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      std::string where = "variables[" + std::to_string(i) + "]";
      const json& v = vars[i];
      reject_unknown_keys(v, where, {"name", "kind", "domain", "stage"});
      std::string name = get_string(require(v, "name", where), where + ".name");
      std::string kind_text = get_string(require(v, "kind", where), where + ".kind");
      VarKind kind;
      if (kind_text == "decision") {
        kind = VarKind::kDecision;
      } else if (kind_text == "random") {
        kind = VarKind::kRandom;
      } else if (kind_text == "auxiliary") {
        kind = VarKind::kAuxiliary;
      } else {
        fail(where + ".kind", "expected decision, random or auxiliary");
      }
      std::vector<int> domain = get_int_array(require(v, "domain", where), where + ".domain");
      int stage = 0;
      if (kind != VarKind::kAuxiliary) {
        stage = get_int32(require(v, "stage", where), where + ".stage");
      } else if (v.contains("stage")) {
        get_int32(v["stage"], where + ".stage");
      }
      if (ids_.count(name)) fail(where + ".name", "duplicate variable name '" + name + "'");
      ids_[name] = builder.add_variable(name, kind, std::move(domain), stage);
    }
  }

  VarId lookup(const json& j, const std::string& where) {
    std::string name = get_string(j, where);
    auto it = ids_.find(name);
    if (it == ids_.end()) fail(where, "unknown variable '" + name + "'");
    return it->second;
  }

  Cpt read_cpt(const json& j, const std::string& where) {
    reject_unknown_keys(j, where, {"child", "parents", "rows"});
    Cpt cpt;
    cpt.child = lookup(require(j, "child", where), where + ".child");
    if (j.contains("parents")) {
      const json& parents = get_array(j, "parents", where);
      for (std::size_t k = 0; k < parents.size(); ++k) {
        cpt.parents.push_back(lookup(parents[k], where + ".parents[" + std::to_string(k) + "]"));
      }
    }
    const json& rows = get_array(j, "rows", where);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::string rw = where + ".rows[" + std::to_string(r) + "]";
      reject_unknown_keys(rows[r], rw, {"parent_values", "dist"});
      CptRow row;
      if (rows[r].contains("parent_values")) {
        row.parent_values = get_int_array(rows[r]["parent_values"], rw + ".parent_values");
      }
      const json& dist = require(rows[r], "dist", rw);
      if (!dist.is_object()) fail(rw + ".dist", "expected an object mapping value to probability");
      for (const auto& item : dist.items()) {
        int value;
        std::size_t used = 0;
        try {
          value = std::stoi(item.key(), &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != item.key().size()) fail(rw + ".dist", "key '" + item.key() + "' is not an integer");
        if (!item.value().is_number()) fail(rw + ".dist." + item.key(), "expected a number");
        row.dist.emplace_back(value, item.value().get<double>());
      }
      // json objects iterate in key-string order; keep entries in value order
      std::sort(row.dist.begin(), row.dist.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      cpt.rows.push_back(std::move(row));
    }
    return cpt;
  }

  void read_constraint(const json& j, const std::string& where, ProblemBuilder& builder) {
    if (!j.is_object()) fail(where, "expected an object");
    std::string type = get_string(require(j, "type", where), where + ".type");
    if (type == "linear") {
      reject_unknown_keys(j, where, {"type", "terms", "rel", "rhs"});
      std::vector<LinearTerm> terms;
      const json& arr = get_array(j, "terms", where);
      for (std::size_t k = 0; k < arr.size(); ++k) {
        std::string tw = where + ".terms[" + std::to_string(k) + "]";
        if (!arr[k].is_array() || arr[k].size() != 2) fail(tw, "expected [coef, variable]");
        terms.push_back({get_int(arr[k][0], tw), lookup(arr[k][1], tw)});
      }
      std::string rel_text = get_string(require(j, "rel", where), where + ".rel");
      std::optional<Relation> rel = parse_relation(rel_text);
      if (!rel) fail(where + ".rel", "unknown relation '" + rel_text + "'");
      builder.add_linear(std::move(terms), *rel, get_int(require(j, "rhs", where), where + ".rhs"));
    } else if (type == "table") {
      reject_unknown_keys(j, where, {"type", "scope", "tuples"});
      std::vector<VarId> scope;
      const json& arr = get_array(j, "scope", where);
      for (std::size_t k = 0; k < arr.size(); ++k) {
        scope.push_back(lookup(arr[k], where + ".scope[" + std::to_string(k) + "]"));
      }
      std::vector<std::vector<int>> tuples;
      const json& tarr = get_array(j, "tuples", where);
      for (std::size_t k = 0; k < tarr.size(); ++k) {
        tuples.push_back(get_int_array(tarr[k], where + ".tuples[" + std::to_string(k) + "]"));
      }
      builder.add_table(std::move(scope), std::move(tuples));
    } else {
      fail(where + ".type", "expected \"linear\" or \"table\"");
    }
  }

  std::map<std::string, VarId> ids_;
};

ordered_json write(const Problem& p) {
  auto name = [&](VarId id) { return p.variable(id).name; };
  ordered_json root;
  root["name"] = p.name();
  root["objective"] = p.objective() == Objective::kMaximize ? "max" : "min";
  root["utility_variable"] = name(p.utility_variable());
  ordered_json vars = ordered_json::array();
  for (const Variable& v : p.variables()) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["kind"] = to_string(v.kind);
    jv["domain"] = v.domain;
    if (v.kind != VarKind::kAuxiliary) jv["stage"] = v.stage;
    vars.push_back(std::move(jv));
  }
  root["variables"] = std::move(vars);
  ordered_json cpts = ordered_json::array();
  for (const Cpt& c : p.cpts()) {
    ordered_json jc;
    jc["child"] = name(c.child);
    ordered_json parents = ordered_json::array();
    for (VarId q : c.parents) parents.push_back(name(q));
    jc["parents"] = std::move(parents);
    ordered_json rows = ordered_json::array();
    for (const CptRow& row : c.rows) {
      ordered_json jr;
      jr["parent_values"] = row.parent_values;
      ordered_json dist = ordered_json::object();
      for (const auto& [value, prob] : row.dist) dist[std::to_string(value)] = prob;
      jr["dist"] = std::move(dist);
      rows.push_back(std::move(jr));
    }
    jc["rows"] = std::move(rows);
    cpts.push_back(std::move(jc));
  }
  root["cpts"] = std::move(cpts);
  ordered_json cons = ordered_json::array();
  for (const Constraint& c : p.constraints()) {
    ordered_json jc;
    if (c.is_linear()) {
      jc["type"] = "linear";
      ordered_json terms = ordered_json::array();
      for (const LinearTerm& t : c.linear().terms) terms.push_back(ordered_json::array({t.coef, name(t.var)}));
      jc["terms"] = std::move(terms);
      jc["rel"] = to_string(c.linear().rel);
      jc["rhs"] = c.linear().rhs;
    } else {
      jc["type"] = "table";
      ordered_json scope = ordered_json::array();
      for (VarId v : c.table().scope) scope.push_back(name(v));
      jc["scope"] = std::move(scope);
      jc["tuples"] = c.table().tuples;
    }
    cons.push_back(std::move(jc));
  }
  root["constraints"] = std::move(cons);
  return root;
}

}  // namespace

Problem parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("malformed JSON: ") + e.what());
  }
  return Reader().read(root);
}

Problem load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string dump_model(const Problem& problem) { return write(problem).dump(2) + "\n"; }

void save_model(const Problem& problem, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << dump_model(problem);
}

}  // namespace fscp
