// JSON model files.
//
// Top-level keys: name, objective ("max" | "min"), utility_variable,
// variables, cpts, constraints. Variables are referenced by name everywhere.
// Unknown keys are rejected at every level.

#ifndef FSCP_MODEL_IO_H_
#define FSCP_MODEL_IO_H_

#include <stdexcept>
#include <string>

#include "fscp/model.h"

namespace fscp {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ModelFormatError on malformed JSON, unknown keys, wrong types or
// unresolved variable names. Semantic checks are left to validate().
Problem parse_model(const std::string& text);
Problem load_model(const std::string& path);

// Deterministic serialization: equal problems produce byte-identical text.
std::string dump_model(const Problem& problem);
void save_model(const Problem& problem, const std::string& path);

}  // namespace fscp

#endif  // FSCP_MODEL_IO_H_
