#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steadytrunc/model.hpp"
#include "steadytrunc/refinement.hpp"
#include "steadytrunc/state.hpp"

namespace steadytrunc {

using json = nlohmann::json;

// One row per state: species counts then the probability, printed with 17
// significant digits so re-reading reproduces the doubles bit for bit.
struct DistributionFile {
  std::vector<std::string> species;
  std::vector<StateVec> states;
  std::vector<double> probs;
};

inline void write_distribution_csv(const std::string& path,
                                   const std::vector<std::string>& species,
                                   const std::vector<StateVec>& states,
                                   const std::vector<double>& probs) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& s : species) out << s << ",";
  out << "probability\n";
  char buf[64];
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (long long c : states[i]) out << c << ",";
    std::snprintf(buf, sizeof buf, "%.17g", probs[i]);
    out << buf << "\n";
  }
}

inline DistributionFile read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  DistributionFile f;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty distribution file: " + path);
  std::stringstream hdr(line);
  std::string col;
  std::vector<std::string> cols;
  while (std::getline(hdr, col, ',')) cols.push_back(col);
  if (cols.empty() || cols.back() != "probability")
    throw InputError("malformed distribution header in " + path);
  f.species.assign(cols.begin(), cols.end() - 1);
  const std::size_t n = f.species.size();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream row(line);
    StateVec s;
    std::string cell;
    try {
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(row, cell, ','))
          throw InputError(path + ":" + std::to_string(lineno) + ": short row");
        s.push_back(std::stoll(cell));
      }
      if (!std::getline(row, cell, ','))
        throw InputError(path + ":" + std::to_string(lineno) +
                         ": missing probability");
      f.probs.push_back(std::stod(cell));
    } catch (const std::logic_error&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    f.states.push_back(std::move(s));
  }
  return f;
}

struct DiffReport {
  double total_abs = 0.0;
  double max_abs = 0.0;
  double mass_a_outside_b = 0.0;
  double mass_b_outside_a = 0.0;
};

// Metrics over the union of supports; a state missing on one side counts
// as probability zero there.
inline DiffReport diff_distributions(const DistributionFile& a,
                                     const DistributionFile& b) {
  if (a.species.size() != b.species.size())
    throw InputError("distribution dimension mismatch");
  std::unordered_map<StateVec, double, StateVecHash> bm;
  bm.reserve(b.states.size());
  for (std::size_t i = 0; i < b.states.size(); ++i) bm[b.states[i]] = b.probs[i];
  DiffReport r;
  std::unordered_map<StateVec, char, StateVecHash> seen;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    auto it = bm.find(a.states[i]);
    double pb = it == bm.end() ? 0.0 : it->second;
    double d = std::abs(a.probs[i] - pb);
    r.total_abs += d;
    r.max_abs = std::max(r.max_abs, d);
    if (it == bm.end()) r.mass_a_outside_b += a.probs[i];
    seen[a.states[i]] = 1;
  }
  for (std::size_t i = 0; i < b.states.size(); ++i) {
    if (seen.count(b.states[i])) continue;
    r.total_abs += std::abs(b.probs[i]);
    r.max_abs = std::max(r.max_abs, std::abs(b.probs[i]));
    r.mass_b_outside_a += b.probs[i];
  }
  return r;
}

inline void write_iterations_csv(const std::string& path,
                                 const std::vector<IterationReport>& reports) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "level,states,residual,kept_cells,kept_mass,scc_restricted,wall_ms\n";
  char buf[64];
  for (const auto& r : reports) {
    out << r.level << "," << r.states << ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.residual);
    out << buf << "," << r.kept_cells << ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.kept_mass);
    out << buf << "," << (r.scc_restricted ? 1 : 0) << ",";
    std::snprintf(buf, sizeof buf, "%.6g", r.wall_ms);
    out << buf << "\n";
  }
}

// Minimal structural validator for the subset of JSON Schema the summary
// uses (type / required / properties / items).
inline void validate_against_schema(const json& value, const json& schema,
                                    const std::string& where = "$") {
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    bool ok = (t == "object" && value.is_object()) ||
              (t == "array" && value.is_array()) ||
              (t == "string" && value.is_string()) ||
              (t == "boolean" && value.is_boolean()) ||
              (t == "integer" && value.is_number_integer()) ||
              (t == "number" && value.is_number());
    if (!ok)
      throw NumericError("summary schema violation at " + where +
                         ": expected " + t);
  }
  if (schema.contains("required"))
    for (const auto& k : schema["required"])
      if (!value.contains(k.get<std::string>()))
        throw NumericError("summary schema violation at " + where +
                           ": missing " + k.get<std::string>());
  if (schema.contains("properties") && value.is_object())
    for (auto& [k, sub] : schema["properties"].items())
      if (value.contains(k)) validate_against_schema(value[k], sub, where + "." + k);
  if (schema.contains("items") && value.is_array())
    for (const auto& el : value)
      validate_against_schema(el, schema["items"], where + "[]");
}

inline const char* summary_schema_text() {
  return R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "steadytrunc run summary",
  "type": "object",
  "required": ["schema_version", "model", "config", "iterations",
               "final_size", "final_cell_width", "reentry_scheme", "versions"],
  "properties": {
    "schema_version": {"type": "integer"},
    "model": {"type": "string"},
    "config": {
      "type": "object",
      "required": ["epsilon", "epsilon_l", "init_exponent", "solver", "seed"],
      "properties": {
        "epsilon": {"type": "number"},
        "epsilon_l": {"type": "number"},
        "init_exponent": {"type": "integer"},
        "solver": {"type": "string"},
        "seed": {"type": "integer"},
        "bounds": {"type": "boolean"},
        "oracle": {"type": "string"}
      }
    },
    "iterations": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["level", "states", "residual", "kept_mass"],
        "properties": {
          "level": {"type": "integer"},
          "states": {"type": "integer"},
          "residual": {"type": "number"},
          "kept_mass": {"type": "number"},
          "kept_cells": {"type": "integer"},
          "scc_restricted": {"type": "boolean"},
          "wall_ms": {"type": "number"}
        }
      }
    },
    "final_size": {"type": "integer"},
    "final_cell_width": {"type": "integer"},
    "lyapunov": {
      "type": "object",
      "properties": {
        "c": {"type": "number"},
        "box": {"type": "array", "items": {"type": "integer"}}
      }
    },
    "outside_mass": {"type": "number"},
    "bounds": {
      "type": "object",
      "required": ["total_width", "max_width", "targets"],
      "properties": {
        "total_width": {"type": "number"},
        "max_width": {"type": "number"},
        "targets": {"type": "integer"},
        "failed_targets": {"type": "array", "items": {"type": "integer"}}
      }
    },
    "reentry_scheme": {"type": "string"},
    "versions": {
      "type": "object",
      "required": ["steadytrunc"],
      "properties": {"steadytrunc": {"type": "string"}}
    }
  }
})";
}

inline json iteration_reports_json(const std::vector<IterationReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back({{"level", r.level},
                   {"states", r.states},
                   {"residual", r.residual},
                   {"kept_cells", r.kept_cells},
                   {"kept_mass", r.kept_mass},
                   {"scc_restricted", r.scc_restricted},
                   {"wall_ms", r.wall_ms}});
  }
  return arr;
}

}  // namespace steadytrunc
