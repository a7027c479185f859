/*
 Copyright 2026 The delayq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "delayq/config.hpp"

#include <fmt/format.h>
#include <toml.hpp>

#include <fstream>
#include <sstream>

namespace delayq {

namespace {

Json from_toml(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json j = Json::object();
    for (const auto& [key, value] : *t) j[std::string(key.str())] = from_toml(value);
    return j;
  }
  if (const auto* a = node.as_array()) {
    Json j = Json::array();
    for (const auto& v : *a) j.push_back(from_toml(v));
    return j;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ValidationError("config: unsupported TOML value (dates and times are not used)");
}

const Json& section(const Json& doc, const char* name) {
  static const Json empty = Json::object();
  if (!doc.contains(name)) return empty;
  const Json& s = doc.at(name);
  if (!s.is_object()) throw ValidationError(fmt::format("{}: expected a table", name));
  return s;
}

const Json& required(const Json& s, const char* table, const char* key) {
  if (!s.contains(key)) throw ValidationError(fmt::format("{}.{}: missing", table, key));
  return s.at(key);
}

double number(const Json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field + ": expected a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ValidationError(field + ": expected an integer");
  return v.get<int>();
}

double positive(const Json& s, const char* table, const char* key, double fallback) {
  if (!s.contains(key)) return fallback;
  const double v = number(s.at(key), fmt::format("{}.{}", table, key));
  if (!(v > 0.0)) throw ValidationError(fmt::format("{}.{}: must be positive", table, key));
  return v;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ValidationError(field + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], field);
  return v;
}

Json read_document(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  if (path.extension() == ".json") {
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ValidationError(fmt::format("config: {}", e.what()));
    }
  }
  try {
    return from_toml(toml::parse(text, path.string()));
  } catch (const toml::parse_error& e) {
    throw ValidationError(fmt::format("config: {} at line {}", e.description(),
                                      e.source().begin.line));
  }
}

}  // namespace

RunConfig parse_config(const Json& doc, const std::filesystem::path& base) {
  if (!doc.is_object()) throw ValidationError("config: expected a table at top level");
  RunConfig c;
  if (doc.contains("schema")) c.schema = integer(doc.at("schema"), "schema");
  if (c.schema != 1) throw ValidationError(fmt::format("schema: unsupported version {}", c.schema));
  if (doc.contains("seed")) {
    const Json& s = doc.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) {
      throw ValidationError("seed: expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }

  const Json& sys = section(doc, "system");
  c.sys.A = matrix_from_json(required(sys, "system", "A"), "system.A");
  c.sys.B = matrix_from_json(required(sys, "system", "B"), "system.B");
  c.sys.D = matrix_from_json(required(sys, "system", "D"), "system.D");
  c.sys.h = number(required(sys, "system", "h"), "system.h");
  c.sys.validate();

  const Json& w = section(doc, "weights");
  c.weights.Q = matrix_from_json(required(w, "weights", "Q"), "weights.Q");
  c.weights.R = matrix_from_json(required(w, "weights", "R"), "weights.R");
  if (c.weights.Q.rows() != c.sys.n() || c.weights.Q.cols() != c.sys.n()) {
    throw ValidationError("weights.Q: must be n x n");
  }
  if (c.weights.R.rows() != c.sys.r() || c.weights.R.cols() != c.sys.r()) {
    throw ValidationError("weights.R: must be r x r");
  }
  if (const auto problems = validate_weights(c.weights); !problems.empty()) {
    throw ValidationError("weights: " + problems.front());
  }

  const Json& grid = section(doc, "grid");
  if (grid.contains("N")) c.N = integer(grid.at("N"), "grid.N");
  if (grid.contains("T_multiple")) c.T_multiple = integer(grid.at("T_multiple"), "grid.T_multiple");
  if (c.N < 2) throw ValidationError("grid.N: must be at least 2");
  if (c.T_multiple < 5) throw ValidationError("grid.T_multiple: must be at least 5");

  const Json& tol = section(doc, "tolerances");
  c.gain_tolerance = positive(tol, "tolerances", "gain", c.gain_tolerance);
  c.residual_tolerance = positive(tol, "tolerances", "residual", 0.0);
  c.quadrature_tolerance = positive(tol, "tolerances", "quadrature", c.quadrature_tolerance);
  c.tail_tolerance = positive(tol, "tolerances", "tail", c.tail_tolerance);

  const ThetaGrid g = c.grid();
  if (doc.contains("law")) {
    const Json& law = section(doc, "law");
    if (law.contains("file")) {
      if (!law.at("file").is_string()) throw ValidationError("law.file: expected a path");
      std::filesystem::path p = law.at("file").get<std::string>();
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) throw ValidationError("law.file: " + p.string() + " does not exist");
      std::ifstream is(p, std::ios::binary);
      Json file;
      try {
        file = Json::parse(is);
      } catch (const Json::parse_error& e) {
        throw ValidationError(fmt::format("law.file: {}", e.what()));
      }
      c.law = law_from_json(file, g);
    } else {
      c.law = law_from_json(law, g);
    }
    validate_law(c.sys, *c.law, g);
  }

  if (doc.contains("initial")) {
    const Json& init = section(doc, "initial");
    InitialFunction phi;
    if (init.contains("constant")) {
      phi = InitialFunction::constant(vector_from_json(init.at("constant"), "initial.constant"), g.size());
    } else if (init.contains("samples")) {
      const Json& s = init.at("samples");
      if (!s.is_array() || static_cast<int>(s.size()) != g.size()) {
        throw ValidationError(fmt::format("initial.samples: expected {} samples", g.size()));
      }
      for (const auto& v : s) phi.samples.push_back(vector_from_json(v, "initial.samples"));
    } else {
      throw ValidationError("initial: expected `constant` or `samples`");
    }
    validate_initial(phi, c.sys.n(), g);
    c.initial = std::move(phi);
  }

  const Json& syn = section(doc, "synthesize");
  if (syn.contains("max_iterations")) {
    c.max_iterations = integer(syn.at("max_iterations"), "synthesize.max_iterations");
    if (c.max_iterations < 0) throw ValidationError("synthesize.max_iterations: must be non-negative");
  }

  const Json& abl = section(doc, "ablate");
  if (abl.contains("magnitudes")) {
    const Json& m = abl.at("magnitudes");
    if (!m.is_array() || m.empty()) throw ValidationError("ablate.magnitudes: expected a non-empty array");
    c.magnitudes.clear();
    for (const auto& v : m) {
      const double x = number(v, "ablate.magnitudes");
      if (x < 0.0) throw ValidationError("ablate.magnitudes: must be non-negative");
      c.magnitudes.push_back(x);
    }
  }
  if (abl.contains("directions")) c.directions = integer(abl.at("directions"), "ablate.directions");
  if (abl.contains("initial_functions")) {
    c.initial_functions = integer(abl.at("initial_functions"), "ablate.initial_functions");
  }
  if (c.directions < 1) throw ValidationError("ablate.directions: must be at least 1");
  if (c.initial_functions < 1) throw ValidationError("ablate.initial_functions: must be at least 1");

  const Json& rep = section(doc, "report");
  if (rep.contains("initial_functions")) {
    c.suite_size = integer(rep.at("initial_functions"), "report.initial_functions");
    if (c.suite_size < 1) throw ValidationError("report.initial_functions: must be at least 1");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_document(path), path.parent_path());
}

}  // namespace delayq
