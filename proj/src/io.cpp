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
#include "delayq/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace delayq {

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

Json grid_json(const ThetaGrid& g) {
  Json j;
  j["h"] = g.delay();
  j["N"] = g.intervals();
  j["delta"] = g.step();
  return j;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    throw ValidationError(field + ": expected a number or a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty()) throw ValidationError(field + ": rows must be non-empty arrays");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError(field + ": ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ValidationError(field + ": entries must be numbers");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

Json to_json(const BellmanMatrices& pi) {
  const ThetaGrid& g = pi.grid;
  Json j;
  j["schema"] = 1;
  j["grid"] = grid_json(g);
  j["grid"]["horizon"] = pi.horizon;
  j["error"] = {{"tail_bound", pi.tail_bound}, {"decay_rate", pi.decay_rate}};
  j["pi0"] = matrix_to_json(pi.pi0);
  Json p1 = Json::array();
  for (int k = 0; k < g.size(); ++k) {
    p1.push_back({{"theta", g.node(k)}, {"matrix", matrix_to_json(pi.pi1[k])}});
  }
  j["pi1"] = std::move(p1);
  Json p2 = Json::array();
  for (int a = 0; a < g.size(); ++a) {
    for (int b = 0; b < g.size(); ++b) {
      p2.push_back({{"xi", g.node(a)}, {"theta", g.node(b)}, {"matrix", matrix_to_json(pi.pi2_at(a, b))}});
    }
  }
  j["pi2"] = std::move(p2);
  j["pi_local"] = matrix_to_json(pi.pi_local);
  return j;
}

Json to_json(const ControlLaw& law, const ThetaGrid& grid) {
  Json j;
  j["schema"] = 1;
  j["grid"] = grid_json(grid);
  j["gamma0"] = matrix_to_json(law.gamma0);
  Json g1 = Json::array();
  for (int k = 0; k < grid.size(); ++k) {
    g1.push_back({{"theta", grid.node(k)}, {"matrix", matrix_to_json(law.gamma1[k])}});
  }
  j["gamma1"] = std::move(g1);
  j["gamma2"] = law.gamma2 ? matrix_to_json(*law.gamma2) : Json(nullptr);
  return j;
}

Json to_json(const ResidualReport& r) {
  Json j;
  j["ross1"] = r.ross.r1;
  j["ross2"] = r.ross.r2;
  j["ross3"] = r.ross.r3;
  j["ross4"] = r.ross.r4;
  j["ross5"] = r.ross.r5;
  j["pi0_symmetry"] = r.pi0_symmetry;
  j["pi0_min_eigenvalue"] = r.pi0_min_eigenvalue;
  j["pi2_exchange"] = r.pi2_exchange;
  j["finite"] = r.finite;
  j["stationarity"] = r.stationarity;
  j["vj_gap"] = r.vj_gap;
  j["vj_bound"] = r.vj_bound;
  j["tolerances"] = {{"ross", r.tolerances.ross},
                     {"pi0_symmetry", r.tolerances.symmetry},
                     {"pi2_exchange", r.tolerances.exchange},
                     {"stationarity", r.tolerances.stationarity}};
  j["verdicts"] = {{"ross", r.ross_pass()},
                   {"properties", r.properties_pass()},
                   {"stationarity", r.stationarity_pass()},
                   {"vj", r.vj_pass()},
                   {"all", r.all_pass()}};
  return j;
}

ControlLaw law_from_json(const Json& j, const ThetaGrid& grid) {
  if (!j.is_object()) throw ValidationError("law: expected an object");
  ControlLaw law;
  if (!j.contains("gamma0")) throw ValidationError("law.gamma0: missing");
  law.gamma0 = matrix_from_json(j.at("gamma0"), "law.gamma0");
  if (j.contains("gamma1")) {
    const Json& g1 = j.at("gamma1");
    if (!g1.is_array() || static_cast<int>(g1.size()) != grid.size()) {
      throw ValidationError(fmt::format("law.gamma1: expected {} samples", grid.size()));
    }
    for (int k = 0; k < grid.size(); ++k) {
      const Json& s = g1[static_cast<std::size_t>(k)];
      const Json& m = s.is_object() ? s.at("matrix") : s;
      if (s.is_object() && s.contains("theta") &&
          std::abs(s.at("theta").get<double>() - grid.node(k)) > 1e-12 * grid.delay()) {
        throw ValidationError("law.gamma1: sample abscissae do not match the grid");
      }
      law.gamma1.push_back(matrix_from_json(m, fmt::format("law.gamma1[{}]", k)));
    }
  } else if (j.contains("gamma1_constant")) {
    law.gamma1.assign(grid.size(), matrix_from_json(j.at("gamma1_constant"), "law.gamma1_constant"));
  } else {
    law.gamma1.assign(grid.size(), Matrix::Zero(law.gamma0.rows(), law.gamma0.cols()));
  }
  if (j.contains("gamma2") && !j.at("gamma2").is_null()) {
    law.gamma2 = matrix_from_json(j.at("gamma2"), "law.gamma2");
  }
  return law;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << "iteration,value,r1,gain_change";
  if (!trace.records.empty()) {
    const Matrix& g0 = trace.records.front().law.gamma0;
    for (Eigen::Index i = 0; i < g0.rows(); ++i)
      for (Eigen::Index k = 0; k < g0.cols(); ++k) os << ",gamma0_" << i + 1 << '_' << k + 1;
  }
  os << ",gamma1_max\r\n";
  for (const auto& r : trace.records) {
    os << r.iteration << ',' << number(r.value) << ',' << number(r.r1) << ','
       << number(r.gain_change);
    for (Eigen::Index i = 0; i < r.law.gamma0.rows(); ++i)
      for (Eigen::Index k = 0; k < r.law.gamma0.cols(); ++k) os << ',' << number(r.law.gamma0(i, k));
    double g1 = 0.0;
    for (const auto& m : r.law.gamma1) g1 = std::max(g1, m.cwiseAbs().maxCoeff());
    os << ',' << number(g1) << "\r\n";
  }
}

void write_ablation_csv(std::ostream& os, const AblationResult& result) {
  os << "magnitude,direction,phi,J\r\n";
  for (const auto& s : result.samples) {
    os << number(s.magnitude) << ',' << s.direction << ',' << s.phi << ',' << number(s.cost)
       << "\r\n";
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += fmt::format(".tmp-{}", static_cast<long>(::getpid()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << content;
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  fs::rename(tmp, path);
}

}  // namespace delayq
