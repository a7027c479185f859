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
#include "delayq/model.hpp"

#include <cmath>
#include <sstream>

namespace delayq {

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& field) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << field << ": expected " << rows << "x" << cols << ", got " << shape(m);
    throw ValidationError(os.str());
  }
  if (!m.allFinite()) throw ValidationError(field + ": non-finite entry");
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void DelaySystem::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("h: delay must be positive");
  const auto nn = A.rows();
  if (nn < 1) throw ValidationError("A: state dimension must be at least 1");
  require_shape(A, nn, nn, "A");
  require_shape(B, nn, nn, "B");
  if (D.rows() != nn) require_shape(D, nn, D.cols(), "D");
  if (D.cols() < 1 || D.cols() > nn) {
    throw ValidationError("D: input dimension r must satisfy 1 <= r <= n, got " + shape(D));
  }
  require_shape(D, nn, D.cols(), "D");
}

ThetaGrid::ThetaGrid(double h, int N) : h_(h), N_(N) {
  if (!(h > 0.0)) throw ValidationError("h: delay must be positive");
  if (N < 2) throw ValidationError("N: need at least 2 subintervals");
}

TimeGrid::TimeGrid(ThetaGrid theta, int horizon_multiple)
    : theta_(theta), multiple_(horizon_multiple) {
  if (horizon_multiple < 5) {
    throw ValidationError("T_multiple: horizon must be at least 5 delays");
  }
}

int TimeGrid::index_of(double t) const {
  const double x = t / step();
  const double j = std::round(x);
  if (std::abs(x - j) > 1e-9 || j < first_index() || j > horizon_steps()) {
    std::ostringstream os;
    os << "time " << t << " is not a node of the grid";
    throw ContractViolation(os.str());
  }
  return static_cast<int>(j);
}

ControlLaw ControlLaw::zero(Eigen::Index r, Eigen::Index n, int samples) {
  ControlLaw law;
  law.gamma0 = Matrix::Zero(r, n);
  law.gamma1.assign(samples, Matrix::Zero(r, n));
  return law;
}

double InitialFunction::sup_norm() const {
  double s = 0.0;
  for (const auto& v : samples) s = std::max(s, v.norm());
  return s;
}

InitialFunction InitialFunction::constant(const Vector& value, int samples) {
  return InitialFunction{std::vector<Vector>(samples, value)};
}

InitialFunction InitialFunction::zero(Eigen::Index n, int samples) {
  return constant(Vector::Zero(n), samples);
}

void validate_law(const DelaySystem& sys, const ControlLaw& law, const ThetaGrid& grid) {
  require_shape(law.gamma0, sys.r(), sys.n(), "gamma0");
  if (static_cast<int>(law.gamma1.size()) != grid.size()) {
    throw ValidationError("gamma1: expected " + std::to_string(grid.size()) +
                          " samples, got " + std::to_string(law.gamma1.size()));
  }
  for (std::size_t k = 0; k < law.gamma1.size(); ++k) {
    require_shape(law.gamma1[k], sys.r(), sys.n(), "gamma1[" + std::to_string(k) + "]");
  }
  if (law.gamma2) require_shape(*law.gamma2, sys.r(), sys.n(), "gamma2");
}

void validate_initial(const InitialFunction& phi, Eigen::Index n, const ThetaGrid& grid) {
  if (static_cast<int>(phi.samples.size()) != grid.size()) {
    throw ValidationError("initial function: expected " + std::to_string(grid.size()) +
                          " samples, got " + std::to_string(phi.samples.size()));
  }
  for (const auto& v : phi.samples) {
    if (v.size() != n) throw ValidationError("initial function: sample has wrong dimension");
    if (!v.allFinite()) throw ValidationError("initial function: non-finite sample");
  }
}

ClosedLoopSystem close_loop(const DelaySystem& sys, const ControlLaw& law,
                            const ThetaGrid& grid) {
  sys.validate();
  validate_law(sys, law, grid);
  ClosedLoopSystem cl;
  cl.grid = grid;
  cl.A0 = sys.A + sys.D * law.gamma0;
  cl.A1 = law.gamma2 ? Matrix(sys.B + sys.D * *law.gamma2) : sys.B;
  cl.G.reserve(law.gamma1.size());
  for (const auto& g : law.gamma1) cl.G.push_back(sys.D * g);
  return cl;
}

std::vector<std::string> validate_weights(const CostWeights& w) {
  std::vector<std::string> out;
  auto check = [&out](const Matrix& m, const std::string& name) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      out.push_back(name + " not square");
      return;
    }
    if (!m.allFinite()) {
      out.push_back(name + " has non-finite entries");
      return;
    }
    if (!is_symmetric(m)) out.push_back(name + " not symmetric");
    if (!is_positive_definite(m)) out.push_back(name + " not positive definite");
  };
  check(w.Q, "Q");
  check(w.R, "R");
  return out;
}

}  // namespace delayq
