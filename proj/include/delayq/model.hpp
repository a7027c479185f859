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
#ifndef DELAYQ_MODEL_HPP
#define DELAYQ_MODEL_HPP

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace delayq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an input violates a documented invariant. The message names
/// the offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a precondition on grid alignment or index range is violated.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Plant  x'(t) = A x(t) + B x(t-h) + D u(t).
struct DelaySystem {
  Matrix A;
  Matrix B;
  Matrix D;
  double h = 1.0;

  [[nodiscard]] Eigen::Index n() const { return A.rows(); }
  [[nodiscard]] Eigen::Index r() const { return D.cols(); }

  /// Throws ValidationError on inconsistent dimensions or h <= 0.
  void validate() const;
};

struct CostWeights {
  Matrix Q;
  Matrix R;
};

/// Uniform grid on [-h, 0] with N subintervals. Node k sits at -h + k*step.
class ThetaGrid {
 public:
  ThetaGrid() = default;
  ThetaGrid(double h, int N);

  [[nodiscard]] int intervals() const { return N_; }
  [[nodiscard]] int size() const { return N_ + 1; }
  [[nodiscard]] double delay() const { return h_; }
  [[nodiscard]] double step() const { return h_ / N_; }
  [[nodiscard]] double node(int k) const { return -h_ + k * step(); }

  /// Composite-trapezoid weight of node k over [-h, 0].
  [[nodiscard]] double weight(int k) const {
    return (k == 0 || k == N_) ? 0.5 * step() : step();
  }

  /// Composite-trapezoid weight of node i over [-h, node(upper)].
  [[nodiscard]] double partial_weight(int i, int upper) const {
    if (upper == 0) return 0.0;
    return (i == 0 || i == upper) ? 0.5 * step() : step();
  }

  friend bool operator==(const ThetaGrid& a, const ThetaGrid& b) {
    return a.N_ == b.N_ && a.h_ == b.h_;
  }

 private:
  double h_ = 1.0;
  int N_ = 2;
};

/// Nodes t_j = j*step for j = -N .. horizon_steps(); the step is shared with
/// the theta grid so every shifted kernel argument is an exact node.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(ThetaGrid theta, int horizon_multiple);

  [[nodiscard]] const ThetaGrid& theta() const { return theta_; }
  [[nodiscard]] int delay_steps() const { return theta_.intervals(); }
  [[nodiscard]] int horizon_multiple() const { return multiple_; }
  [[nodiscard]] int horizon_steps() const { return multiple_ * theta_.intervals(); }
  [[nodiscard]] double horizon() const { return multiple_ * theta_.delay(); }
  [[nodiscard]] double step() const { return theta_.step(); }
  [[nodiscard]] double time(int j) const { return j * step(); }
  [[nodiscard]] int first_index() const { return -delay_steps(); }

  /// Index of the node at time t; throws ContractViolation if t is off-grid.
  [[nodiscard]] int index_of(double t) const;

  /// Trapezoid weight of node j (0 <= j <= horizon_steps()) over [0, T].
  [[nodiscard]] double weight(int j) const {
    return (j == 0 || j == horizon_steps()) ? 0.5 * step() : step();
  }

 private:
  ThetaGrid theta_;
  int multiple_ = 5;
};

/// u(t) = gamma0 x(t) + int gamma1(theta) x(t+theta) dtheta + gamma2 x(t-h).
/// gamma1 is sampled at theta-grid nodes; an absent gamma2 means zero.
struct ControlLaw {
  Matrix gamma0;
  std::vector<Matrix> gamma1;
  std::optional<Matrix> gamma2;

  /// Zero gains of shape r x n on a grid with `samples` nodes.
  static ControlLaw zero(Eigen::Index r, Eigen::Index n, int samples);
};

struct ClosedLoopSystem {
  Matrix A0;
  Matrix A1;
  std::vector<Matrix> G;
  ThetaGrid grid;

  [[nodiscard]] Eigen::Index n() const { return A0.rows(); }
};

/// Initial function sampled at theta-grid nodes, piecewise linear in between.
struct InitialFunction {
  std::vector<Vector> samples;

  [[nodiscard]] const Vector& at_zero() const { return samples.back(); }
  [[nodiscard]] double sup_norm() const;

  static InitialFunction constant(const Vector& value, int samples);
  static InitialFunction zero(Eigen::Index n, int samples);
};

void validate_law(const DelaySystem& sys, const ControlLaw& law, const ThetaGrid& grid);
void validate_initial(const InitialFunction& phi, Eigen::Index n, const ThetaGrid& grid);

/// A0 = A + D gamma0, A1 = B + D gamma2, G(theta_k) = D gamma1(theta_k).
ClosedLoopSystem close_loop(const DelaySystem& sys, const ControlLaw& law,
                            const ThetaGrid& grid);

/// Empty iff Q and R are both symmetric and positive definite.
std::vector<std::string> validate_weights(const CostWeights& w);

}  // namespace delayq

#endif  // DELAYQ_MODEL_HPP
