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
#ifndef DELAYQ_SIMULATOR_HPP
#define DELAYQ_SIMULATOR_HPP

#include "delayq/model.hpp"

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace delayq {

/// The closed loop blew up; the law that produced it is not admissible.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(double t);
  [[nodiscard]] double time() const { return time_; }

 private:
  double time_;
};

/// The truncated horizon does not capture the decay of the solution.
class HorizonError : public std::runtime_error {
 public:
  HorizonError(const std::string& what, double suggested_horizon);
  [[nodiscard]] double suggested_horizon() const { return suggested_; }

 private:
  double suggested_;
};

/// Which one-sided limit to read at a jump. `mid` is the average of both,
/// which is what a composite trapezoid needs at an interior jump node.
enum class Side { left, mid, right };

/// Side to use for a kernel argument that vanishes at node i of a trapezoid
/// sum over indices [lo, hi], when the argument moves with the integration
/// variable in the direction `coefficient` (+1 or -1).
constexpr Side endpoint_side(int i, int lo, int hi, int coefficient) {
  if (i > lo && i < hi) return Side::mid;
  const bool rising = coefficient > 0;
  if (i == lo) return rising ? Side::right : Side::left;
  return rising ? Side::left : Side::right;
}

/// Fundamental matrix K(t_j) on [0, T]; K = 0 for t < 0 and K(0) = I.
class SampledKernel {
 public:
  SampledKernel(TimeGrid grid, std::vector<Matrix> values);

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] Eigen::Index n() const { return values_.front().rows(); }
  [[nodiscard]] const std::vector<Matrix>& values() const { return values_; }

  /// K at node index m; zero for m < 0. Throws ContractViolation past T.
  [[nodiscard]] const Matrix& at(int m, Side side = Side::right) const;

  /// Exponential decay rate of ||K(t)|| fitted on [T - 2h, T].
  [[nodiscard]] double decay_rate() const { return decay_rate_; }

 private:
  TimeGrid grid_;
  std::vector<Matrix> values_;
  Matrix zero_;
  Matrix half_identity_;
  double decay_rate_ = 0.0;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> states;    ///< x(t_j), j = -N .. M (offset by N)
  std::vector<Vector> controls;  ///< u(t_j), j = 0 .. M; empty without a law

  [[nodiscard]] const Vector& state(int j) const { return states.at(j + grid.delay_steps()); }
};

struct CostResult {
  double cost = 0.0;
  double tail_bound = 0.0;
  double decay_rate = 0.0;
};

/// Method of steps with the classical four-stage scheme. Delayed samples at
/// half steps come from cubic interpolation within one delay interval; the
/// distributed term is a composite trapezoid on the theta grid.
Trajectory integrate_closed_loop(const ClosedLoopSystem& cl, const InitialFunction& phi,
                                 const TimeGrid& grid);

/// Same as integrate_closed_loop, and records u(t_j) for the given law.
Trajectory simulate(const DelaySystem& sys, const ControlLaw& law, const InitialFunction& phi,
                    const TimeGrid& grid);

/// Impulse response: columnwise solutions with zero history and K(0) = I.
SampledKernel fundamental_matrix(const ClosedLoopSystem& cl, const TimeGrid& grid);

/// Distributed part of the Cauchy kernel at time t_m for history node s_k:
/// the trapezoid sum of K(t_m - s_k + xi) G(xi) over xi in [-h, s_k].
Matrix cauchy_distributed_kernel(const ClosedLoopSystem& cl, const SampledKernel& K, int m,
                                 int k);

/// Solution with zero history and x(0) = e_column (the impulse data whose
/// responses form the columns of the fundamental matrix).
Trajectory impulse_response(const ClosedLoopSystem& cl, const TimeGrid& grid, Eigen::Index column);

/// x(t_j) from the variation-of-constants formula; j must lie in [0, T - h].
Vector cauchy_reconstruct(const ClosedLoopSystem& cl, const SampledKernel& K,
                          const InitialFunction& phi, int j);

/// Trapezoid cost of a simulated trajectory over [0, T] plus the bound on
/// the truncated tail. Throws DivergenceError or HorizonError.
CostResult direct_cost(const DelaySystem& sys, const CostWeights& w, const ControlLaw& law,
                       const InitialFunction& phi, const TimeGrid& grid);

/// Least-squares slope of -log(values) against time spacing `dt`; the
/// exponential decay rate of a sampled norm sequence.
double fitted_decay_rate(std::span<const double> norms, double dt);

/// CSV with header t,x1..xn,u1..ur, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace delayq

#endif  // DELAYQ_SIMULATOR_HPP
