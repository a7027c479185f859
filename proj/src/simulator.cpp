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
#include "delayq/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace delayq {

DivergenceError::DivergenceError(double t)
    : std::runtime_error(fmt::format("divergence detected at t={:.6g}; inadmissible law", t)),
      time_(t) {}

HorizonError::HorizonError(const std::string& what, double suggested_horizon)
    : std::runtime_error(what), suggested_(suggested_horizon) {}

namespace {

constexpr double kBlowUp = 1e100;

/// Method-of-steps state: prehistory samples on [-h, 0] (left limits) and
/// the computed solution on [0, t_n].
class History {
 public:
  History(int N, std::vector<Matrix> pre, Matrix initial) : N_(N), pre_(std::move(pre)) {
    x_.push_back(std::move(initial));
  }

  [[nodiscard]] int last() const { return static_cast<int>(x_.size()) - 1; }
  void push(Matrix v) { x_.push_back(std::move(v)); }
  [[nodiscard]] const std::vector<Matrix>& solution() const { return x_; }

  [[nodiscard]] Matrix node(int j, Side side) const {
    if (j < 0) return pre_[j + N_];
    if (j > 0) return x_[j];
    switch (side) {
      case Side::left: return pre_[N_];
      case Side::right: return x_[0];
      case Side::mid: break;
    }
    return 0.5 * (pre_[N_] + x_[0]);
  }

  /// Value at (j + 1/2) * step.
  [[nodiscard]] Matrix half(int j) const {
    if (j < 0) return 0.5 * (pre_[j + N_] + pre_[j + N_ + 1]);
    const int s0 = (j / N_) * N_;
    const int s1 = std::min(s0 + N_, last());
    const int count = std::min(4, s1 - s0 + 1);
    const int lo = std::clamp(j - 1, s0, s1 - count + 1);
    const double x = j + 0.5;
    Matrix out = Matrix::Zero(x_[0].rows(), x_[0].cols());
    for (int a = lo; a < lo + count; ++a) {
      double c = 1.0;
      for (int b = lo; b < lo + count; ++b) {
        if (b != a) c *= (x - b) / static_cast<double>(a - b);
      }
      out += c * x_[a];
    }
    return out;
  }

 private:
  int N_;
  std::vector<Matrix> pre_;
  std::vector<Matrix> x_;
};

/// Right-hand side of the closed loop at stage time tau = t_n + offset*step,
/// offset in {0, 1/2, 1}; `offset2` is 2*offset.
Matrix rhs(const ClosedLoopSystem& cl, const History& hist, int n, int offset2,
           const Matrix& Y) {
  const ThetaGrid& g = cl.grid;
  const int N = g.intervals();
  Matrix f = cl.A0 * Y;
  auto sample = [&](int k, bool delayed) -> Matrix {
    // Node or half-node at tau - h + k*step.
    if (offset2 == 1) return hist.half(n - N + k);
    const int j = n + offset2 / 2 - N + k;
    if (delayed) return hist.node(j, offset2 == 0 ? Side::right : Side::left);
    return hist.node(j, k == 0 ? Side::right : Side::mid);
  };
  if (!cl.A1.isZero(0.0)) f.noalias() += cl.A1 * sample(0, true);
  for (int k = 0; k < N; ++k) {
    if (cl.G[k].isZero(0.0)) continue;
    f.noalias() += g.weight(k) * cl.G[k] * sample(k, false);
  }
  f.noalias() += g.weight(N) * cl.G[N] * Y;
  return f;
}

std::vector<Matrix> integrate(const ClosedLoopSystem& cl, std::vector<Matrix> pre,
                              Matrix initial, const TimeGrid& grid) {
  if (!(grid.theta() == cl.grid)) {
    throw ContractViolation("time grid step is not aligned with the closed-loop theta grid");
  }
  const double dt = grid.step();
  History hist(grid.delay_steps(), std::move(pre), std::move(initial));
  for (int n = 0; n < grid.horizon_steps(); ++n) {
    const Matrix& x = hist.solution()[n];
    const Matrix k1 = rhs(cl, hist, n, 0, x);
    const Matrix k2 = rhs(cl, hist, n, 1, x + 0.5 * dt * k1);
    const Matrix k3 = rhs(cl, hist, n, 1, x + 0.5 * dt * k2);
    const Matrix k4 = rhs(cl, hist, n, 2, x + dt * k3);
    Matrix next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kBlowUp) {
      throw DivergenceError(grid.time(n + 1));
    }
    hist.push(std::move(next));
  }
  return hist.solution();
}

}  // namespace

double fitted_decay_rate(std::span<const double> norms, double dt) {
  const auto m = norms.size();
  if (m < 2) return 0.0;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double y = std::log(std::max(norms[i], std::numeric_limits<double>::min()));
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double md = static_cast<double>(m);
  const double slope = (md * sty - st * sy) / (md * stt - st * st);
  return -slope;
}

SampledKernel::SampledKernel(TimeGrid grid, std::vector<Matrix> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.horizon_steps() + 1) {
    throw ContractViolation("kernel sample count does not match the time grid");
  }
  const auto nn = values_.front().rows();
  zero_ = Matrix::Zero(nn, nn);
  half_identity_ = 0.5 * Matrix::Identity(nn, nn);
  const int M = grid_.horizon_steps();
  const int from = M - 2 * grid_.delay_steps();
  std::vector<double> norms;
  for (int j = std::max(0, from); j <= M; ++j) norms.push_back(values_[j].norm());
  decay_rate_ = fitted_decay_rate(norms, grid_.step());
}

const Matrix& SampledKernel::at(int m, Side side) const {
  if (m < 0) return zero_;
  if (m > grid_.horizon_steps()) {
    throw ContractViolation("kernel argument beyond the horizon: index " + std::to_string(m));
  }
  if (m == 0) {
    if (side == Side::left) return zero_;
    if (side == Side::mid) return half_identity_;
  }
  return values_[m];
}

Trajectory integrate_closed_loop(const ClosedLoopSystem& cl, const InitialFunction& phi,
                                 const TimeGrid& grid) {
  validate_initial(phi, cl.n(), cl.grid);
  std::vector<Matrix> pre(phi.samples.begin(), phi.samples.end());
  auto sol = integrate(cl, pre, phi.at_zero(), grid);
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(pre.size() - 1 + sol.size());
  for (std::size_t k = 0; k + 1 < pre.size(); ++k) traj.states.emplace_back(pre[k].col(0));
  for (auto& x : sol) traj.states.emplace_back(x.col(0));
  return traj;
}

Trajectory simulate(const DelaySystem& sys, const ControlLaw& law, const InitialFunction& phi,
                    const TimeGrid& grid) {
  const ThetaGrid& tg = grid.theta();
  Trajectory traj = integrate_closed_loop(close_loop(sys, law, tg), phi, grid);
  const int N = tg.intervals();
  traj.controls.reserve(grid.horizon_steps() + 1);
  for (int j = 0; j <= grid.horizon_steps(); ++j) {
    Vector u = law.gamma0 * traj.state(j);
    if (law.gamma2) u.noalias() += *law.gamma2 * traj.state(j - N);
    for (int k = 0; k <= N; ++k) u.noalias() += tg.weight(k) * law.gamma1[k] * traj.state(j - N + k);
    traj.controls.push_back(std::move(u));
  }
  return traj;
}

Trajectory impulse_response(const ClosedLoopSystem& cl, const TimeGrid& grid,
                            Eigen::Index column) {
  const auto nn = cl.n();
  std::vector<Matrix> pre(cl.grid.size(), Matrix::Zero(nn, 1));
  auto sol = integrate(cl, pre, Vector::Unit(nn, column), grid);
  Trajectory traj;
  traj.grid = grid;
  for (std::size_t k = 0; k + 1 < pre.size(); ++k) traj.states.emplace_back(pre[k].col(0));
  for (auto& x : sol) traj.states.emplace_back(x.col(0));
  return traj;
}

SampledKernel fundamental_matrix(const ClosedLoopSystem& cl, const TimeGrid& grid) {
  const auto nn = cl.n();
  std::vector<Matrix> pre(cl.grid.size(), Matrix::Zero(nn, nn));
  return SampledKernel(grid, integrate(cl, std::move(pre), Matrix::Identity(nn, nn), grid));
}

Matrix cauchy_distributed_kernel(const ClosedLoopSystem& cl, const SampledKernel& K, int m,
                                 int k) {
  const ThetaGrid& g = cl.grid;
  Matrix out = Matrix::Zero(cl.n(), cl.n());
  for (int i = 0; i <= k; ++i) {
    const int arg = m - k + i;
    if (arg < 0) continue;
    out.noalias() += g.partial_weight(i, k) * K.at(arg, endpoint_side(i, 0, k, +1)) * cl.G[i];
  }
  return out;
}

Vector cauchy_reconstruct(const ClosedLoopSystem& cl, const SampledKernel& K,
                          const InitialFunction& phi, int j) {
  const TimeGrid& grid = K.grid();
  const int N = grid.delay_steps();
  if (j < 0 || j > grid.horizon_steps() - N) {
    throw ContractViolation("cauchy_reconstruct: time index outside [0, T - h]");
  }
  validate_initial(phi, cl.n(), cl.grid);
  Vector x = K.at(j) * phi.at_zero();
  for (int k = 0; k <= N; ++k) {
    const Matrix F = K.at(j - k, endpoint_side(k, 0, N, -1)) * cl.A1 +
                     cauchy_distributed_kernel(cl, K, j, k);
    x.noalias() += cl.grid.weight(k) * F * phi.samples[k];
  }
  return x;
}

CostResult direct_cost(const DelaySystem& sys, const CostWeights& w, const ControlLaw& law,
                       const InitialFunction& phi, const TimeGrid& grid) {
  const Trajectory traj = simulate(sys, law, phi, grid);
  const int M = grid.horizon_steps();
  const int N = grid.delay_steps();
  std::vector<double> integrand(M + 1);
  for (int j = 0; j <= M; ++j) {
    const Vector& x = traj.state(j);
    const Vector& u = traj.controls[j];
    integrand[j] = x.dot(w.Q * x) + u.dot(w.R * u);
  }
  CostResult out;
  for (int j = 0; j <= M; ++j) out.cost += grid.weight(j) * integrand[j];

  const double scale = phi.sup_norm();
  if (scale == 0.0) return out;
  std::vector<double> norms;
  for (int j = M - 2 * N; j <= M; ++j) norms.push_back(traj.state(j).norm());
  out.decay_rate = fitted_decay_rate(norms, grid.step());
  const double final_norm = norms.back();
  const double peak = *std::max_element(integrand.begin() + (M - N), integrand.end());
  if (out.decay_rate > 0.0) {
    out.tail_bound = peak / (2.0 * out.decay_rate);
    return out;
  }
  if (final_norm > 1e-3 * scale) {
    throw HorizonError(fmt::format("horizon too short: ||x(T)|| = {:.3g} is not decaying; "
                                   "increase T (suggested T = {:.6g})",
                                   final_norm, 2.0 * grid.horizon()),
                       2.0 * grid.horizon());
  }
  out.tail_bound = peak * 2.0 * sys.h;
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto nn = traj.states.front().size();
  const auto r = traj.controls.empty() ? 0 : traj.controls.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= nn; ++i) os << ",x" << i;
  for (Eigen::Index i = 1; i <= r; ++i) os << ",u" << i;
  os << "\r\n";
  const int N = traj.grid.delay_steps();
  for (int j = -N; j <= traj.grid.horizon_steps(); ++j) {
    os << fmt::format("{:.17g}", traj.grid.time(j));
    for (Eigen::Index i = 0; i < nn; ++i) os << fmt::format(",{:.17g}", traj.state(j)(i));
    for (Eigen::Index i = 0; i < r; ++i) {
      if (j >= 0) {
        os << fmt::format(",{:.17g}", traj.controls[j](i));
      } else {
        os << ",";
      }
    }
    os << "\r\n";
  }
}

}  // namespace delayq
