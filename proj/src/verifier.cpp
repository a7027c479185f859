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
#include "delayq/verifier.hpp"

#include "delayq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace delayq {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// D R^-1 D'
Matrix input_gramian(const DelaySystem& sys, const CostWeights& w) {
  return sys.D * w.R.llt().solve(sys.D.transpose());
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Law sampled on `target`, which is either half or twice as fine as the
/// law's own grid; doubling interpolates linearly.
ControlLaw resample(const ControlLaw& law, const ThetaGrid& from, const ThetaGrid& target) {
  ControlLaw out = law;
  out.gamma1.clear();
  if (target.intervals() * 2 == from.intervals()) {
    for (int k = 0; k < target.size(); ++k) out.gamma1.push_back(law.gamma1[2 * k]);
  } else {
    for (int k = 0; k < target.size(); ++k) {
      out.gamma1.push_back(k % 2 == 0 ? law.gamma1[k / 2]
                                      : Matrix(0.5 * (law.gamma1[k / 2] + law.gamma1[k / 2 + 1])));
    }
  }
  return out;
}

struct SuiteValues {
  std::vector<double> V;
  std::vector<double> J;
  std::vector<double> tails;
};

SuiteValues suite_values(const DelaySystem& sys, const CostWeights& w, const ControlLaw& law,
                         const BellmanMatrices& pi, const std::vector<InitialFunction>& suite,
                         const TimeGrid& tg, int threads) {
  SuiteValues out;
  const auto count = suite.size();
  out.V.resize(count);
  out.J.resize(count);
  out.tails.resize(count);
  parallel_for(static_cast<int>(count), threads, [&](int i) {
    const CostResult J = direct_cost(sys, w, law, suite[i], tg);
    out.V[i] = functional_value(pi, suite[i]);
    out.J[i] = J.cost;
    out.tails[i] = J.tail_bound + functional_tail(pi, suite[i]);
  });
  return out;
}

}  // namespace

double RossResiduals::max() const { return std::max({r1, r2, r3, r4, r5}); }

RossResiduals ross_residuals(const DelaySystem& sys, const CostWeights& w,
                             const BellmanMatrices& pi) {
  const ThetaGrid& g = pi.grid;
  const int N = g.intervals();
  const double d = g.step();
  const Matrix S = input_gramian(sys, w);
  const Matrix& P0 = pi.pi0;
  const auto& P1 = pi.pi1;
  RossResiduals r;

  r.r1 = max_abs(sys.A.transpose() * P0 + P0 * sys.A - P0 * S * P0 + P1[N].transpose() + P1[N] +
                 w.Q);

  const Matrix Acl = sys.A.transpose() - P0 * S;
  for (int k = 0; k <= N; ++k) {
    Matrix dP1;
    if (k == 0) {
      dP1 = (-3.0 * P1[0] + 4.0 * P1[1] - P1[2]) / (2.0 * d);
    } else if (k == N) {
      dP1 = (3.0 * P1[N] - 4.0 * P1[N - 1] + P1[N - 2]) / (2.0 * d);
    } else {
      dP1 = (P1[k + 1] - P1[k - 1]) / (2.0 * d);
    }
    r.r2 = std::max(r.r2, max_abs(dP1 - Acl * P1[k] - pi.pi2_at(N, k)));
  }

  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      const Matrix diff = (pi.pi2_at(a + 1, b + 1) - pi.pi2_at(a, b)) / d;
      const Matrix rhs = -0.5 * (P1[a].transpose() * S * P1[b] +
                                 P1[a + 1].transpose() * S * P1[b + 1]);
      r.r3 = std::max(r.r3, max_abs(diff - rhs));
    }
  }

  r.r4 = max_abs(P1[0] - P0 * sys.B);
  for (int k = 0; k <= N; ++k) {
    r.r5 = std::max(r.r5, max_abs(pi.pi2_at(0, k) - sys.B.transpose() * P1[k]));
  }
  return r;
}

double stationarity_residual(const DelaySystem& sys, const CostWeights& w,
                             const BellmanMatrices& pi, const Trajectory& traj) {
  const ThetaGrid& g = pi.grid;
  if (!(traj.grid.theta() == g)) {
    throw ContractViolation("stationarity_residual: trajectory and Π use different grids");
  }
  if (traj.controls.empty()) {
    throw ContractViolation("stationarity_residual: trajectory carries no controls");
  }
  const int N = g.intervals();
  const Matrix DtP0 = sys.D.transpose() * pi.pi0;
  std::vector<Matrix> DtP1;
  for (int k = 0; k <= N; ++k) DtP1.push_back(g.weight(k) * sys.D.transpose() * pi.pi1[k]);
  double worst = 0.0;
  for (int j = 0; j <= traj.grid.horizon_steps(); ++j) {
    Vector grad = w.R * traj.controls[j] + DtP0 * traj.state(j);
    for (int k = 0; k <= N; ++k) grad.noalias() += DtP1[k] * traj.state(j + k - N);
    worst = std::max(worst, 2.0 * grad.cwiseAbs().maxCoeff());
  }
  return worst;
}

double pi0_symmetry(const BellmanMatrices& pi) { return max_abs(pi.pi0 - pi.pi0.transpose()); }

double pi0_min_eigenvalue(const BellmanMatrices& pi) {
  const Matrix sym = 0.5 * (pi.pi0 + pi.pi0.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double pi2_exchange(const BellmanMatrices& pi) {
  const int S = pi.grid.size();
  double worst = 0.0;
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) {
      worst = std::max(worst, max_abs(pi.pi2_at(a, b).transpose() - pi.pi2_at(b, a)));
    }
  }
  return worst;
}

bool all_finite(const BellmanMatrices& pi) {
  auto ok = [](const Matrix& m) { return m.allFinite(); };
  return ok(pi.pi0) && std::all_of(pi.pi1.begin(), pi.pi1.end(), ok) &&
         std::all_of(pi.pi2.begin(), pi.pi2.end(), ok) && std::isfinite(pi.tail_bound);
}

bool ResidualReport::ross_pass() const { return ross.max() <= tolerances.ross; }

bool ResidualReport::properties_pass() const {
  return finite && pi0_symmetry <= tolerances.symmetry && pi0_min_eigenvalue > 0.0 &&
         pi2_exchange <= tolerances.exchange;
}

bool ResidualReport::stationarity_pass() const {
  return stationarity <= tolerances.stationarity;
}

bool ResidualReport::vj_pass() const { return vj_gap <= vj_bound; }

bool ResidualReport::all_pass() const {
  return ross_pass() && properties_pass() && stationarity_pass() && vj_pass();
}

std::vector<InitialFunction> phi_suite(std::uint64_t seed, int count, Eigen::Index n,
                                       const ThetaGrid& grid) {
  std::vector<InitialFunction> out;
  if (count <= 0) return out;
  out.push_back(InitialFunction::constant(Vector::Ones(n), grid.size()));
  std::mt19937_64 rng(seed);
  const double h = grid.delay();
  const double pi = std::acos(-1.0);
  for (int i = 1; i < count; ++i) {
    Vector c[3];
    for (auto& v : c) {
      v.resize(n);
      for (Eigen::Index r = 0; r < n; ++r) v(r) = uniform(rng, -1.0, 1.0);
    }
    InitialFunction phi;
    for (int k = 0; k < grid.size(); ++k) {
      const double s = grid.node(k) / h;
      phi.samples.push_back(c[0] + s * c[1] + std::cos(pi * s) * c[2]);
    }
    out.push_back(std::move(phi));
  }
  return out;
}

double default_residual_tolerance(const BellmanMatrices& pi) {
  return std::max(10.0 * pi.step * pi.step, 10.0 * pi.tail_bound);
}

ResidualReport property_report(const DelaySystem& sys, const CostWeights& w,
                               const ControlLaw& law, const BellmanMatrices& pi,
                               const ReportOptions& options) {
  ResidualReport rep;
  const ThetaGrid& g = pi.grid;
  rep.ross = ross_residuals(sys, w, pi);
  rep.pi0_symmetry = pi0_symmetry(pi);
  rep.pi0_min_eigenvalue = pi0_min_eigenvalue(pi);
  rep.pi2_exchange = pi2_exchange(pi);
  rep.finite = all_finite(pi);
  rep.tolerances.ross = options.residual_tolerance > 0.0 ? options.residual_tolerance
                                                         : default_residual_tolerance(pi);
  rep.tolerances.symmetry = 1e-10 * max_abs(pi.pi0);
  rep.tolerances.exchange = options.quadrature_tolerance;

  const int multiple = static_cast<int>(std::lround(pi.horizon / g.delay()));
  const TimeGrid tg(g, multiple);
  const auto suite = phi_suite(options.seed, std::max(1, options.suite_size), sys.n(), g);
  rep.tolerances.stationarity = options.stationarity_tolerance > 0.0 ? options.stationarity_tolerance
                                                                     : rep.tolerances.ross;
  const ControlLaw& applied = options.stationarity_law ? *options.stationarity_law : law;
  rep.stationarity = stationarity_residual(sys, w, pi, simulate(sys, applied, suite.front(), tg));

  // Second grid for the discretization estimate: half as fine when possible.
  const int N = g.intervals();
  const bool coarser = N % 2 == 0 && N / 2 >= 2;
  const ThetaGrid g2(g.delay(), coarser ? N / 2 : 2 * N);
  const ControlLaw law2 = resample(law, g, g2);
  const TimeGrid tg2(g2, multiple);
  const ClosedLoopSystem cl2 = close_loop(sys, law2, g2);
  PiOptions loose;
  loose.tail_tolerance = 1.0;
  loose.threads = options.threads;
  const BellmanMatrices pi2 =
      pi_matrices(cl2, fundamental_matrix(cl2, tg2), weight_kernels(w, law2, g2), loose);
  const auto suite2 = phi_suite(options.seed, std::max(1, options.suite_size), sys.n(), g2);

  const SuiteValues a = suite_values(sys, w, law, pi, suite, tg, options.threads);
  const SuiteValues b = suite_values(sys, w, law2, pi2, suite2, tg2, options.threads);
  const double scale = coarser ? 1.0 / 3.0 : 4.0 / 3.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const double estimate = scale * (std::abs(a.V[i] - b.V[i]) + std::abs(a.J[i] - b.J[i]));
    const double gap = std::abs(a.V[i] - a.J[i]);
    const double bound = a.tails[i] + 2.0 * estimate;
    // Report the initial function closest to violating its own bound.
    if (i == 0 || gap * rep.vj_bound > rep.vj_gap * bound) {
      rep.vj_gap = gap;
      rep.vj_bound = bound;
    }
  }
  return rep;
}

}  // namespace delayq
