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
#include "delayq/synthesis.hpp"

#include "delayq/parallel.hpp"
#include "delayq/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace delayq {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// X with F'X + XF + C = 0 via the Kronecker form.
Matrix lyapunov(const Matrix& F, const Matrix& C) {
  const auto n = F.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix L = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // vec(F'X + XF) = (I ⊗ F' + F' ⊗ I) vec(X), column-major vec.
      L.block(i * n, j * n, n, n) += I(i, j) * F.transpose();
      L.block(i * n, j * n, n, n) += F(j, i) * I;
    }
  }
  const Vector c = Eigen::Map<const Vector>(C.data(), n * n);
  const Vector x = L.fullPivLu().solve(-c);
  Matrix X = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

double spectral_abscissa(const Matrix& A) {
  return Eigen::EigenSolver<Matrix>(A, false).eigenvalues().real().maxCoeff();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Matrix riccati_baseline(const Matrix& A, const Matrix& D, const Matrix& Q, const Matrix& R,
                        int max_iterations) {
  const auto n = A.rows();
  const Eigen::LLT<Matrix> Rllt(R);
  Matrix F = Matrix::Zero(D.cols(), n);
  if (spectral_abscissa(A) >= 0.0) {
    // Bass: shift A until anti-stable, then invert the controllability-type Gramian.
    const double beta = A.norm() + 1.0;
    const Matrix shifted = A + beta * Matrix::Identity(n, n);
    const Matrix Z = lyapunov(-shifted.transpose(), 2.0 * D * D.transpose());
    const Eigen::LLT<Matrix> Zllt(Z);
    if (Zllt.info() != Eigen::Success) throw NonConvergenceError("stabilizability check failed");
    F = -Zllt.solve(D).transpose();
    if (spectral_abscissa(A + D * F) >= 0.0) {
      throw NonConvergenceError("stabilizability check failed");
    }
  }
  Matrix P = Matrix::Zero(n, n);
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix Acl = A + D * F;
    if (!(spectral_abscissa(Acl) < 0.0)) throw NonConvergenceError("stabilizability check failed");
    const Matrix next = lyapunov(Acl, Q + F.transpose() * R * F);
    F = -Rllt.solve(D.transpose() * next);
    const double change = max_abs(next - P);
    P = next;
    if (change <= 1e-14 * std::max(1.0, max_abs(P))) {
      const Matrix residual = A.transpose() * P + P * A -
                              P * D * Rllt.solve(D.transpose() * P) + Q;
      if (max_abs(residual) <= 1e-10 * std::max(1.0, max_abs(P))) return P;
    }
  }
  throw NonConvergenceError("stabilizability check failed");
}

ControlLaw gain_update(const BellmanMatrices& pi, const DelaySystem& sys, const CostWeights& w) {
  const Eigen::LLT<Matrix> Rllt(w.R);
  ControlLaw law;
  law.gamma0 = -Rllt.solve(sys.D.transpose() * pi.pi0);
  law.gamma1.reserve(pi.pi1.size());
  for (const auto& P1 : pi.pi1) law.gamma1.push_back(-Rllt.solve(sys.D.transpose() * P1));
  return law;
}

double gain_change(const ControlLaw& a, const ControlLaw& b) {
  double worst = max_abs(a.gamma0 - b.gamma0);
  for (std::size_t k = 0; k < a.gamma1.size(); ++k) {
    worst = std::max(worst, max_abs(a.gamma1[k] - b.gamma1[k]));
  }
  const Matrix zero = Matrix::Zero(a.gamma0.rows(), a.gamma0.cols());
  worst = std::max(worst, max_abs(a.gamma2.value_or(zero) - b.gamma2.value_or(zero)));
  return worst;
}

ControlLaw default_initial_law(const DelaySystem& sys, const CostWeights& w,
                               const ThetaGrid& grid) {
  const Matrix P = riccati_baseline(sys.A + sys.B, sys.D, w.Q, w.R);
  ControlLaw law = ControlLaw::zero(sys.r(), sys.n(), grid.size());
  law.gamma0 = -w.R.llt().solve(sys.D.transpose() * P);
  return law;
}

void require_admissible(const DelaySystem& sys, const ControlLaw& law, const TimeGrid& grid) {
  const ClosedLoopSystem cl = close_loop(sys, law, grid.theta());
  const SampledKernel K = fundamental_matrix(cl, grid);
  if (!(K.decay_rate() > 0.0)) throw DivergenceError(grid.horizon());
}

SynthesisResult policy_iteration(const DelaySystem& sys, const CostWeights& w,
                                 const std::optional<ControlLaw>& init, const TimeGrid& grid,
                                 const SynthesisOptions& options) {
  const ThetaGrid& g = grid.theta();
  ControlLaw law = init ? *init : default_initial_law(sys, w, g);
  validate_law(sys, law, g);
  require_admissible(sys, law, grid);

  PiOptions popt;
  popt.tail_tolerance = options.tail_tolerance;
  popt.threads = options.threads;
  const InitialFunction reference = InitialFunction::constant(Vector::Ones(sys.n()), g.size());

  SynthesisResult out;
  double previous = 0.0;
  for (int it = 0;; ++it) {
    const ClosedLoopSystem cl = close_loop(sys, law, g);
    const SampledKernel K = fundamental_matrix(cl, grid);
    if (!(K.decay_rate() > 0.0)) throw DivergenceError(grid.horizon());
    BellmanMatrices pi = pi_matrices(cl, K, weight_kernels(w, law, g), popt);
    const ControlLaw next = gain_update(pi, sys, w);

    IterationRecord rec;
    rec.iteration = it;
    rec.law = law;
    rec.value = functional_value(pi, reference);
    rec.r1 = ross_residuals(sys, w, pi).r1;
    rec.gain_change = gain_change(law, next);
    out.trace.records.push_back(rec);

    const double tolerance = options.residual_tolerance > 0.0 ? options.residual_tolerance
                                                              : default_residual_tolerance(pi);
    out.law = law;
    out.pi = std::move(pi);
    if (rec.gain_change <= options.gain_tolerance && rec.r1 <= tolerance) {
      out.trace.converged = true;
      out.trace.reason = "gain change and r1 within tolerance";
      return out;
    }
    if (it > 0) {
      const double noise = 3.0 * std::max(out.pi.step * out.pi.step * std::abs(previous),
                                          functional_tail(out.pi, reference));
      if (rec.value > previous + noise) {
        out.trace.reason = fmt::format("no convergence: cost rose from {:.17g} to {:.17g}",
                                       previous, rec.value);
        return out;
      }
    }
    if (it >= options.max_iterations) {
      out.trace.reason = fmt::format("no convergence within {} iterations", options.max_iterations);
      return out;
    }
    previous = rec.value;
    law = next;
  }
}

AblationResult gamma2_ablation(const DelaySystem& sys, const CostWeights& w, const ControlLaw& opt,
                               const TimeGrid& grid, const AblationOptions& options) {
  const ThetaGrid& g = grid.theta();
  AblationResult res;
  res.magnitudes = options.magnitudes;
  res.directions = options.directions;
  res.functions = options.functions;

  std::mt19937_64 rng(options.seed);
  std::vector<Matrix> E;
  for (int d = 0; d < options.directions; ++d) {
    Matrix m(sys.r(), sys.n());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    E.push_back(m / m.norm());
  }
  const auto suite = phi_suite(options.seed + 1, options.functions, sys.n(), g);

  // Baseline cost per initial function.
  std::vector<double> base(suite.size());
  std::vector<double> base_tail(suite.size());
  parallel_for(static_cast<int>(suite.size()), options.threads, [&](int p) {
    const CostResult c = direct_cost(sys, w, opt, suite[p], grid);
    base[p] = c.cost;
    base_tail[p] = c.tail_bound;
  });

  const int M = static_cast<int>(res.magnitudes.size());
  const int tasks = options.directions * options.functions * M;
  res.samples.resize(tasks);
  parallel_for(tasks, options.threads, [&](int t) {
    const int m = t % M;
    const int p = (t / M) % options.functions;
    const int d = t / (M * options.functions);
    AblationSample& s = res.samples[t];
    s.magnitude = res.magnitudes[m];
    s.direction = d;
    s.phi = p;
    if (s.magnitude == 0.0) {
      s.cost = base[p];
      return;
    }
    ControlLaw law = opt;
    law.gamma2 = opt.gamma2.value_or(Matrix::Zero(sys.r(), sys.n())) + s.magnitude * E[d];
    try {
      s.cost = direct_cost(sys, w, law, suite[p], grid).cost;
    } catch (const DivergenceError&) {
      s.cost = std::numeric_limits<double>::infinity();
    } catch (const HorizonError&) {
      s.cost = std::numeric_limits<double>::infinity();
    }
  });

  for (std::size_t p = 0; p < suite.size(); ++p) {
    res.tolerance = std::max(res.tolerance, 1e-9 * std::max(1.0, base[p]) + base_tail[p]);
  }
  for (int d = 0; d < options.directions; ++d) {
    for (int p = 0; p < options.functions; ++p) {
      // Least-squares fit J = c0 + c1 m + c2 m² over the finite samples.
      Eigen::MatrixXd V(0, 3);
      Vector y(0);
      for (int m = 0; m < M; ++m) {
        const AblationSample& s = res.samples[(d * options.functions + p) * M + m];
        const double floor = base[p] - 1e-9 * std::max(1.0, base[p]) - base_tail[p];
        if (s.cost < floor) {
          res.minimum_at_zero = false;
          if (res.failure.empty()) {
            res.failure = fmt::format("direction {} function {} magnitude {}: J = {:.17g} < J(0) = {:.17g}",
                                      d, p, s.magnitude, s.cost, base[p]);
          }
        }
        if (!std::isfinite(s.cost)) continue;
        V.conservativeResize(V.rows() + 1, Eigen::NoChange);
        y.conservativeResize(y.size() + 1);
        V.row(V.rows() - 1) << 1.0, s.magnitude, s.magnitude * s.magnitude;
        y(y.size() - 1) = s.cost;
      }
      double curvature = std::numeric_limits<double>::quiet_NaN();
      int distinct = 0;
      {
        std::vector<double> ms;
        for (Eigen::Index i = 0; i < V.rows(); ++i) ms.push_back(V(i, 1));
        std::sort(ms.begin(), ms.end());
        distinct = static_cast<int>(std::unique(ms.begin(), ms.end()) - ms.begin());
      }
      if (distinct >= 3) {
        curvature = 2.0 * V.colPivHouseholderQr().solve(y)(2);
        if (!(curvature > 0.0)) {
          res.convex = false;
          if (res.failure.empty()) {
            res.failure = fmt::format("direction {} function {}: fitted curvature {:.6g}", d, p,
                                      curvature);
          }
        }
      }
      res.curvature.push_back(curvature);
    }
  }
  return res;
}

}  // namespace delayq
