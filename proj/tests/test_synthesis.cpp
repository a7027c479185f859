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
#include "doctest.h"

#include "delayq/synthesis.hpp"
#include "oracle/instances.hpp"

#include <cmath>

using namespace delayq;
using namespace delayq::testing;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

const double kRoot = std::sqrt(2.0) - 1.0;

DelaySystem scalar_delay() { return DelaySystem{scalar(-1.0), scalar(0.2), scalar(1.0), 1.0}; }
CostWeights unit_weights() { return CostWeights{scalar(1.0), scalar(1.0)}; }

double max_gamma1(const ControlLaw& law) {
  double m = 0.0;
  for (const auto& g : law.gamma1) m = std::max(m, g.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("riccati baseline closed forms") {
  CHECK(riccati_baseline(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(1.0))(0, 0) ==
        doctest::Approx(kRoot).epsilon(1e-12));
  CHECK(riccati_baseline(scalar(0.0), scalar(1.0), scalar(1.0), scalar(1.0))(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(riccati_baseline(scalar(-1.0), scalar(1.0), scalar(1e-12), scalar(1.0))(0, 0) <= 1e-11);
  // Unstable plant: 2a P - P² + 1 = 0 with a = 1 gives P = 1 + √2.
  CHECK(riccati_baseline(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0))(0, 0) ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("riccati baseline on random plants") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Draw draw(seed);
    const Matrix A = draw.matrix(3, 3, 1.0);
    const Matrix D = draw.matrix(3, 2, 1.0);
    const Matrix Q = draw.spd(3, 0.5), R = draw.spd(2, 0.5);
    const Matrix P = riccati_baseline(A, D, Q, R);
    const Matrix res = A.transpose() * P + P * A - P * D * R.llt().solve(D.transpose() * P) + Q;
    CHECK(res.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().minCoeff() > 0.0);
    const Matrix Acl = A - D * R.llt().solve(D.transpose() * P);
    CHECK(Eigen::EigenSolver<Matrix>(Acl).eigenvalues().real().maxCoeff() < 0.0);
  }
}

TEST_CASE("riccati baseline rejects unstabilizable pairs") {
  CHECK_THROWS_AS(riccati_baseline(scalar(1.0), scalar(0.0), scalar(1.0), scalar(1.0)),
                  NonConvergenceError);
}

TEST_CASE("gain update") {
  const ThetaGrid g(1.0, 4);
  BellmanMatrices pi;
  pi.grid = g;
  pi.pi0 = scalar(kRoot);
  pi.pi1.assign(g.size(), scalar(0.0));
  const DelaySystem sys = scalar_delay();
  const ControlLaw law = gain_update(pi, sys, unit_weights());
  CHECK(law.gamma0(0, 0) == doctest::Approx(-0.414214).epsilon(1e-6));
  CHECK(max_gamma1(law) == 0.0);
  CHECK_FALSE(law.gamma2.has_value());

  for (int k = 0; k < g.size(); ++k) pi.pi1[k] = scalar(0.3 * k);
  const ControlLaw one = gain_update(pi, sys, unit_weights());
  const ControlLaw two = gain_update(pi, sys, CostWeights{scalar(1.0), scalar(2.0)});
  CHECK(two.gamma0(0, 0) == doctest::Approx(0.5 * one.gamma0(0, 0)).epsilon(1e-15));
  for (int k = 0; k < g.size(); ++k)
    CHECK(two.gamma1[k](0, 0) == doctest::Approx(0.5 * one.gamma1[k](0, 0)).epsilon(1e-15));
}

TEST_CASE("policy iteration without a delayed state term") {
  Matrix A(2, 2);
  A << -0.5, 1.0, -0.3, 0.2;
  Matrix D(2, 1);
  D << 0.0, 1.0;
  const DelaySystem sys{A, Matrix::Zero(2, 2), D, 0.1};
  const CostWeights w{Matrix::Identity(2, 2), Matrix::Identity(1, 1)};
  const SynthesisResult res = policy_iteration(sys, w, std::nullopt, TimeGrid(ThetaGrid(0.1, 20), 100));
  REQUIRE(res.trace.converged);
  CHECK(res.trace.records.size() <= 3);
  const Matrix P = riccati_baseline(A, D, w.Q, w.R);
  CHECK((res.pi.pi0 - P).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK((res.law.gamma0 + D.transpose() * P).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(max_gamma1(res.law) <= 1e-6);
}

TEST_CASE("policy iteration on the scalar delay plant") {
  const DelaySystem sys = scalar_delay();
  const CostWeights w = unit_weights();
  const TimeGrid tg(ThetaGrid(1.0, 20), 10);
  const SynthesisResult res = policy_iteration(sys, w, std::nullopt, tg);
  REQUIRE(res.trace.converged);

  SUBCASE("beats every constant gain") {
    const InitialFunction phi = InitialFunction::constant(Vector::Ones(1), tg.theta().size());
    const double best = direct_cost(sys, w, res.law, phi, tg).cost;
    double scan = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
      ControlLaw law = ControlLaw::zero(1, 1, tg.theta().size());
      law.gamma0 = scalar(-2.0 + 0.01 * i);
      scan = std::min(scan, direct_cost(sys, w, law, phi, tg).cost);
    }
    CHECK(best <= scan + 1e-4);
  }
  SUBCASE("cost decreases along the trace") {
    const auto& r = res.trace.records;
    for (std::size_t i = 1; i < r.size(); ++i) {
      const double noise = 3.0 * std::max(tg.step() * tg.step() * r[i - 1].value, res.pi.tail_bound);
      CHECK(r[i].value <= r[i - 1].value + noise);
    }
  }
  SUBCASE("fixed point") {
    SynthesisOptions opt;
    opt.max_iterations = 1;
    const SynthesisResult again = policy_iteration(sys, w, res.law, tg, opt);
    CHECK(again.trace.converged);
    CHECK(again.trace.records.front().gain_change <= 1e-8);
    CHECK(gain_change(gain_update(res.pi, sys, w), res.law) <= 1e-8);
  }
  SUBCASE("relations hold at convergence and improve with the grid") {
    const RossResiduals coarse = ross_residuals(sys, w, res.pi);
    CHECK(coarse.max() <= default_residual_tolerance(res.pi));
    const TimeGrid fine_grid(ThetaGrid(1.0, 40), 10);
    const SynthesisResult fine = policy_iteration(sys, w, std::nullopt, fine_grid);
    REQUIRE(fine.trace.converged);
    const RossResiduals r = ross_residuals(sys, w, fine.pi);
    CHECK(r.max() * 3.0 <= coarse.max());
    CHECK(r.r1 * 3.0 <= coarse.r1);
    CHECK(r.r2 * 3.0 <= coarse.r2);
    CHECK(r.r3 * 3.0 <= coarse.r3);
  }
}

TEST_CASE("policy iteration stopping and errors") {
  const DelaySystem sys = scalar_delay();
  const TimeGrid tg(ThetaGrid(1.0, 10), 10);
  SUBCASE("iteration limit") {
    SynthesisOptions opt;
    opt.max_iterations = 0;
    const SynthesisResult res = policy_iteration(sys, unit_weights(), std::nullopt, tg, opt);
    CHECK_FALSE(res.trace.converged);
    CHECK(res.trace.records.size() == 1);
  }
  SUBCASE("inadmissible initial law") {
    ControlLaw law = ControlLaw::zero(1, 1, tg.theta().size());
    law.gamma0 = scalar(3.0);
    CHECK_THROWS_AS(policy_iteration(sys, unit_weights(), law, tg), DivergenceError);
  }
}

TEST_CASE("concentrated gain ablation") {
  const DelaySystem sys = scalar_delay();
  const CostWeights w = unit_weights();
  const TimeGrid tg(ThetaGrid(1.0, 20), 10);
  const SynthesisResult opt = policy_iteration(sys, w, std::nullopt, tg);
  AblationOptions ao;
  ao.directions = 2;
  ao.functions = 2;
  const AblationResult res = gamma2_ablation(sys, w, opt.law, tg, ao);
  CHECK(res.passed());
  CHECK(res.samples.size() == 16);
  const InitialFunction ref = phi_suite(1, 2, 1, tg.theta()).front();
  const double J0 = direct_cost(sys, w, opt.law, ref, tg).cost;
  for (const auto& s : res.samples) {
    if (s.phi != 0) continue;
    if (s.magnitude == 0.0) CHECK(s.cost == J0);
    if (s.magnitude == 0.1) CHECK(s.cost > J0);
  }
  for (double c : res.curvature) CHECK(c > 0.0);

  ao.magnitudes = {0.0};
  const AblationResult single = gamma2_ablation(sys, w, opt.law, tg, ao);
  CHECK(single.passed());
}

TEST_CASE("ablation on a two-state plant") {
  const Instance inst = random_instance(4, 2, 1, 1.0, 12);
  const TimeGrid tg(inst.grid, 10);
  const SynthesisResult opt = policy_iteration(inst.sys, inst.weights, std::nullopt, tg);
  REQUIRE(opt.trace.converged);
  AblationOptions ao;
  ao.seed = 5;
  const AblationResult res = gamma2_ablation(inst.sys, inst.weights, opt.law, tg, ao);
  INFO(res.failure);
  CHECK(res.minimum_at_zero);
  CHECK(res.convex);
}

TEST_CASE("ablation flags an improving perturbation") {
  // A law that is far from optimal: adding Γ2 in the right direction helps.
  const DelaySystem sys = scalar_delay();
  const TimeGrid tg(ThetaGrid(1.0, 10), 10);
  ControlLaw law = ControlLaw::zero(1, 1, tg.theta().size());
  law.gamma2 = scalar(0.5);
  AblationOptions ao;
  ao.directions = 4;
  ao.functions = 1;
  const AblationResult res = gamma2_ablation(sys, unit_weights(), law, tg, ao);
  CHECK_FALSE(res.passed());
  CHECK_FALSE(res.failure.empty());
}
