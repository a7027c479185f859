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
#ifndef DELAYQ_VERIFIER_HPP
#define DELAYQ_VERIFIER_HPP

#include "delayq/bellman.hpp"
#include "delayq/model.hpp"
#include "delayq/simulator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace delayq {

/// Residuals of the five optimality relations, each the largest absolute
/// entry over the grid.
struct RossResiduals {
  double r1 = 0.0;  ///< algebraic Riccati-type relation for Π0
  double r2 = 0.0;  ///< ODE for Π1
  double r3 = 0.0;  ///< transport PDE for Π2
  double r4 = 0.0;  ///< Π1(-h) = Π0 B
  double r5 = 0.0;  ///< Π2(-h, θ) = B'Π1(θ)

  [[nodiscard]] double max() const;
};

RossResiduals ross_residuals(const DelaySystem& sys, const CostWeights& w,
                             const BellmanMatrices& pi);

/// max over t_j of |2Ru + 2D'Π0 x + 2D'∫Π1(θ)x(t+θ)dθ|.
double stationarity_residual(const DelaySystem& sys, const CostWeights& w,
                             const BellmanMatrices& pi, const Trajectory& traj);

double pi0_symmetry(const BellmanMatrices& pi);
double pi0_min_eigenvalue(const BellmanMatrices& pi);
double pi2_exchange(const BellmanMatrices& pi);
bool all_finite(const BellmanMatrices& pi);

struct ReportTolerances {
  double ross = 0.0;
  double symmetry = 0.0;
  double exchange = 0.0;
  double stationarity = 1e-10;
};

struct ResidualReport {
  RossResiduals ross;
  double pi0_symmetry = 0.0;
  double pi0_min_eigenvalue = 0.0;
  double pi2_exchange = 0.0;
  bool finite = true;
  double stationarity = 0.0;
  double vj_gap = 0.0;
  double vj_bound = 0.0;
  ReportTolerances tolerances;

  [[nodiscard]] bool ross_pass() const;
  /// Symmetry, positivity, exchange symmetry and finiteness.
  [[nodiscard]] bool properties_pass() const;
  [[nodiscard]] bool stationarity_pass() const;
  [[nodiscard]] bool vj_pass() const;
  [[nodiscard]] bool all_pass() const;
};

struct ReportOptions {
  std::uint64_t seed = 0;
  int suite_size = 4;
  double quadrature_tolerance = 1e-8;
  /// Ross tolerance; 0 selects max(10δ², 10·tail).
  double residual_tolerance = 0.0;
  /// 0 selects the Ross tolerance.
  double stationarity_tolerance = 0.0;
  /// Law whose trajectory enters the stationarity check; defaults to the
  /// evaluated law.
  std::optional<ControlLaw> stationarity_law;
  int threads = 1;
};

/// Smooth random initial functions; the first is φ ≡ (1, ..., 1).
std::vector<InitialFunction> phi_suite(std::uint64_t seed, int count, Eigen::Index n,
                                       const ThetaGrid& grid);

/// Ross tolerance used when none is configured.
double default_residual_tolerance(const BellmanMatrices& pi);

/// Every check on one evaluated law. The stationarity residual uses the
/// trajectory from φ ≡ 1. The V–J gap and bound come from the suite member
/// with the largest gap-to-bound ratio; the bound combines both tails with a
/// Richardson estimate from a second grid.
ResidualReport property_report(const DelaySystem& sys, const CostWeights& w,
                               const ControlLaw& law, const BellmanMatrices& pi,
                               const ReportOptions& options = {});

}  // namespace delayq

#endif  // DELAYQ_VERIFIER_HPP
