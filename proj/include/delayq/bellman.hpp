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
#ifndef DELAYQ_BELLMAN_HPP
#define DELAYQ_BELLMAN_HPP

#include "delayq/model.hpp"
#include "delayq/simulator.hpp"

#include <vector>

namespace delayq {

/// Quadratic weights of the cost once the law is substituted:
///   x'L1x + 2x'L2x(t-h) + 2∫x'L3(θ)x(t+θ) + x(t-h)'L4x(t-h)
///   + 2∫x(t-h)'L5(θ)x(t+θ) + ∫∫x(t+θ1)'L6(θ1,θ2)x(t+θ2).
struct WeightKernels {
  ThetaGrid grid;
  Matrix L1;
  Matrix L2;
  std::vector<Matrix> L3;
  Matrix L4;
  std::vector<Matrix> L5;
  std::vector<Matrix> L6;  ///< row-major over (θ1, θ2) node pairs

  [[nodiscard]] const Matrix& l6(int a, int b) const { return L6[a * grid.size() + b]; }
};

WeightKernels weight_kernels(const CostWeights& w, const ControlLaw& law, const ThetaGrid& grid);

/// Kernels of V(φ) = φ(0)'Π0φ(0) + 2φ(0)'∫Π1(θ)φ(θ) + ∫∫φ(ξ)'Π2(ξ,θ)φ(θ)
///                   + ∫φ(θ)'Π_local φ(θ).
/// The last term only appears with a concentrated gain (Π_local = L4).
struct BellmanMatrices {
  ThetaGrid grid;
  double horizon = 0.0;
  double step = 0.0;
  Matrix pi0;
  std::vector<Matrix> pi1;
  std::vector<Matrix> pi2;  ///< row-major: pi2[a * size + b] = Π2(ξ_a, θ_b)
  Matrix pi_local;
  double tail_bound = 0.0;  ///< bound on any entry's truncation error
  double decay_rate = 0.0;

  [[nodiscard]] const Matrix& pi2_at(int a, int b) const { return pi2[a * grid.size() + b]; }
  [[nodiscard]] Matrix& pi2_at(int a, int b) { return pi2[a * grid.size() + b]; }
};

struct PiOptions {
  /// Replace Π2 by (Π2(ξ,θ) + Π2(θ,ξ)')/2 after the fact.
  bool symmetrize = false;
  /// Accept when tail_bound <= tail_tolerance * max(1, |Π0|).
  double tail_tolerance = 1e-4;
  int threads = 1;
};

/// Π0, Π1, Π2 by trapezoid quadrature of the fundamental-matrix formulas on
/// the aligned grid, truncated at T. Throws HorizonError when the tail bound
/// exceeds tolerance and ContractViolation on mismatched grids.
BellmanMatrices pi_matrices(const ClosedLoopSystem& cl, const SampledKernel& K,
                            const WeightKernels& kern, const PiOptions& options = {});

double functional_value(const BellmanMatrices& pi, const InitialFunction& phi);

/// Truncation error bound on functional_value for this φ.
double functional_tail(const BellmanMatrices& pi, const InitialFunction& phi);

}  // namespace delayq

#endif  // DELAYQ_BELLMAN_HPP
