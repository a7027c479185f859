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
#ifndef DELAYQ_SYNTHESIS_HPP
#define DELAYQ_SYNTHESIS_HPP

#include "delayq/bellman.hpp"
#include "delayq/model.hpp"
#include "delayq/verifier.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace delayq {

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stabilizing solution of A'P + PA - PDR^-1D'P + Q = 0 by Kleinman's
/// iteration. Throws NonConvergenceError when (A, D) is not stabilizable.
Matrix riccati_baseline(const Matrix& A, const Matrix& D, const Matrix& Q, const Matrix& R,
                        int max_iterations = 100);

/// Γ0 = -R^-1 D'Π0, Γ1(θ) = -R^-1 D'Π1(θ), no concentrated gain.
ControlLaw gain_update(const BellmanMatrices& pi, const DelaySystem& sys, const CostWeights& w);

/// Largest absolute entry of the difference of two laws on the same grid.
double gain_change(const ControlLaw& a, const ControlLaw& b);

struct IterationRecord {
  int iteration = 0;
  ControlLaw law;       ///< law evaluated in this iteration
  double value = 0.0;   ///< V(φ ≡ 1)
  double r1 = 0.0;
  double gain_change = 0.0;  ///< distance to the improved law
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::string reason;
};

struct SynthesisOptions {
  double gain_tolerance = 1e-8;
  /// r1 tolerance; 0 selects max(10δ², 10·tail).
  double residual_tolerance = 0.0;
  int max_iterations = 50;
  double tail_tolerance = 1e-4;
  int threads = 1;
};

struct SynthesisResult {
  ControlLaw law;
  BellmanMatrices pi;
  IterationTrace trace;
};

/// Riccati gain of the delay-free surrogate (A + B, D, Q, R), Γ1 ≡ 0.
ControlLaw default_initial_law(const DelaySystem& sys, const CostWeights& w,
                               const ThetaGrid& grid);

/// Throws DivergenceError unless the closed loop's fundamental matrix decays.
void require_admissible(const DelaySystem& sys, const ControlLaw& law, const TimeGrid& grid);

/// Alternates evaluation and gain update. Stops when the gain change and r1
/// are both within tolerance, when the cost rises beyond evaluation noise, or
/// at the iteration limit; `trace.converged` tells which.
SynthesisResult policy_iteration(const DelaySystem& sys, const CostWeights& w,
                                 const std::optional<ControlLaw>& init, const TimeGrid& grid,
                                 const SynthesisOptions& options = {});

struct AblationSample {
  double magnitude = 0.0;
  int direction = 0;
  int phi = 0;
  double cost = 0.0;  ///< +inf when the perturbed law diverges
};

struct AblationResult {
  std::vector<double> magnitudes;
  std::vector<AblationSample> samples;
  std::vector<double> curvature;  ///< fitted 2·c2 per (direction, φ), row-major
  int directions = 0;
  int functions = 0;
  double tolerance = 0.0;
  bool minimum_at_zero = true;
  bool convex = true;
  std::string failure;  ///< first offending sample, empty on success

  [[nodiscard]] bool passed() const { return minimum_at_zero && convex; }
};

struct AblationOptions {
  std::vector<double> magnitudes{0.0, 0.05, 0.1, 0.2};
  int directions = 4;
  int functions = 2;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Adds Γ2 = m·E for random unit-Frobenius E to the law and compares
/// simulated costs against m = 0.
AblationResult gamma2_ablation(const DelaySystem& sys, const CostWeights& w, const ControlLaw& opt,
                               const TimeGrid& grid, const AblationOptions& options = {});

}  // namespace delayq

#endif  // DELAYQ_SYNTHESIS_HPP
