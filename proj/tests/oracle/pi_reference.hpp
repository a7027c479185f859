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
#ifndef DELAYQ_TESTS_PI_REFERENCE_HPP
#define DELAYQ_TESTS_PI_REFERENCE_HPP

#include "delayq/bellman.hpp"
#include "delayq/simulator.hpp"

namespace delayq::testing {

struct ReferencePi {
  Matrix pi0;
  std::vector<Matrix> pi1;
  std::vector<Matrix> pi2;  // row-major over (ξ, θ)
};

/// Term-by-term evaluation of the kernel formulas written with M1, M2, M3
/// (no concentrated delay gain), including the contributions of the initial
/// function while t + θ < 0. Brute force; meant for small grids only.
ReferencePi reference_pi(const ClosedLoopSystem& cl, const SampledKernel& K, const CostWeights& w,
                         const ControlLaw& law);

}  // namespace delayq::testing

#endif
