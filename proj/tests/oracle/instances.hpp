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
#ifndef DELAYQ_TESTS_INSTANCES_HPP
#define DELAYQ_TESTS_INSTANCES_HPP

#include "delayq/model.hpp"

#include <cstdint>
#include <random>

namespace delayq::testing {

/// Uniform draws that do not depend on the standard library's distributions.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(-scale, scale);
    return m;
  }
  Matrix spd(Eigen::Index n, double floor) {
    const Matrix m = matrix(n, n, 1.0);
    return m.transpose() * m + floor * Matrix::Identity(n, n);
  }

 private:
  std::mt19937_64 rng_;
};

struct Instance {
  DelaySystem sys;
  CostWeights weights;
  ControlLaw law;
  ThetaGrid grid;
};

/// A random plant with a random admissible law (Γ₁ smooth, Γ₂ absent) whose
/// fundamental matrix decays at least at rate `min_decay` on a 5h horizon.
Instance random_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index r, double h, int N,
                         double min_decay = 1.0);

/// A smooth random initial function sampled on the grid.
InitialFunction random_initial(std::uint64_t seed, Eigen::Index n, const ThetaGrid& grid);

/// Scalar plant A=-1, B=0.2, D=1, Q=R=1.
Instance scalar_delay_instance(double h, int N);

}  // namespace delayq::testing

#endif
