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
#include "oracle/instances.hpp"

#include "delayq/simulator.hpp"

#include <cmath>

namespace delayq::testing {

Instance random_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index r, double h, int N,
                         double min_decay) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Draw d(seed * 7919 + attempt);
    Instance inst;
    inst.grid = ThetaGrid(h, N);
    inst.sys.A = d.matrix(n, n, 0.4) - d.uniform(1.2, 2.0) * Matrix::Identity(n, n);
    inst.sys.B = d.matrix(n, n, 0.3);
    inst.sys.D = d.matrix(n, r, 1.0);
    inst.sys.h = h;
    inst.weights.Q = d.spd(n, 0.5);
    inst.weights.R = d.spd(r, 0.5);
    inst.law = ControlLaw::zero(r, n, inst.grid.size());
    inst.law.gamma0 = d.matrix(r, n, 0.3);
    const Matrix c0 = d.matrix(r, n, 0.3);
    const Matrix c1 = d.matrix(r, n, 0.3);
    for (int k = 0; k < inst.grid.size(); ++k) {
      const double s = inst.grid.node(k) / h;
      inst.law.gamma1[k] = c0 + c1 * std::cos(M_PI * s);
    }
    try {
      const auto K = fundamental_matrix(close_loop(inst.sys, inst.law, inst.grid),
                                        TimeGrid(inst.grid, 5));
      if (K.decay_rate() * h >= min_decay * h && K.values().back().norm() < 1e-2) return inst;
    } catch (const std::exception&) {
    }
  }
}

InitialFunction random_initial(std::uint64_t seed, Eigen::Index n, const ThetaGrid& grid) {
  Draw d(seed ^ 0x9E3779B97F4A7C15ULL);
  const Vector v0 = d.matrix(n, 1, 1.0);
  const Vector v1 = d.matrix(n, 1, 1.0);
  const Vector v2 = d.matrix(n, 1, 1.0);
  InitialFunction phi;
  for (int k = 0; k < grid.size(); ++k) {
    const double s = grid.node(k) / grid.delay();
    phi.samples.push_back(v0 + s * v1 + std::cos(M_PI * s) * v2);
  }
  return phi;
}

Instance scalar_delay_instance(double h, int N) {
  Instance inst;
  inst.grid = ThetaGrid(h, N);
  const auto s = [](double v) { return Matrix::Constant(1, 1, v); };
  inst.sys = {s(-1.0), s(0.2), s(1.0), h};
  inst.weights = {s(1.0), s(1.0)};
  inst.law = ControlLaw::zero(1, 1, inst.grid.size());
  return inst;
}

}  // namespace delayq::testing
