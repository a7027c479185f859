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
#ifndef DELAYQ_CONFIG_HPP
#define DELAYQ_CONFIG_HPP

#include "delayq/io.hpp"
#include "delayq/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace delayq {

struct RunConfig {
  int schema = 1;
  std::uint64_t seed = 0;
  DelaySystem sys;
  CostWeights weights;
  int N = 20;
  int T_multiple = 10;

  double gain_tolerance = 1e-8;
  double residual_tolerance = 0.0;  ///< 0: max(10δ², 10·tail)
  double quadrature_tolerance = 1e-8;
  double tail_tolerance = 1e-4;

  std::optional<ControlLaw> law;
  std::optional<InitialFunction> initial;
  int max_iterations = 50;
  int suite_size = 4;

  std::vector<double> magnitudes{0.0, 0.05, 0.1, 0.2};
  int directions = 4;
  int initial_functions = 2;

  [[nodiscard]] ThetaGrid grid() const { return ThetaGrid(sys.h, N); }
  [[nodiscard]] TimeGrid time_grid() const { return TimeGrid(grid(), T_multiple); }
};

/// Builds and validates a config from a parsed document. Relative paths
/// (law.file) resolve against `base`.
RunConfig parse_config(const Json& doc, const std::filesystem::path& base = {});

/// TOML, or JSON when the extension is .json.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace delayq

#endif  // DELAYQ_CONFIG_HPP
