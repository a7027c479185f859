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
#ifndef DELAYQ_IO_HPP
#define DELAYQ_IO_HPP

#include "delayq/bellman.hpp"
#include "delayq/model.hpp"
#include "delayq/synthesis.hpp"
#include "delayq/verifier.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>

namespace delayq {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays.
Json matrix_to_json(const Matrix& m);

/// Accepts nested arrays or a bare number (1x1). Throws ValidationError
/// naming `field` on malformed input.
Matrix matrix_from_json(const Json& j, const std::string& field);

Json to_json(const BellmanMatrices& pi);
Json to_json(const ControlLaw& law, const ThetaGrid& grid);
Json to_json(const ResidualReport& report);

/// Reads the law.json layout; the sampled θ must match `grid`.
ControlLaw law_from_json(const Json& j, const ThetaGrid& grid);

/// iteration,value,r1,gain_change,gamma0 entries,max |Γ1|
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// magnitude,direction,phi,J
void write_ablation_csv(std::ostream& os, const AblationResult& result);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace delayq

#endif  // DELAYQ_IO_HPP
