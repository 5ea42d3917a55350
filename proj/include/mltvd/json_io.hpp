// SPDX-License-Identifier: Apache-2.0
//
// mltvd: Vandermonde decomposition of multilevel Toeplitz matrices
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

///
/// \file json_io.hpp
///
/// JSON forms of the library types. Complex numbers are [re, im] pairs,
/// shapes are integer arrays and models are
/// {"freqs": [[f_1, ..., f_d], ...], "powers": [...], "amplitudes": [...]}.
///
#ifndef MLTVD_JSON_IO_HPP
#define MLTVD_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "mltvd/harness.hpp"

namespace mltvd
{

using Json = nlohmann::json;

Json to_json(Complex c);
Complex complex_from_json(const Json& j);

Json to_json(const Shape& shape);
Shape shape_from_json(const Json& j);

Json to_json(const ComplexVector& v);
ComplexVector vector_from_json(const Json& j);

/// Row-major nested arrays.
Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const AtomicModel& model);
AtomicModel model_from_json(const Json& j);

Json to_json(const VandermondeDecomposition& dec);

///
/// {"shape", "z", "samples"} for row selection, {"shape", "z", "sensing"}
/// for a dense matrix, or {"shape", "y", "samples"?} to sample a full
/// signal; "eta2" defaults to 0.
///
ObservationModel observation_from_json(const Json& j);
Json to_json(const ObservationModel& obs);

Json to_json(const SolverStats& stats);

///
/// Starts from ExperimentConfig::defaults(kind) and overrides every key
/// present. Throws MltError on unknown keys or kinds.
///
ExperimentConfig config_from_json(const Json& j);

/// Reads and parses a file; throws MltError on I/O or syntax errors.
Json read_json_file(const std::string& path);

} // namespace mltvd

#endif // MLTVD_JSON_IO_HPP
