// Copyright 2026 The simreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "simreg/montecarlo.hpp"
#include "simreg/pipeline.hpp"

namespace simreg {

using Json = nlohmann::json;

/// Doubles in CSV use 17 significant digits so files round-trip exactly.
std::string format_double(double v);

// Curve CSV: header `x,y`, one row per point.
SampledCurve read_curve_csv(const std::string& path);
void write_curve_csv(const std::string& path, const SampledCurve& curve);

// Multi-curve CSV: header `curve_id,x,y`.
struct NamedCurve {
  std::string id;
  SampledCurve curve;
};
std::vector<NamedCurve> read_multi_curve_csv(const std::string& path);
void write_multi_curve_csv(const std::string& path,
                           const std::vector<NamedCurve>& curves);

// Loads dataset files: inputs CSV (curve_id + named feature columns) and
// station curves CSV (curve_id + one column per station).
void write_inputs_csv(const std::string& path, const SectionedCurveSet& set);
void write_station_curves_csv(const std::string& path,
                              const std::vector<std::string>& curve_ids,
                              const std::vector<std::vector<double>>& curves);
SectionedCurveSet read_loads_dataset(const std::string& inputs_csv,
                                     const std::string& curves_csv,
                                     const std::vector<int>& breakpoints);
struct StationCurves {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> curves;
};
StationCurves read_station_curves_csv(const std::string& path);

// JSON serialization.
Json registration_to_json(const RegistrationResult& r);
Json model_to_json(const SparseLinearModel& m,
                   const std::vector<std::string>& input_names = {});
Json clt_report_to_json(const MonteCarloReport& r);
Json sweep_to_json(const std::vector<SweepPoint>& rows);
Json interp_gap_to_json(const std::vector<std::pair<int, double>>& rows);
Json spacing_rows_to_json(const std::vector<SpacingRow>& rows);
Json pipeline_report_to_json(const PipelineReport& r);

void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

/// Loads a JSON config file; an empty path yields an empty object. Numeric
/// ranges of recognized keys are validated immediately.
Json load_config(const std::string& path);
void validate_config(const Json& config);

ParamBox box_from_json(const Json& j, const ParamBox& fallback = {});

}  // namespace simreg
