/**
 * Copyright 2026 The hybrident Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HYBRIDENT_COMMAND_SUPPORT_HPP
#define HYBRIDENT_COMMAND_SUPPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "hybrident/commands.hpp"

namespace hybrident::detail {

nlohmann::ordered_json space_json(const CompositeSpace &space);
nlohmann::ordered_json ket_json(const Ket &ket);
nlohmann::ordered_json density_json(const DensityOperator &rho);
std::string dump(const nlohmann::ordered_json &j);

CommandOutput begin_output(std::string command, std::string bundle, const ScenarioConfig &config);

/// Adds the artifact when its extension is among the requested formats.
void emit(CommandOutput &out, const std::string &file, std::string content);

/// Noiseless pipeline for the scenario; throws NullProjectionError on a null stage.
PipelineResult ideal_pipeline(const ScenarioConfig &config);

struct ScanSetup {
    DensityOperator state;
    std::vector<std::string> names;
    std::vector<std::optional<NamedProjector>> conditionings;
};
ScanSetup scan_setup(const ScenarioConfig &config);
std::vector<double> scan_positions(const ScenarioConfig &config);
/// Detector-averaged single-slit intensity, the envelope of every pattern.
std::vector<double> envelope_curve(const OpticsGeometry &geometry,
                                   const std::vector<double> &positions);
std::string scan_file(const ScenarioConfig &config, const std::string &conditioning);

struct TomoRun {
    DensityOperator truth;
    Ket target;
    ProjectorSet set;
    CountsTable counts;
    ReconstructionResult result;
};
TomoRun tomo_run(const ScenarioConfig &config, bool with_bootstrap);
nlohmann::ordered_json tomo_metrics(const TomoRun &run);

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};
/// Reads position_mm and intensity_expected back from a scan CSV.
Curve parse_scan_csv(const std::string &csv);
/// Distance between the first local minima on either side of x = 0.
double central_minima_spacing(const Curve &curve);

}  // namespace hybrident::detail

#endif  // HYBRIDENT_COMMAND_SUPPORT_HPP
