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

#ifndef HYBRIDENT_SCENARIO_HPP
#define HYBRIDENT_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybrident/elements.hpp"
#include "hybrident/protocol.hpp"
#include "hybrident/simulate.hpp"
#include "hybrident/tomography.hpp"
#include "json.hpp"

namespace hybrident {

/// Invalid scenario field. `field` is the dotted key path, e.g. "noise.werner_p".
class ConfigError : public std::invalid_argument {
  public:
    ConfigError(std::string field, const std::string &message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string &field() const { return field_; }

  private:
    std::string field_;
};

/**
 * Declarative scenario. Amplitudes are magnitudes, phases and angles are in
 * degrees; everything else carries its unit in the key name.
 */
struct ScenarioConfig {
    struct Source {
        double a = 1.0 / std::numbers::sqrt2;
        double b = 1.0 / std::numbers::sqrt2;
        double phase_pol = 0.0;
        double c = 1.0 / std::numbers::sqrt2;
        double d = 1.0 / std::numbers::sqrt2;
        double phase_spatial = 0.0;
    } source;

    struct Eraser {
        std::string variant = "irreversible";
        std::optional<double> projector_angle_deg;
        std::optional<std::string> circular = "L";
        std::optional<std::size_t> idler_filter_mode = 0;
    } eraser;

    struct Qudit {
        bool enabled = false;
        std::size_t D = 4;
        std::size_t j = 0;
    } qudit;

    struct Noise {
        std::array<double, 2> qwp_offset_deg{0.0, 0.0};
        double retardance_error = 0.0;
        double werner_p = 1.0;
        double background_rate = 0.0;
    } noise;

    struct Acquisition {
        double duration_s = 300.0;
        double pair_rate_hz = 4.2;
        std::uint64_t seed = 1;
    } acquisition;

    struct Geometry {
        double slit_width_um = 80.0;
        double separation_um = 250.0;
        double wavelength_nm = 702.0;
        double focal_length_mm = 300.0;
        double detector_slit_um = 50.0;
    } geometry;

    struct Outputs {
        std::string directory = "out";
        std::vector<std::string> formats{"csv", "json"};
        bool wants(const std::string &format) const;
    } outputs;

    struct Scan {
        /// source_spatial, final or cnot_output
        std::string target = "source_spatial";
        /// Truth-table input for cnot_output: HF, HA, VF or VA.
        std::string input = "HF";
        std::vector<std::string> conditioning{"none"};
        double half_width_mm = 3.0;
        std::size_t points = 1201;
    } scan;

    struct Tomography {
        /// source_pol or final
        std::string target = "final";
        std::string projector_set = "overcomplete36";
        std::size_t bootstrap_resamples = 100;
        double tol = 1e-9;
        std::size_t max_iter = 5000;
    } tomography;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;
    /// validate() plus the cross-section checks of the scan or tomo sections.
    void validate_for(const std::string &command) const;

    std::size_t slits() const { return qudit.enabled ? qudit.D : 2; }
    SourceParams source_params() const;
    /// Source ket fed to the eraser: hyperentangled, qudit or generic.
    Ket source_ket() const;
    EraserSpec eraser_spec() const;
    NoiseSpec noise_spec() const;
    AcquisitionSpec acquisition_spec() const;
    OpticsGeometry optics() const;
    MleOptions mle_options() const;
};

/// Parses and validates. Missing keys take defaults; unknown keys are errors.
ScenarioConfig parse_scenario(const nlohmann::ordered_json &document);

/// Full echo with every key present.
nlohmann::ordered_json scenario_to_json(const ScenarioConfig &config);

inline double deg_to_rad(double degrees) { return degrees * std::numbers::pi / 180.0; }
inline double rad_to_deg(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace hybrident

#endif  // HYBRIDENT_SCENARIO_HPP
