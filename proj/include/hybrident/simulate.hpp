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

#ifndef HYBRIDENT_SIMULATE_HPP
#define HYBRIDENT_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybrident/elements.hpp"
#include "hybrident/protocol.hpp"
#include "hybrident/qstate.hpp"

namespace hybrident {

/// Raised when a pipeline projection has zero probability.
class NullProjectionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct AcquisitionSpec {
    double duration = 1.0;         // seconds per setting
    double pair_rate = 1.0;        // pairs/s reaching the analyzers
    double background_rate = 0.0;  // accidental coincidences/s
    std::uint64_t seed = 0;

    void validate() const;
    double pairs() const { return duration * pair_rate; }
};

/// Phenomenological imperfections. Angles in radians.
struct NoiseSpec {
    double qwp_offset_first = 0.0;
    double qwp_offset_second = 0.0;
    double retardance_error = 0.0;
    double werner_p = 1.0;  // 1 = no mixing

    void validate() const;
    QwpArrayErrors qwp_errors() const {
        return {qwp_offset_first, qwp_offset_second, retardance_error};
    }
};

struct NamedProjector {
    std::string id;
    std::string context;  // measurement setting the projector belongs to
    Projector projector;
};

struct CountsRow {
    std::string projector_id;
    double p_expected = 0.0;
    std::uint64_t counts = 0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
};

/**
 * Simulated coincidence counts, one row per projector.
 *
 * CSV columns: projector_id,p_expected,counts,duration_s,seed.
 */
struct CountsTable {
    std::vector<CountsRow> rows;
    std::uint64_t master_seed = 0;
    double pair_rate = 0.0;
    double background_rate = 0.0;
    std::string state_hash;

    std::string to_csv() const;
    static CountsTable from_csv(std::string_view csv, double pair_rate,
                                double background_rate = 0.0);
};

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// 16-digit hex FNV-1a digest of a byte string.
std::string content_digest(std::string_view text);

/// Deterministic per-row seed derived from the master seed and a row id.
std::uint64_t child_seed(std::uint64_t master, std::string_view id);

/// Stable hex digest of a density matrix, used to tag count tables.
std::string state_digest(const CMatrix &rho);

double born_probability(const Ket &state, const Projector &projector);
double born_probability(const DensityOperator &state, const Projector &projector);

/// Poisson draw with mean p * pair_rate * duration + background_rate * duration.
std::uint64_t sample_counts(double p, const AcquisitionSpec &acq);

/// Expected probabilities on `state`, counts sampled independently per row.
CountsTable tomography_counts(const DensityOperator &state,
                              const std::vector<NamedProjector> &projectors,
                              const AcquisitionSpec &acq);

/**
 * Irreversible eraser composed on density operators with misaligned QWPs,
 * followed by Werner mixing of the two-qubit output.
 *
 * The output lives on [signal.spatial, idler.polarization]. The
 * reversible variant uses ideal gates, so only werner_p applies to it.
 * Throws NullProjectionError when a projection cannot succeed.
 */
DensityOperator perturbed_pipeline(const Ket &source, const EraserSpec &spec,
                                   const NoiseSpec &noise);
DensityOperator perturbed_pipeline(const SourceParams &source, const EraserSpec &spec,
                                   const NoiseSpec &noise);

struct ScanPoint {
    double position = 0.0;           // meters
    double intensity_expected = 0.0;  // detector-averaged density, 1/m
    double p_expected = 0.0;          // probability of landing in the detector slit
    std::uint64_t counts = 0;
};

/**
 * A detector scan across the Fourier plane.
 *
 * CSV columns: position_mm,intensity_expected,counts with the intensity in
 * 1/mm.
 */
struct ScanCurve {
    std::string conditioning;  // "none" or the projector name
    double conditioning_probability = 1.0;
    std::vector<ScanPoint> points;

    std::vector<double> positions() const;
    std::vector<double> expected() const;
    std::vector<double> counts_as_double() const;
    std::string to_csv() const;
};

/**
 * Scans the signal spatial far field, optionally conditioned on a
 * projector acting on other factors (e.g. the idler spatial filter).
 *
 * Expected counts at x are pairs * p_cond * P(detector at x); the detector
 * slit probability uses the geometry's detector width, or the local grid
 * spacing when the width is zero.
 */
ScanCurve scan_run(const DensityOperator &state, const OpticsGeometry &geometry,
                   const std::vector<double> &positions, const AcquisitionSpec &acq,
                   const std::optional<NamedProjector> &conditioning = std::nullopt);

/// Probabilities |<out|U|in>|^2, rows = inputs, columns = outputs, both in the order HF, HA, VF, VA.
CMatrix cnot_truth_table(const CMatrix &cnot);

/**
 * Coincidence probability versus linear polarizer angle after projecting
 * the signal spatial DOF onto `spatial_projection`.
 *
 * `state` lives on [signal.polarization, signal.spatial].
 */
std::vector<double> malus_curve(const Ket &state, const CVector &spatial_projection,
                                const std::vector<double> &angles);

}  // namespace hybrident

#endif  // HYBRIDENT_SIMULATE_HPP
