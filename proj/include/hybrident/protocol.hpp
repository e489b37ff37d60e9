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

#ifndef HYBRIDENT_PROTOCOL_HPP
#define HYBRIDENT_PROTOCOL_HPP

#include <optional>
#include <string>
#include <vector>

#include "hybrident/elements.hpp"
#include "hybrident/qstate.hpp"

namespace hybrident {

/// Coefficients of (a|HH> + b|VV>) (x) (c|FF> + d|AA>).
struct SourceParams {
    Complex a{1.0 / std::numbers::sqrt2};
    Complex b{1.0 / std::numbers::sqrt2};
    Complex c{1.0 / std::numbers::sqrt2};
    Complex d{1.0 / std::numbers::sqrt2};

    /// Throws unless |a|^2+|b|^2 = 1 and |c|^2+|d|^2 = 1 within tol::kNorm.
    void validate() const;

    /**
     * Builds normalized coefficients from magnitudes and relative phases
     * (radians): b gets e^{i phase_pol}, d gets e^{i phase_spatial}. Each
     * pair is rescaled to unit norm.
     */
    static SourceParams from_magnitudes(double a, double b, double phase_pol, double c,
                                        double d, double phase_spatial);
};

enum class EraserVariant { irreversible, reversible };

struct EraserSpec {
    EraserVariant variant = EraserVariant::irreversible;
    /// |P> on the signal polarization; required for the irreversible variant only.
    std::optional<CVector> erasure_state;
    /// Mode F_j selected by the idler spatial filter.
    std::optional<std::size_t> idler_filter_mode;

    void validate() const;

    static EraserSpec irreversible(CVector erasure_state,
                                   std::optional<std::size_t> idler_filter_mode = 0);
    static EraserSpec reversible();
};

struct PipelineStage {
    std::string name;  // source, post_cnot, post_filter, post_erasure
    Ket state;
    double probability;  // probability of this stage given the previous one
};

struct PipelineResult {
    /// Empty when a projection had zero probability.
    std::optional<Ket> final_state;
    std::vector<PipelineStage> stages;
    double success_probability = 0.0;
    /// sqrt of the erasure-stage probability, the N of the projected HES.
    std::optional<double> normalization;
    std::string null_stage;

    bool is_null() const { return !final_state.has_value(); }
};

/// a|0_s 0_i>_1 |0_s>_2 on [signal.polarization, idler.polarization, signal.spatial].
Ket generic_initial(Complex a, Complex b);

/// Hyperentangled source on [signal.pol, idler.pol, signal.spatial, idler.spatial].
Ket hyper_source(const SourceParams &params);

/// (a|HH> + b|VV>) (x) |F_j>_s |F_j>_i with D-slit spatial factors.
Ket qudit_source(std::size_t D, Complex a, Complex b, std::size_t j);

/**
 * Irreversible eraser: CNOT on the signal photon (polarization control,
 * spatial target), idler spatial filter when the state carries an idler
 * spatial factor, then projection of the signal polarization onto |P>.
 *
 * The final ket lives on [signal.spatial, idler.polarization] and is
 * canonicalized (first nonzero amplitude real positive).
 */
PipelineResult run_irreversible(const Ket &state, const EraserSpec &spec, const CMatrix &cnot);

/**
 * Reversible eraser on a state of the generic_initial form: a CNOT with
 * polarization control followed by a CNOT with spatial control. The
 * signal polarization ends in |0> and is dropped.
 */
PipelineResult run_reversible(const Ket &state);

/// Linear erasure projector with |alpha| = |b|, |beta| = sqrt(1 - |b|^2).
Projector concentration_projector(Complex b);
CVector concentration_state(Complex b);
/// arccos(|b|), radians from horizontal.
double concentration_angle(Complex b);

/// a|F_j>_s|H>_i + b|F_{j+n}>_s|V>_i produced by the D-slit pipeline with erasure onto L.
Ket qudit_hes(std::size_t D, Complex a, Complex b, std::size_t j);

/// a|F_j>_s|H>_i + b|F_{j+n}>_s|V>_i built directly, for comparisons.
Ket hes_target(std::size_t D, Complex a, Complex b, std::size_t j = 0);

/// Amplitudes of a two-qubit HES on the |F H> and |A V> components.
struct HesComponents {
    Complex fh;
    Complex av;
    /// arg(av / fh) wrapped to [0, 2 pi).
    double relative_phase() const;
};
HesComponents hes_components(const Ket &hes);

}  // namespace hybrident

#endif  // HYBRIDENT_PROTOCOL_HPP
