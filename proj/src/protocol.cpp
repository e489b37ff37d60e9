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

#include "hybrident/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace hybrident {

namespace {

void check_pair(Complex x, Complex y, const char *what) {
    const double n = std::norm(x) + std::norm(y);
    if (std::abs(n - 1.0) > tol::kNorm) {
        throw std::invalid_argument(std::string(what) + " coefficients are not normalized: |x|^2+|y|^2 = " +
                                    std::to_string(n));
    }
}

Ket pol_pair(Complex a, Complex b) {
    const CompositeSpace space{signal_polarization(), idler_polarization()};
    CVector v = CVector::Zero(4);
    v(0) = a;
    v(3) = b;
    return Ket(space, v);
}

Ket single(const SubsystemLabel &label, const CVector &v) { return Ket(CompositeSpace{label}, v); }

}  // namespace

void SourceParams::validate() const {
    check_pair(a, b, "polarization");
    check_pair(c, d, "spatial");
}

SourceParams SourceParams::from_magnitudes(double a, double b, double phase_pol, double c,
                                           double d, double phase_spatial) {
    if (a < 0 || b < 0 || c < 0 || d < 0) {
        throw std::invalid_argument("source magnitudes must be nonnegative");
    }
    const double np = std::hypot(a, b);
    const double ns = std::hypot(c, d);
    if (np == 0.0 || ns == 0.0) {
        throw std::invalid_argument("source coefficient pair cannot be all zero");
    }
    SourceParams p;
    p.a = a / np;
    p.b = std::polar(b / np, phase_pol);
    p.c = c / ns;
    p.d = std::polar(d / ns, phase_spatial);
    return p;
}

void EraserSpec::validate() const {
    if (variant == EraserVariant::irreversible && !erasure_state) {
        throw std::invalid_argument("irreversible eraser requires an erasure projector");
    }
    if (variant == EraserVariant::reversible && erasure_state) {
        throw std::invalid_argument("reversible eraser does not take an erasure projector");
    }
    if (erasure_state && erasure_state->size() != 2) {
        throw std::invalid_argument("erasure projector must act on the signal polarization");
    }
}

EraserSpec EraserSpec::irreversible(CVector erasure_state,
                                    std::optional<std::size_t> idler_filter_mode) {
    return {EraserVariant::irreversible, std::move(erasure_state), idler_filter_mode};
}

EraserSpec EraserSpec::reversible() { return {EraserVariant::reversible, std::nullopt, std::nullopt}; }

Ket generic_initial(Complex a, Complex b) {
    check_pair(a, b, "DOF 1");
    return tensor(pol_pair(a, b), single(signal_spatial(2), spatial::slit(0)));
}

Ket hyper_source(const SourceParams &params) {
    params.validate();
    const CompositeSpace sp{signal_spatial(2), idler_spatial(2)};
    const CVector spatial_part =
        params.c * kron(spatial::F(), spatial::F()) + params.d * kron(spatial::A(), spatial::A());
    return tensor(pol_pair(params.a, params.b), Ket(sp, spatial_part));
}

Ket qudit_source(std::size_t D, Complex a, Complex b, std::size_t j) {
    check_pair(a, b, "polarization");
    const ModeFamily family = mode_family(D);
    if (j >= D) {
        throw std::invalid_argument("mode index j must lie in [0, D)");
    }
    const CompositeSpace sp{signal_spatial(D), idler_spatial(D)};
    return tensor(pol_pair(a, b), Ket(sp, kron(family.mode(j), family.mode(j))));
}

PipelineResult run_irreversible(const Ket &state, const EraserSpec &spec, const CMatrix &cnot) {
    spec.validate();
    if (spec.variant != EraserVariant::irreversible) {
        throw std::invalid_argument("run_irreversible needs an irreversible eraser spec");
    }
    const auto &labels = state.space().labels();
    SubsystemLabel s_spatial{};
    std::optional<SubsystemLabel> i_spatial;
    bool found = false;
    for (const auto &l : labels) {
        if (l.same_slot(signal_spatial())) {
            s_spatial = l;
            found = true;
        }
        if (l.same_slot(idler_spatial())) {
            i_spatial = l;
        }
    }
    if (!found || !state.space().contains(signal_polarization()) ||
        !state.space().contains(idler_polarization())) {
        throw std::invalid_argument("eraser input must carry signal polarization, signal spatial "
                                    "and idler polarization factors; got " +
                                    state.space().describe());
    }

    PipelineResult result;
    result.stages.push_back({"source", state, 1.0});

    const SubsystemLabel gate_targets[] = {signal_polarization(), s_spatial};
    Ket current = apply_unitary(state, cnot, gate_targets);
    result.stages.push_back({"post_cnot", current, 1.0});

    double probability = 1.0;
    if (i_spatial && spec.idler_filter_mode) {
        const ModeFamily family = mode_family(i_spatial->dimension);
        if (*spec.idler_filter_mode >= i_spatial->dimension) {
            throw std::invalid_argument("idler filter mode index out of range");
        }
        const auto filtered =
            condition_on(current, single(*i_spatial, family.mode(*spec.idler_filter_mode)));
        if (filtered.is_null()) {
            result.null_stage = "post_filter";
            return result;
        }
        current = *filtered.state;
        probability *= filtered.probability;
        result.stages.push_back({"post_filter", current, filtered.probability});
    }

    const auto erased = condition_on(current, single(signal_polarization(), *spec.erasure_state));
    if (erased.is_null()) {
        result.null_stage = "post_erasure";
        return result;
    }
    probability *= erased.probability;
    result.normalization = std::sqrt(erased.probability);

    std::vector<SubsystemLabel> order{s_spatial, idler_polarization()};
    if (i_spatial && erased.state->space().contains(*i_spatial)) {
        order.push_back(*i_spatial);
    }
    const Ket final_state = reorder(*erased.state, order).canonical();
    result.stages.push_back({"post_erasure", final_state, erased.probability});
    result.final_state = final_state;
    result.success_probability = probability;
    return result;
}

PipelineResult run_reversible(const Ket &state) {
    const CompositeSpace expected{signal_polarization(), idler_polarization(), signal_spatial(2)};
    if (!(state.space() == expected)) {
        throw std::invalid_argument("reversible eraser expects " + expected.describe() + ", got " +
                                    state.space().describe());
    }
    const auto target_check = condition_on(state, single(signal_spatial(2), spatial::slit(0)));
    if (target_check.is_null() || target_check.probability < 1.0 - tol::kNorm) {
        throw std::invalid_argument("reversible eraser expects the DOF 2 target in |0>");
    }

    PipelineResult result;
    result.stages.push_back({"source", state, 1.0});

    const SubsystemLabel forward[] = {signal_polarization(), signal_spatial(2)};
    const Ket diluted = apply_unitary(state, permutation_cnot(), forward);
    result.stages.push_back({"post_cnot", diluted, 1.0});

    const SubsystemLabel backward[] = {signal_spatial(2), signal_polarization()};
    const Ket undone = apply_unitary(diluted, permutation_cnot(), backward);
    result.stages.push_back({"post_second_cnot", undone, 1.0});

    const auto released = condition_on(undone, single(signal_polarization(), pol::H()));
    if (released.is_null() || released.probability < 1.0 - tol::kNorm) {
        throw std::logic_error("reversible eraser left the signal DOF 1 entangled");
    }
    const SubsystemLabel order[] = {signal_spatial(2), idler_polarization()};
    const Ket final_state = reorder(*released.state, order).canonical();
    result.stages.push_back({"post_erasure", final_state, 1.0});
    result.final_state = final_state;
    result.success_probability = 1.0;
    return result;
}

double concentration_angle(Complex b) {
    const double mb = std::abs(b);
    if (!(mb > 0.0 && mb < 1.0)) {
        throw std::invalid_argument("concentration needs 0 < |b| < 1; the state has no "
                                    "entanglement to concentrate");
    }
    return std::acos(mb);
}

CVector concentration_state(Complex b) { return pol::linear(concentration_angle(b)); }

Projector concentration_projector(Complex b) {
    return Projector::onto(CompositeSpace{signal_polarization()}, concentration_state(b));
}

Ket qudit_hes(std::size_t D, Complex a, Complex b, std::size_t j) {
    const Ket source = qudit_source(D, a, b, j);
    const auto result = run_irreversible(source, EraserSpec::irreversible(pol::L(), j), sptq_cnot(D));
    if (result.is_null()) {
        throw std::logic_error("qudit pipeline produced a null projection");
    }
    return *result.final_state;
}

Ket hes_target(std::size_t D, Complex a, Complex b, std::size_t j) {
    const ModeFamily family = mode_family(D);
    if (j >= D) {
        throw std::invalid_argument("mode index j must lie in [0, D)");
    }
    const CompositeSpace space{signal_spatial(D), idler_polarization()};
    const CVector v =
        a * kron(family.mode(j), pol::H()) + b * kron(family.mode(family.partner(j)), pol::V());
    return Ket(space, v).normalized().canonical();
}

double HesComponents::relative_phase() const {
    double phase = std::arg(av / fh);
    if (phase < 0) {
        phase += 2.0 * std::numbers::pi;
    }
    return phase;
}

HesComponents hes_components(const Ket &hes) {
    const CompositeSpace space{signal_spatial(2), idler_polarization()};
    if (!(hes.space() == space)) {
        throw std::invalid_argument("hes_components expects " + space.describe());
    }
    const CVector fh = kron(spatial::F(), pol::H());
    const CVector av = kron(spatial::A(), pol::V());
    return {fh.dot(hes.amplitudes()), av.dot(hes.amplitudes())};
}

}  // namespace hybrident
