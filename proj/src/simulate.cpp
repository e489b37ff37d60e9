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

#include "hybrident/simulate.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>

namespace hybrident {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const void *data, std::size_t size, std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}


std::uint64_t poisson(double mean, std::uint64_t seed) {
    if (!(mean > 0.0)) {
        return 0;
    }
    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

std::optional<SubsystemLabel> find_slot(const CompositeSpace &space, const SubsystemLabel &slot) {
    for (const auto &l : space.labels()) {
        if (l.same_slot(slot)) {
            return l;
        }
    }
    return std::nullopt;
}

DensityOperator drop(const DensityOperator &rho, const SubsystemLabel &label) {
    const SubsystemLabel removed[] = {label};
    const auto keep = rho.space().without(removed).labels();
    return partial_trace(rho, keep);
}

}  // namespace

void AcquisitionSpec::validate() const {
    if (!(duration >= 0.0) || !(pair_rate >= 0.0) || !(background_rate >= 0.0)) {
        throw std::invalid_argument("acquisition duration and rates must be nonnegative");
    }
}

void NoiseSpec::validate() const {
    if (!(werner_p >= 0.0 && werner_p <= 1.0)) {
        throw std::invalid_argument("werner_p must lie in [0, 1]");
    }
    if (!std::isfinite(qwp_offset_first) || !std::isfinite(qwp_offset_second) ||
        !std::isfinite(retardance_error)) {
        throw std::invalid_argument("QWP errors must be finite");
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string content_digest(std::string_view text) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
    return buf;
}

std::uint64_t child_seed(std::uint64_t master, std::string_view id) {
    return splitmix64(master ^ splitmix64(fnv1a(id.data(), id.size())));
}

std::string state_digest(const CMatrix &rho) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            const double parts[2] = {rho(i, j).real(), rho(i, j).imag()};
            h = fnv1a(parts, sizeof(parts), h);
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string CountsTable::to_csv() const {
    std::string out = "projector_id,p_expected,counts,duration_s,seed\n";
    for (const auto &row : rows) {
        out += row.projector_id + "," + format_double(row.p_expected) + "," +
               std::to_string(row.counts) + "," + format_double(row.duration_s) + "," +
               std::to_string(row.seed) + "\n";
    }
    return out;
}

CountsTable CountsTable::from_csv(std::string_view csv, double pair_rate, double background_rate) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != "projector_id,p_expected,counts,duration_s,seed") {
        throw std::invalid_argument("counts CSV has an unexpected header");
    }
    CountsTable table;
    table.pair_rate = pair_rate;
    table.background_rate = background_rate;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 5) {
            throw std::invalid_argument("counts CSV row needs 5 fields: " + line);
        }
        CountsRow row;
        row.projector_id = fields[0];
        row.p_expected = std::stod(fields[1]);
        row.counts = std::stoull(fields[2]);
        row.duration_s = std::stod(fields[3]);
        row.seed = std::stoull(fields[4]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

double born_probability(const Ket &state, const Projector &projector) {
    return born_probability(DensityOperator::from_ket(state), projector);
}

double born_probability(const DensityOperator &state, const Projector &projector) {
    const auto &targets = projector.targets().labels();
    const DensityOperator reduced = partial_trace(state, targets);
    return std::max(0.0, (projector.matrix() * reduced.matrix()).trace().real());
}

std::uint64_t sample_counts(double p, const AcquisitionSpec &acq) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-12)) {
        throw std::invalid_argument("sample_counts: probability outside [0, 1]");
    }
    acq.validate();
    return poisson(p * acq.pair_rate * acq.duration + acq.background_rate * acq.duration,
                   acq.seed);
}

CountsTable tomography_counts(const DensityOperator &state,
                              const std::vector<NamedProjector> &projectors,
                              const AcquisitionSpec &acq) {
    acq.validate();
    CountsTable table;
    table.master_seed = acq.seed;
    table.pair_rate = acq.pair_rate;
    table.background_rate = acq.background_rate;
    table.state_hash = state_digest(state.matrix());
    for (const auto &np : projectors) {
        CountsRow row;
        row.projector_id = np.id;
        row.p_expected = std::min(1.0, born_probability(state, np.projector));
        row.duration_s = acq.duration;
        row.seed = child_seed(acq.seed, np.id);
        AcquisitionSpec row_acq = acq;
        row_acq.seed = row.seed;
        row.counts = sample_counts(row.p_expected, row_acq);
        table.rows.push_back(std::move(row));
    }
    return table;
}

DensityOperator perturbed_pipeline(const Ket &source, const EraserSpec &spec,
                                   const NoiseSpec &noise) {
    noise.validate();
    spec.validate();
    if (spec.variant == EraserVariant::reversible) {
        const auto result = run_reversible(source);
        return werner_mix(DensityOperator::from_ket(*result.final_state), noise.werner_p);
    }

    const auto s_spatial = find_slot(source.space(), signal_spatial());
    const auto i_spatial = find_slot(source.space(), idler_spatial());
    if (!s_spatial) {
        throw std::invalid_argument("perturbed_pipeline: source has no signal spatial factor");
    }
    DensityOperator rho = DensityOperator::from_ket(source);
    const SubsystemLabel targets[] = {signal_polarization(), *s_spatial};
    rho = apply_unitary(rho, qwp_array_cnot(s_spatial->dimension, noise.qwp_errors()), targets);

    if (i_spatial && spec.idler_filter_mode) {
        const ModeFamily family = mode_family(i_spatial->dimension);
        const auto filtered = project(
            rho, Projector::onto(CompositeSpace{*i_spatial}, family.mode(*spec.idler_filter_mode)));
        if (filtered.is_null()) {
            throw NullProjectionError("idler spatial filter has zero transmission");
        }
        rho = drop(*filtered.state, *i_spatial);
    }
    const auto erased =
        project(rho, Projector::onto(CompositeSpace{signal_polarization()}, *spec.erasure_state));
    if (erased.is_null()) {
        throw NullProjectionError("erasure projection has zero probability");
    }
    rho = drop(*erased.state, signal_polarization());

    std::vector<SubsystemLabel> order{*s_spatial, idler_polarization()};
    if (i_spatial && rho.space().contains(*i_spatial)) {
        order.push_back(*i_spatial);
    }
    return werner_mix(reorder(rho, order), noise.werner_p);
}

DensityOperator perturbed_pipeline(const SourceParams &source, const EraserSpec &spec,
                                   const NoiseSpec &noise) {
    if (spec.variant == EraserVariant::reversible) {
        return perturbed_pipeline(generic_initial(source.a, source.b), spec, noise);
    }
    return perturbed_pipeline(hyper_source(source), spec, noise);
}

std::vector<double> ScanCurve::positions() const {
    std::vector<double> out;
    for (const auto &p : points) {
        out.push_back(p.position);
    }
    return out;
}

std::vector<double> ScanCurve::expected() const {
    std::vector<double> out;
    for (const auto &p : points) {
        out.push_back(p.intensity_expected);
    }
    return out;
}

std::vector<double> ScanCurve::counts_as_double() const {
    std::vector<double> out;
    for (const auto &p : points) {
        out.push_back(static_cast<double>(p.counts));
    }
    return out;
}

std::string ScanCurve::to_csv() const {
    std::string out = "position_mm,intensity_expected,counts\n";
    for (const auto &p : points) {
        out += format_double(p.position * 1e3) + "," + format_double(p.intensity_expected * 1e-3) +
               "," + std::to_string(p.counts) + "\n";
    }
    return out;
}

ScanCurve scan_run(const DensityOperator &state, const OpticsGeometry &geometry,
                   const std::vector<double> &positions, const AcquisitionSpec &acq,
                   const std::optional<NamedProjector> &conditioning) {
    acq.validate();
    const auto s_spatial = find_slot(state.space(), signal_spatial());
    if (!s_spatial) {
        throw std::invalid_argument("scan_run: state has no signal spatial factor");
    }
    if (s_spatial->dimension != geometry.slit_count) {
        throw std::invalid_argument("scan_run: geometry slit count does not match the state");
    }
    ScanCurve curve;
    curve.conditioning = conditioning ? conditioning->id : "none";
    DensityOperator conditioned = state;
    if (conditioning) {
        if (conditioning->projector.targets().contains(*s_spatial)) {
            throw std::invalid_argument("scan_run: conditioning must not act on the scanned DOF");
        }
        const auto outcome = project(state, conditioning->projector);
        if (outcome.is_null()) {
            throw NullProjectionError("scan conditioning has zero probability");
        }
        conditioned = *outcome.state;
        curve.conditioning_probability = outcome.probability;
    }
    const SubsystemLabel keep[] = {*s_spatial};
    const DensityOperator marginal = partial_trace(conditioned, keep);
    const FarFieldModel model(geometry);

    for (std::size_t k = 0; k < positions.size(); ++k) {
        const double x = positions[k];
        if (k > 0 && x < positions[k - 1]) {
            throw std::invalid_argument("scan positions must be sorted");
        }
        double width = geometry.detector_width;
        if (width == 0.0) {
            const double lo = positions[k > 0 ? k - 1 : k];
            const double hi = positions[k + 1 < positions.size() ? k + 1 : k];
            width = positions.size() > 1
                        ? (hi - lo) / static_cast<double>((k > 0) + (k + 1 < positions.size()))
                        : 0.0;
        }
        ScanPoint point;
        point.position = x;
        point.intensity_expected = model.detector_intensity(marginal.matrix(), x);
        point.p_expected = std::min(1.0, point.intensity_expected * width);
        AcquisitionSpec point_acq = acq;
        point_acq.seed = child_seed(acq.seed, curve.conditioning + ":" + std::to_string(k));
        point.counts = sample_counts(point.p_expected * curve.conditioning_probability, point_acq);
        curve.points.push_back(point);
    }
    return curve;
}

CMatrix cnot_truth_table(const CMatrix &cnot) {
    if (cnot.rows() != 4 || cnot.cols() != 4) {
        throw std::invalid_argument("truth table needs a two-qubit gate");
    }
    const CVector basis[] = {kron(pol::H(), spatial::F()), kron(pol::H(), spatial::A()),
                             kron(pol::V(), spatial::F()), kron(pol::V(), spatial::A())};
    CMatrix table(4, 4);
    for (int in = 0; in < 4; ++in) {
        const CVector out = cnot * basis[in];
        for (int o = 0; o < 4; ++o) {
            table(in, o) = std::norm(basis[o].dot(out));
        }
    }
    return table;
}

std::vector<double> malus_curve(const Ket &state, const CVector &spatial_projection,
                                const std::vector<double> &angles) {
    const CompositeSpace targets{signal_polarization(), state.space().labels().at(1)};
    if (!(state.space() == targets) || spatial_projection.size() != 2) {
        throw std::invalid_argument("malus_curve expects a signal polarization (x) spatial qubit state");
    }
    std::vector<double> out;
    out.reserve(angles.size());
    for (const double angle : angles) {
        const Projector p = Projector::onto(targets, kron(pol::linear(angle), spatial_projection));
        out.push_back(born_probability(state, p));
    }
    return out;
}

}  // namespace hybrident
