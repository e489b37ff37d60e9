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

#include "hybrident/elements.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace hybrident {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const Complex kI(0.0, 1.0);

CVector vec2(Complex a, Complex b) {
    CVector v(2);
    v << a, b;
    return v;
}

double sinc(double u) { return std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u; }

/// Composite Simpson weights on n (even) intervals.
template <typename F> std::invoke_result_t<F, double> simpson(F &&f, double a, double b, int n) {
    const double h = (b - a) / n;
    std::invoke_result_t<F, double> sum = f(a);
    sum += f(b);
    for (int k = 1; k < n; ++k) {
        sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    }
    sum *= h / 3.0;
    return sum;
}

}  // namespace

namespace pol {
CVector H() { return vec2(1.0, 0.0); }
CVector V() { return vec2(0.0, 1.0); }
CVector D() { return vec2(kInvSqrt2, kInvSqrt2); }
CVector A() { return vec2(kInvSqrt2, -kInvSqrt2); }
CVector L() { return vec2(kInvSqrt2, kI * kInvSqrt2); }
CVector R() { return vec2(kInvSqrt2, -kI * kInvSqrt2); }
CVector linear(double angle) { return vec2(std::cos(angle), std::sin(angle)); }
}  // namespace pol

namespace spatial {
CVector slit(std::size_t l, std::size_t slits) {
    if (l >= slits) {
        throw std::invalid_argument("slit index out of range");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(slits));
    v(static_cast<Eigen::Index>(l)) = 1.0;
    return v;
}
CVector F() { return vec2(kInvSqrt2, kInvSqrt2); }
CVector A() { return vec2(kInvSqrt2, -kInvSqrt2); }
CVector F_plus_iA() { return (F() + kI * A()) * kInvSqrt2; }
CVector F_minus_iA() { return (F() - kI * A()) * kInvSqrt2; }
}  // namespace spatial

CMatrix waveplate_unitary(const WaveplateSpec &spec) {
    const double c = std::cos(spec.fast_axis_angle);
    const double s = std::sin(spec.fast_axis_angle);
    CMatrix rot(2, 2);
    rot << c, s, -s, c;
    CMatrix retarder = CMatrix::Zero(2, 2);
    retarder(0, 0) = 1.0;
    retarder(1, 1) = std::polar(1.0, spec.retardance);
    return rot.transpose() * retarder * rot;
}

void OpticsGeometry::validate() const {
    if (!(slit_width > 0.0) || !(slit_separation > 0.0) || !(wavelength > 0.0) ||
        !(focal_length > 0.0) || !(window_half_width > 0.0)) {
        throw std::invalid_argument("optics geometry lengths must be strictly positive");
    }
    if (!(slit_separation > slit_width)) {
        throw std::invalid_argument("slit separation must exceed the slit width");
    }
    if (!(detector_width >= 0.0)) {
        throw std::invalid_argument("detector width must be nonnegative");
    }
    if (slit_count == 0) {
        throw std::invalid_argument("slit count must be positive");
    }
}

CVector ModeFamily::mode(std::size_t j) const {
    if (j >= dimension_) {
        throw std::invalid_argument("mode index out of range");
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(dimension_));
    CVector v(static_cast<Eigen::Index>(dimension_));
    for (std::size_t l = 0; l < dimension_; ++l) {
        v(static_cast<Eigen::Index>(l)) = std::polar(norm, phases_[j][l]);
    }
    // phases are 0 or pi: keep the vector exactly real
    return v.real().cast<Complex>();
}

CMatrix ModeFamily::modes() const {
    const auto d = static_cast<Eigen::Index>(dimension_);
    CMatrix m(d, d);
    for (std::size_t j = 0; j < dimension_; ++j) {
        m.col(static_cast<Eigen::Index>(j)) = mode(j);
    }
    return m;
}

ModeFamily mode_family(std::size_t D) {
    if (D < 2 || D % 2 != 0) {
        throw std::invalid_argument("qudit dimension must be even (D = 2n) for maximal "
                                    "entanglement with the QWP array; got D=" +
                                    std::to_string(D));
    }
    if (D % 4 == 2 && D > 2) {
        throw std::invalid_argument(
            "no orthonormal family of 0/pi phase modes exists for D=" + std::to_string(D) +
            ": it would be a real Hadamard matrix, which requires D = 1, 2 or a multiple of 4");
    }
    if (D != 2 && D != 4 && D != 8) {
        throw std::invalid_argument("only D in {2, 4, 8} are supported; got D=" +
                                    std::to_string(D));
    }
    ModeFamily family;
    family.dimension_ = D;
    family.phases_.assign(D, std::vector<double>(D, 0.0));
    for (std::size_t j = 0; j < D; ++j) {
        for (std::size_t l = 0; l < D; ++l) {
            family.phases_[j][l] = (std::popcount(j & l) % 2) ? kPi : 0.0;
        }
    }
    return family;
}

CMatrix sptq_cnot(std::size_t D) {
    const ModeFamily family = mode_family(D);
    const auto d = static_cast<Eigen::Index>(D);
    CMatrix shift = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < D; ++j) {
        shift(static_cast<Eigen::Index>(family.partner(j)), static_cast<Eigen::Index>(j)) = 1.0;
    }
    const CMatrix modes = family.modes();
    CMatrix u = CMatrix::Zero(2 * d, 2 * d);
    u.topLeftCorner(d, d) = CMatrix::Identity(d, d);
    u.bottomRightCorner(d, d) = kI * modes * shift * modes.adjoint();
    return u;
}

CMatrix qwp_array_cnot(std::size_t D, const QwpArrayErrors &errors) {
    mode_family(D);
    const auto d = static_cast<Eigen::Index>(D);
    const std::size_t n = D / 2;
    CMatrix u = CMatrix::Zero(2 * d, 2 * d);
    for (std::size_t l = 0; l < D; ++l) {
        const bool first = l < n;
        const double nominal_angle = first ? 0.0 : kPi / 2.0;
        const Complex reference = waveplate_unitary(quarter_wave(nominal_angle))(0, 0);
        const Complex compensation = std::conj(reference) / std::abs(reference);
        const CMatrix plate =
            compensation *
            waveplate_unitary({kPi / 2.0 + errors.retardance_error,
                               nominal_angle + (first ? errors.offset_first : errors.offset_second)});
        const auto li = static_cast<Eigen::Index>(l);
        for (Eigen::Index p = 0; p < 2; ++p) {
            for (Eigen::Index q = 0; q < 2; ++q) {
                u(p * d + li, q * d + li) = plate(p, q);
            }
        }
    }
    return u;
}

CMatrix permutation_cnot() {
    CMatrix u = CMatrix::Zero(4, 4);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;
    u(2, 3) = 1.0;
    u(3, 2) = 1.0;
    return u;
}

const BasisCatalog &basis_catalog() {
    static const BasisCatalog catalog{
        {{
            {"HV", {{{"H", pol::H()}, {"V", pol::V()}}}},
            {"DA", {{{"D", pol::D()}, {"A", pol::A()}}}},
            {"LR", {{{"L", pol::L()}, {"R", pol::R()}}}},
        }},
        {{
            {"FA", {{{"F", spatial::F()}, {"A", spatial::A()}}}},
            {"slit", {{{"0", spatial::slit(0)}, {"1", spatial::slit(1)}}}},
            {"FiA", {{{"F+iA", spatial::F_plus_iA()}, {"F-iA", spatial::F_minus_iA()}}}},
        }},
    };
    return catalog;
}

FarFieldModel::FarFieldModel(const OpticsGeometry &geometry) : geometry_(geometry) {
    geometry_.validate();
    const double w = geometry_.window_half_width;
    gram_ = simpson(
        [this](double x) -> CMatrix {
            const CVector a = slit_amplitudes(x);
            return a * a.adjoint();
        },
        -w, w, 20000);
    gram_ = (0.5 * (gram_ + gram_.adjoint())).eval();
}

CVector FarFieldModel::slit_amplitudes(double x) const {
    const double lf = geometry_.wavelength * geometry_.focal_length;
    const double envelope = sinc(kPi * geometry_.slit_width * x / lf);
    const double k = 2.0 * kPi * x * geometry_.slit_separation / lf;
    CVector a(static_cast<Eigen::Index>(geometry_.slit_count));
    for (Eigen::Index l = 0; l < a.size(); ++l) {
        a(l) = std::polar(envelope, k * static_cast<double>(l));
    }
    return a;
}

double FarFieldModel::raw_intensity(const CMatrix &rho, double x) const {
    const CVector a = slit_amplitudes(x);
    return std::max(0.0, (a.transpose() * rho * a.conjugate())(0).real());
}

Complex FarFieldModel::amplitude(const CVector &coefficients, double x) const {
    if (coefficients.size() != gram_.rows()) {
        throw std::invalid_argument("spatial state dimension does not match slit count");
    }
    const CMatrix rho = coefficients * coefficients.adjoint();
    const double norm = rho.cwiseProduct(gram_).sum().real();
    return slit_amplitudes(x).cwiseProduct(coefficients).sum() / std::sqrt(norm);
}

double FarFieldModel::intensity(const CMatrix &rho, double x) const {
    if (rho.rows() != gram_.rows()) {
        throw std::invalid_argument("spatial state dimension does not match slit count");
    }
    const double norm = rho.cwiseProduct(gram_).sum().real();
    return raw_intensity(rho, x) / norm;
}

double FarFieldModel::detector_intensity(const CMatrix &rho, double x) const {
    const double w = geometry_.detector_width;
    if (w == 0.0) {
        return intensity(rho, x);
    }
    const double norm = rho.cwiseProduct(gram_).sum().real();
    const double integral =
        simpson([&](double u) { return raw_intensity(rho, u); }, x - w / 2.0, x + w / 2.0, 40);
    return integral / (w * norm);
}

namespace {

void check_spatial_state(const CompositeSpace &space, const OpticsGeometry &geometry) {
    if (space.factor_count() != 1 || space.labels()[0].dof != Dof::spatial) {
        throw std::invalid_argument("far-field evaluation needs a single spatial factor, got " +
                                    space.describe());
    }
    if (space.dimension() != geometry.slit_count) {
        throw std::invalid_argument("spatial state dimension does not match slit count");
    }
}

void check_window(const OpticsGeometry &geometry, double x) {
    if (std::abs(x) > geometry.window_half_width * (1.0 + 1e-12)) {
        throw std::invalid_argument("position outside the scan window");
    }
}

}  // namespace

Complex farfield_amplitude(const Ket &spatial_state, const OpticsGeometry &geometry, double x) {
    check_spatial_state(spatial_state.space(), geometry);
    check_window(geometry, x);
    return FarFieldModel(geometry).amplitude(spatial_state.amplitudes(), x);
}

std::vector<double> intensity_curve(const Ket &spatial_state, const OpticsGeometry &geometry,
                                    const std::vector<double> &positions) {
    return intensity_curve(DensityOperator::from_ket(spatial_state), geometry, positions);
}

std::vector<double> intensity_curve(const DensityOperator &spatial_state,
                                    const OpticsGeometry &geometry,
                                    const std::vector<double> &positions) {
    check_spatial_state(spatial_state.space(), geometry);
    const FarFieldModel model(geometry);
    std::vector<double> out;
    out.reserve(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (k > 0 && positions[k] < positions[k - 1]) {
            throw std::invalid_argument("intensity_curve positions must be sorted");
        }
        check_window(geometry, positions[k]);
        out.push_back(model.intensity(spatial_state.matrix(), positions[k]));
    }
    return out;
}

std::vector<double> linspace_positions(double half_width, std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("need at least two positions");
    }
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = -half_width + 2.0 * half_width * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace hybrident
