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

#ifndef HYBRIDENT_ELEMENTS_HPP
#define HYBRIDENT_ELEMENTS_HPP

#include <array>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "hybrident/qstate.hpp"

namespace hybrident {

/**
 * Polarization vectors in the (H, V) basis.
 *
 * Circular convention: L = (H + iV)/sqrt(2), R = (H - iV)/sqrt(2). With the
 * Jones convention of waveplate_unitary a QWP at 45 degrees maps L to H.
 */
namespace pol {
CVector H();
CVector V();
CVector D();  // (H + V)/sqrt(2)
CVector A();  // (H - V)/sqrt(2)
CVector L();
CVector R();
/// Linear polarization at `angle` radians from horizontal.
CVector linear(double angle);
}  // namespace pol

/// Spatial-qubit vectors in the slit basis (|0>, |1>).
namespace spatial {
CVector slit(std::size_t l, std::size_t slits = 2);
CVector F();  // (|0> + |1>)/sqrt(2)
CVector A();  // (|0> - |1>)/sqrt(2)
CVector F_plus_iA();
CVector F_minus_iA();
}  // namespace spatial

struct WaveplateSpec {
    double retardance;       // radians; pi/2 for a QWP, pi for a HWP
    double fast_axis_angle;  // radians from horizontal
};

inline WaveplateSpec quarter_wave(double angle) { return {std::numbers::pi / 2.0, angle}; }
inline WaveplateSpec half_wave(double angle) { return {std::numbers::pi, angle}; }

/// Jones matrix R(-t) diag(1, e^{i delta}) R(t), with R(t) = [[c, s], [-s, c]].
CMatrix waveplate_unitary(const WaveplateSpec &spec);

/**
 * Far-field optics of the signal arm. Lengths in meters.
 *
 * Defaults: 80 um slits at 250 um center-to-center, 702 nm, 300 mm
 * Fourier lens, 50 um detector slit, +/-5 mm scan window.
 */
struct OpticsGeometry {
    double slit_width = 80e-6;
    double slit_separation = 250e-6;
    double wavelength = 702e-9;
    double focal_length = 0.3;
    std::size_t slit_count = 2;
    double detector_width = 50e-6;  // 0 disables the top-hat convolution
    double window_half_width = 5e-3;

    void validate() const;
    /// lambda f / d
    double fringe_period() const { return wavelength * focal_length / slit_separation; }
    /// lambda f / w
    double envelope_first_zero() const { return wavelength * focal_length / slit_width; }
};

/**
 * The D balanced 0/pi-phase slit superpositions F_j.
 *
 * Rows are Sylvester-Hadamard rows in natural order, so flipping the sign
 * of slits n..D-1 (n = D/2) maps F_j onto F_{j+n mod D}.
 */
class ModeFamily {
  public:
    std::size_t dimension() const { return dimension_; }
    /// phase(j, l) is 0 or pi.
    double phase(std::size_t j, std::size_t l) const { return phases_[j][l]; }
    CVector mode(std::size_t j) const;
    /// Matrix whose column j is F_j.
    CMatrix modes() const;
    std::size_t partner(std::size_t j) const { return (j + dimension_ / 2) % dimension_; }

  private:
    friend ModeFamily mode_family(std::size_t D);
    std::size_t dimension_ = 0;
    std::vector<std::vector<double>> phases_;
};

/// Throws std::invalid_argument for odd D and for even D outside {2, 4, 8}.
ModeFamily mode_family(std::size_t D);

/**
 * Ideal slit-array CNOT on polarization (x) spatial, polarization first.
 *
 * H block: identity. V block: i * sum_j |F_{j+n}><F_j|, which in the slit
 * basis is i * diag(+1 on slits < n, -1 on slits >= n).
 */
CMatrix sptq_cnot(std::size_t D);

/// Misalignment of the QWPs glued behind the slits.
struct QwpArrayErrors {
    double offset_first = 0.0;   // radians, plates on slits < n (nominal 0)
    double offset_second = 0.0;  // radians, plates on slits >= n (nominal pi/2)
    double retardance_error = 0.0;
};

/**
 * The slit-array CNOT built from per-slit QWP Jones matrices.
 *
 * Each slit carries a fixed scalar phase that makes the nominal plates
 * reproduce sptq_cnot(D) exactly; errors perturb only the plates.
 */
CMatrix qwp_array_cnot(std::size_t D, const QwpArrayErrors &errors = {});

/// Textbook CNOT on two qubits, control first, flipping |0> <-> |1> of the target.
CMatrix permutation_cnot();

struct NamedVector {
    std::string name;
    CVector vector;
};

struct Basis {
    std::string name;
    std::array<NamedVector, 2> states;
};

/// Three mutually unbiased bases per qubit DOF.
struct BasisCatalog {
    std::array<Basis, 3> polarization;
    std::array<Basis, 3> spatial;

    const std::array<Basis, 3> &for_dof(Dof dof) const {
        return dof == Dof::polarization ? polarization : spatial;
    }
};

const BasisCatalog &basis_catalog();

/**
 * Fraunhofer model of a D-slit aperture at the Fourier plane.
 *
 * Slit l contributes sinc(pi w x / (lambda f)) exp(i 2 pi x l d / (lambda f)).
 * Intensities are normalized so that they integrate to 1 over the window.
 */
class FarFieldModel {
  public:
    explicit FarFieldModel(const OpticsGeometry &geometry);

    const OpticsGeometry &geometry() const { return geometry_; }

    /// Unnormalized per-slit amplitudes at x.
    CVector slit_amplitudes(double x) const;
    /// Gram matrix G_lm = integral over the window of a_l conj(a_m).
    const CMatrix &gram() const { return gram_; }

    Complex amplitude(const CVector &coefficients, double x) const;
    double intensity(const CMatrix &rho, double x) const;
    /// Intensity averaged over a detector slit centered at x.
    double detector_intensity(const CMatrix &rho, double x) const;

  private:
    double raw_intensity(const CMatrix &rho, double x) const;

    OpticsGeometry geometry_;
    CMatrix gram_;
};

Complex farfield_amplitude(const Ket &spatial_state, const OpticsGeometry &geometry, double x);

/// Pointwise far-field intensity (no detector convolution).
std::vector<double> intensity_curve(const Ket &spatial_state, const OpticsGeometry &geometry,
                                    const std::vector<double> &positions);
std::vector<double> intensity_curve(const DensityOperator &spatial_state,
                                    const OpticsGeometry &geometry,
                                    const std::vector<double> &positions);

/// n evenly spaced positions covering [-half_width, half_width].
std::vector<double> linspace_positions(double half_width, std::size_t n);

}  // namespace hybrident

#endif  // HYBRIDENT_ELEMENTS_HPP
