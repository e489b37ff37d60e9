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

#ifndef HYBRIDENT_QSTATE_HPP
#define HYBRIDENT_QSTATE_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hybrident {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Numerical tolerances shared by every module.
namespace tol {
inline constexpr double kNorm = 1e-10;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPsdFloor = -1e-9;
inline constexpr double kReconstruction = 1e-8;
inline constexpr double kElement = 1e-12;
/// Probabilities below this are treated as an impossible outcome.
inline constexpr double kNullProbability = 1e-14;
}  // namespace tol

enum class Photon { signal, idler };
enum class Dof { polarization, spatial };

/**
 * @brief One tensor factor of a two-photon state.
 *
 * A factor is identified by (photon, dof); the dimension is 2 for
 * polarization and the number of slits for the spatial DOF.
 */
struct SubsystemLabel {
    Photon photon;
    Dof dof;
    std::size_t dimension;

    bool same_slot(const SubsystemLabel &other) const {
        return photon == other.photon && dof == other.dof;
    }
    std::string name() const;
    friend bool operator==(const SubsystemLabel &, const SubsystemLabel &) = default;
};

SubsystemLabel signal_polarization();
SubsystemLabel idler_polarization();
SubsystemLabel signal_spatial(std::size_t slits = 2);
SubsystemLabel idler_spatial(std::size_t slits = 2);

/**
 * @brief Ordered list of tensor factors.
 *
 * Composite basis index is row-major over the declared order: the first
 * label is the most significant digit.
 */
class CompositeSpace {
  public:
    CompositeSpace() = default;
    explicit CompositeSpace(std::vector<SubsystemLabel> labels);
    CompositeSpace(std::initializer_list<SubsystemLabel> labels)
        : CompositeSpace(std::vector<SubsystemLabel>(labels)) {}

    const std::vector<SubsystemLabel> &labels() const { return labels_; }
    std::size_t factor_count() const { return labels_.size(); }
    std::size_t dimension() const { return dimension_; }

    bool contains(const SubsystemLabel &label) const;
    /// Position of `label` in the factor list; throws std::invalid_argument if absent.
    std::size_t position_of(const SubsystemLabel &label) const;

    CompositeSpace without(std::span<const SubsystemLabel> removed) const;
    CompositeSpace concat(const CompositeSpace &other) const;

    /// Multi-index digits of a composite index.
    std::vector<std::size_t> digits(std::size_t index) const;
    std::string describe() const;

    friend bool operator==(const CompositeSpace &, const CompositeSpace &) = default;

  private:
    std::vector<SubsystemLabel> labels_;
    std::size_t dimension_ = 1;
};

/// Pure state. Immutable; operations return new kets.
class Ket {
  public:
    Ket(CompositeSpace space, CVector amplitudes);

    /// Computational basis vector |index>.
    static Ket basis(const CompositeSpace &space, std::size_t index);

    const CompositeSpace &space() const { return space_; }
    const CVector &amplitudes() const { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }

    Ket normalized() const;
    /// Global phase chosen so the first nonzero amplitude is real positive.
    Ket canonical() const;

  private:
    CompositeSpace space_;
    CVector amplitudes_;
};

/**
 * @brief Physical density operator.
 *
 * Construction checks Hermiticity and unit trace within tol::kHermitian /
 * tol::kNorm and a spectrum bounded below by tol::kPsdFloor.
 */
class DensityOperator {
  public:
    DensityOperator(CompositeSpace space, CMatrix matrix);

    static DensityOperator from_ket(const Ket &ket);
    static DensityOperator maximally_mixed(const CompositeSpace &space);

    const CompositeSpace &space() const { return space_; }
    const CMatrix &matrix() const { return matrix_; }
    double purity() const;
    Eigen::VectorXd eigenvalues() const;

  private:
    CompositeSpace space_;
    CMatrix matrix_;
};

/// Orthogonal projector acting on the factors listed in its space.
class Projector {
  public:
    Projector(CompositeSpace targets, CMatrix matrix);

    /// Rank-one projector onto the normalized direction of `vector`.
    static Projector onto(const CompositeSpace &targets, const CVector &vector);
    static Projector onto(const Ket &ket) { return onto(ket.space(), ket.amplitudes()); }

    const CompositeSpace &targets() const { return targets_; }
    const CMatrix &matrix() const { return matrix_; }

  private:
    CompositeSpace targets_;
    CMatrix matrix_;
};

CMatrix kron(const CMatrix &a, const CMatrix &b);
CVector kron(const CVector &a, const CVector &b);
bool is_unitary(const CMatrix &u, double tolerance = tol::kNorm);

/// Kronecker product in argument order. Labels must be disjoint.
Ket tensor(std::span<const Ket> factors);
Ket tensor(const Ket &a, const Ket &b);

/// Same state with its factors listed in `order` (a permutation of its labels).
Ket reorder(const Ket &state, std::span<const SubsystemLabel> order);
DensityOperator reorder(const DensityOperator &state, std::span<const SubsystemLabel> order);

/// Reduced state on `keep`, factors in the order given.
DensityOperator partial_trace(const DensityOperator &rho, std::span<const SubsystemLabel> keep);

Ket apply_unitary(const Ket &state, const CMatrix &unitary,
                  std::span<const SubsystemLabel> targets);
DensityOperator apply_unitary(const DensityOperator &state, const CMatrix &unitary,
                              std::span<const SubsystemLabel> targets);

/// Outcome of a projective measurement; `state` is empty for an impossible outcome.
template <typename State> struct ProjectionOutcome {
    std::optional<State> state;
    double probability = 0.0;

    bool is_null() const { return !state.has_value(); }
};

ProjectionOutcome<Ket> project(const Ket &state, const Projector &projector);
ProjectionOutcome<DensityOperator> project(const DensityOperator &state,
                                           const Projector &projector);

/**
 * @brief Projects the factors of `outcome` onto it and drops them.
 *
 * Returns the renormalized state of the remaining factors together with
 * the probability |<outcome|state>|^2.
 */
ProjectionOutcome<Ket> condition_on(const Ket &state, const Ket &outcome);

/// p*rho + (1-p)*I/d.
DensityOperator werner_mix(const DensityOperator &rho, double p);

struct SchmidtDecomposition {
    std::vector<double> coefficients;  // descending, strictly positive
    std::vector<Ket> left_modes;
    std::vector<Ket> right_modes;

    std::size_t rank() const { return coefficients.size(); }
};

/// Schmidt form across (`left` , remaining labels).
SchmidtDecomposition schmidt_decompose(const Ket &state, std::span<const SubsystemLabel> left);

/// |<a|b>|^2 for kets on the same space.
double overlap_probability(const Ket &a, const Ket &b);

}  // namespace hybrident

#endif  // HYBRIDENT_QSTATE_HPP
