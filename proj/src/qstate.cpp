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

#include "hybrident/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybrident {

namespace {

/// For each composite index of `to`, the matching composite index of `from`.
std::vector<std::size_t> index_map(const CompositeSpace &from, const CompositeSpace &to) {
    const auto &to_labels = to.labels();
    std::vector<std::size_t> from_stride(from.factor_count(), 1);
    for (std::size_t k = from.factor_count(); k-- > 1;) {
        from_stride[k - 1] = from_stride[k] * from.labels()[k].dimension;
    }
    std::vector<std::size_t> stride_of_to(to_labels.size());
    for (std::size_t k = 0; k < to_labels.size(); ++k) {
        stride_of_to[k] = from_stride[from.position_of(to_labels[k])];
    }
    std::vector<std::size_t> map(to.dimension());
    for (std::size_t i = 0; i < to.dimension(); ++i) {
        const auto d = to.digits(i);
        std::size_t j = 0;
        for (std::size_t k = 0; k < d.size(); ++k) {
            j += d[k] * stride_of_to[k];
        }
        map[i] = j;
    }
    return map;
}

CVector permute(const CVector &v, const std::vector<std::size_t> &map) {
    CVector out(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(map[i]));
    }
    return out;
}

CVector unpermute(const CVector &v, const std::vector<std::size_t> &map) {
    CVector out(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) {
        out(static_cast<Eigen::Index>(map[i])) = v(static_cast<Eigen::Index>(i));
    }
    return out;
}

CMatrix permute(const CMatrix &m, const std::vector<std::size_t> &map) {
    const auto n = static_cast<Eigen::Index>(map.size());
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = m(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j]));
        }
    }
    return out;
}

CMatrix unpermute(const CMatrix &m, const std::vector<std::size_t> &map) {
    const auto n = static_cast<Eigen::Index>(map.size());
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j])) = m(i, j);
        }
    }
    return out;
}

CompositeSpace labels_space(std::span<const SubsystemLabel> labels) {
    return CompositeSpace(std::vector<SubsystemLabel>(labels.begin(), labels.end()));
}

/// Space with `front` moved to the front (in the given order), the rest in original order.
CompositeSpace front_loaded(const CompositeSpace &space, std::span<const SubsystemLabel> front) {
    for (const auto &label : front) {
        space.position_of(label);
    }
    return labels_space(front).concat(space.without(front));
}

double hermitian_defect(const CMatrix &m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

std::string SubsystemLabel::name() const {
    std::string out = photon == Photon::signal ? "signal" : "idler";
    out += dof == Dof::polarization ? ".polarization" : ".spatial";
    return out;
}

SubsystemLabel signal_polarization() { return {Photon::signal, Dof::polarization, 2}; }
SubsystemLabel idler_polarization() { return {Photon::idler, Dof::polarization, 2}; }
SubsystemLabel signal_spatial(std::size_t slits) { return {Photon::signal, Dof::spatial, slits}; }
SubsystemLabel idler_spatial(std::size_t slits) { return {Photon::idler, Dof::spatial, slits}; }

CompositeSpace::CompositeSpace(std::vector<SubsystemLabel> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const auto &label = labels_[i];
        if (label.dof == Dof::polarization && label.dimension != 2) {
            throw std::invalid_argument("polarization factor must have dimension 2: " +
                                        label.name());
        }
        if (label.dimension < 2) {
            throw std::invalid_argument("factor dimension must be at least 2: " + label.name());
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (labels_[j].same_slot(label)) {
                throw std::invalid_argument("duplicate subsystem label: " + label.name());
            }
        }
        dimension_ *= label.dimension;
    }
}

bool CompositeSpace::contains(const SubsystemLabel &label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t CompositeSpace::position_of(const SubsystemLabel &label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw std::invalid_argument("unknown subsystem label " + label.name() + " (dim " +
                                    std::to_string(label.dimension) + ") in " + describe());
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

CompositeSpace CompositeSpace::without(std::span<const SubsystemLabel> removed) const {
    std::vector<SubsystemLabel> kept;
    for (const auto &label : labels_) {
        if (std::find(removed.begin(), removed.end(), label) == removed.end()) {
            kept.push_back(label);
        }
    }
    return CompositeSpace(std::move(kept));
}

CompositeSpace CompositeSpace::concat(const CompositeSpace &other) const {
    auto all = labels_;
    all.insert(all.end(), other.labels_.begin(), other.labels_.end());
    return CompositeSpace(std::move(all));
}

std::vector<std::size_t> CompositeSpace::digits(std::size_t index) const {
    std::vector<std::size_t> out(labels_.size());
    for (std::size_t k = labels_.size(); k-- > 0;) {
        out[k] = index % labels_[k].dimension;
        index /= labels_[k].dimension;
    }
    return out;
}

std::string CompositeSpace::describe() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        os << (i ? ", " : "") << labels_[i].name() << "(" << labels_[i].dimension << ")";
    }
    os << "]";
    return os.str();
}

Ket::Ket(CompositeSpace space, CVector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != space_.dimension()) {
        throw std::invalid_argument("amplitude vector length " +
                                    std::to_string(amplitudes_.size()) +
                                    " does not match space dimension " +
                                    std::to_string(space_.dimension()));
    }
}

Ket Ket::basis(const CompositeSpace &space, std::size_t index) {
    if (index >= space.dimension()) {
        throw std::invalid_argument("basis index out of range");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return Ket(space, std::move(v));
}

Ket Ket::normalized() const {
    const double n = norm();
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    return Ket(space_, amplitudes_ / n);
}

Ket Ket::canonical() const {
    const double scale = amplitudes_.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
        const Complex a = amplitudes_(i);
        if (std::abs(a) > 1e-9 * scale) {
            return Ket(space_, amplitudes_ * (std::conj(a) / std::abs(a)));
        }
    }
    return *this;
}

DensityOperator::DensityOperator(CompositeSpace space, CMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(space_.dimension());
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw std::invalid_argument("density matrix shape does not match " + space_.describe());
    }
    if (hermitian_defect(matrix_) > tol::kHermitian) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0)) > tol::kNorm) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    if (eigenvalues().minCoeff() < tol::kPsdFloor) {
        throw std::invalid_argument("density matrix is not positive semidefinite");
    }
}

DensityOperator DensityOperator::from_ket(const Ket &ket) {
    const Ket k = ket.normalized();
    return DensityOperator(k.space(), k.amplitudes() * k.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(const CompositeSpace &space) {
    const auto n = static_cast<Eigen::Index>(space.dimension());
    return DensityOperator(space, CMatrix::Identity(n, n) / static_cast<double>(n));
}

double DensityOperator::purity() const { return (matrix_ * matrix_).trace().real(); }

Eigen::VectorXd DensityOperator::eigenvalues() const {
    const CMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

Projector::Projector(CompositeSpace targets, CMatrix matrix)
    : targets_(std::move(targets)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(targets_.dimension());
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw std::invalid_argument("projector shape does not match " + targets_.describe());
    }
    if (hermitian_defect(matrix_) > tol::kNorm) {
        throw std::invalid_argument("projector is not Hermitian");
    }
    if ((matrix_ * matrix_ - matrix_).cwiseAbs().maxCoeff() > tol::kNorm) {
        throw std::invalid_argument("projector is not idempotent");
    }
}

Projector Projector::onto(const CompositeSpace &targets, const CVector &vector) {
    const double n = vector.norm();
    if (n == 0.0) {
        throw std::invalid_argument("cannot project onto the zero vector");
    }
    const CVector v = vector / n;
    return Projector(targets, v * v.adjoint());
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CVector kron(const CVector &a, const CVector &b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

bool is_unitary(const CMatrix &u, double tolerance) {
    if (u.rows() != u.cols()) {
        return false;
    }
    const CMatrix defect = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return defect.cwiseAbs().maxCoeff() <= tolerance;
}

Ket tensor(std::span<const Ket> factors) {
    if (factors.empty()) {
        throw std::invalid_argument("tensor needs at least one factor");
    }
    CompositeSpace space = factors.front().space();
    CVector amplitudes = factors.front().amplitudes();
    for (const auto &f : factors.subspan(1)) {
        space = space.concat(f.space());
        amplitudes = kron(amplitudes, f.amplitudes());
    }
    return Ket(std::move(space), std::move(amplitudes));
}

Ket tensor(const Ket &a, const Ket &b) {
    const Ket both[] = {a, b};
    return tensor(both);
}

Ket reorder(const Ket &state, std::span<const SubsystemLabel> order) {
    const CompositeSpace target = labels_space(order);
    if (target.factor_count() != state.space().factor_count()) {
        throw std::invalid_argument("reorder needs a permutation of " + state.space().describe());
    }
    return Ket(target, permute(state.amplitudes(), index_map(state.space(), target)));
}

DensityOperator reorder(const DensityOperator &state, std::span<const SubsystemLabel> order) {
    const CompositeSpace target = labels_space(order);
    if (target.factor_count() != state.space().factor_count()) {
        throw std::invalid_argument("reorder needs a permutation of " + state.space().describe());
    }
    return DensityOperator(target, permute(state.matrix(), index_map(state.space(), target)));
}

DensityOperator partial_trace(const DensityOperator &rho, std::span<const SubsystemLabel> keep) {
    const CompositeSpace arranged = front_loaded(rho.space(), keep);
    const CMatrix m = permute(rho.matrix(), index_map(rho.space(), arranged));
    const CompositeSpace kept = labels_space(keep);
    const auto dk = static_cast<Eigen::Index>(kept.dimension());
    const auto dr = m.rows() / dk;
    CMatrix out = CMatrix::Zero(dk, dk);
    for (Eigen::Index i = 0; i < dk; ++i) {
        for (Eigen::Index j = 0; j < dk; ++j) {
            Complex sum = 0.0;
            for (Eigen::Index r = 0; r < dr; ++r) {
                sum += m(i * dr + r, j * dr + r);
            }
            out(i, j) = sum;
        }
    }
    return DensityOperator(kept, std::move(out));
}

namespace {

/// Full-space operator `op (x) I` with `op` acting on `targets`, in the original basis order.
CMatrix embed(const CompositeSpace &space, const CMatrix &op,
              std::span<const SubsystemLabel> targets) {
    const CompositeSpace arranged = front_loaded(space, targets);
    const auto dt = static_cast<Eigen::Index>(labels_space(targets).dimension());
    if (op.rows() != dt || op.cols() != dt) {
        throw std::invalid_argument("operator dimension " + std::to_string(op.rows()) +
                                    " does not match targets of dimension " +
                                    std::to_string(dt));
    }
    const auto dr = static_cast<Eigen::Index>(space.dimension()) / dt;
    const CMatrix full = kron(op, CMatrix::Identity(dr, dr));
    return unpermute(full, index_map(space, arranged));
}

}  // namespace

Ket apply_unitary(const Ket &state, const CMatrix &unitary,
                  std::span<const SubsystemLabel> targets) {
    if (!is_unitary(unitary)) {
        throw std::invalid_argument("apply_unitary: operator is not unitary");
    }
    return Ket(state.space(), embed(state.space(), unitary, targets) * state.amplitudes());
}

DensityOperator apply_unitary(const DensityOperator &state, const CMatrix &unitary,
                              std::span<const SubsystemLabel> targets) {
    if (!is_unitary(unitary)) {
        throw std::invalid_argument("apply_unitary: operator is not unitary");
    }
    const CMatrix u = embed(state.space(), unitary, targets);
    CMatrix rho = u * state.matrix() * u.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(state.space(), std::move(rho));
}

ProjectionOutcome<Ket> project(const Ket &state, const Projector &projector) {
    const auto &labels = projector.targets().labels();
    const CMatrix p = embed(state.space(), projector.matrix(), labels);
    const CVector v = p * state.amplitudes();
    const double prob = v.squaredNorm() / state.amplitudes().squaredNorm();
    if (prob < tol::kNullProbability) {
        return {std::nullopt, 0.0};
    }
    return {Ket(state.space(), v / v.norm()), prob};
}

ProjectionOutcome<DensityOperator> project(const DensityOperator &state,
                                           const Projector &projector) {
    const auto &labels = projector.targets().labels();
    const CMatrix p = embed(state.space(), projector.matrix(), labels);
    CMatrix rho = p * state.matrix() * p;
    const double prob = rho.trace().real();
    if (prob < tol::kNullProbability) {
        return {std::nullopt, 0.0};
    }
    rho /= prob;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return {DensityOperator(state.space(), std::move(rho)), prob};
}

ProjectionOutcome<Ket> condition_on(const Ket &state, const Ket &outcome) {
    const auto &labels = outcome.space().labels();
    const CompositeSpace arranged = front_loaded(state.space(), labels);
    const CVector v = permute(state.amplitudes(), index_map(state.space(), arranged));
    const CVector o = outcome.amplitudes() / outcome.norm();
    const auto d_out = o.size();
    const auto d_rest = v.size() / d_out;
    CVector rest = CVector::Zero(d_rest);
    for (Eigen::Index k = 0; k < d_out; ++k) {
        rest += std::conj(o(k)) * v.segment(k * d_rest, d_rest);
    }
    const double prob = rest.squaredNorm() / v.squaredNorm();
    if (prob < tol::kNullProbability) {
        return {std::nullopt, 0.0};
    }
    return {Ket(state.space().without(labels), rest / rest.norm()), prob};
}

DensityOperator werner_mix(const DensityOperator &rho, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("werner_mix: weight must lie in [0, 1]");
    }
    const auto n = rho.matrix().rows();
    CMatrix m = p * rho.matrix() + (1.0 - p) * CMatrix::Identity(n, n) / static_cast<double>(n);
    return DensityOperator(rho.space(), std::move(m));
}

SchmidtDecomposition schmidt_decompose(const Ket &state, std::span<const SubsystemLabel> left) {
    const CompositeSpace arranged = front_loaded(state.space(), left);
    const CVector v =
        permute(state.amplitudes(), index_map(state.space(), arranged)) / state.norm();
    const CompositeSpace left_space = labels_space(left);
    const CompositeSpace right_space = state.space().without(left);
    const auto dl = static_cast<Eigen::Index>(left_space.dimension());
    const auto dr = static_cast<Eigen::Index>(right_space.dimension());

    CMatrix m(dl, dr);
    for (Eigen::Index i = 0; i < dl; ++i) {
        for (Eigen::Index j = 0; j < dr; ++j) {
            m(i, j) = v(i * dr + j);
        }
    }
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SchmidtDecomposition out;
    const auto &s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) <= 1e-12) {
            break;
        }
        out.coefficients.push_back(s(k));
        out.left_modes.emplace_back(left_space, svd.matrixU().col(k));
        out.right_modes.emplace_back(right_space, svd.matrixV().col(k).conjugate());
    }
    return out;
}

double overlap_probability(const Ket &a, const Ket &b) {
    if (!(a.space() == b.space())) {
        throw std::invalid_argument("overlap of kets on different spaces");
    }
    return std::norm(a.amplitudes().dot(b.amplitudes())) /
           (a.amplitudes().squaredNorm() * b.amplitudes().squaredNorm());
}

}  // namespace hybrident
