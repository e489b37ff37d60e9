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

#include "hybrident/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybrident {

double fidelity(const DensityOperator &rho, const Ket &target) {
    if (!(rho.space() == target.space())) {
        throw std::invalid_argument("fidelity: state on " + rho.space().describe() +
                                    " but target on " + target.space().describe());
    }
    const CVector psi = target.amplitudes() / target.norm();
    const Complex f = psi.dot(rho.matrix() * psi);
    return f.real();
}

double concurrence(const CMatrix &rho) {
    if (rho.rows() != 4 || rho.cols() != 4) {
        throw std::invalid_argument("concurrence is defined for two-qubit (4x4) states");
    }
    const CMatrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.eigenvalues().minCoeff() < -1e-6) {
        throw std::invalid_argument("concurrence: state is not physical");
    }
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const CMatrix sqrt_rho =
        es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();

    CMatrix yy = CMatrix::Zero(4, 4);
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    // The lambda_i are the singular values of sqrt(rho) (Y (x) Y) sqrt(rho)^*.
    const CMatrix m = sqrt_rho * yy * sqrt_rho.conjugate();
    Eigen::JacobiSVD<CMatrix> svd(m);
    const Eigen::VectorXd &lambda = svd.singularValues();
    return std::max(0.0, lambda(0) - lambda(1) - lambda(2) - lambda(3));
}

double concurrence(const DensityOperator &rho) { return concurrence(rho.matrix()); }

double concurrence(const Ket &state) {
    if (state.space().dimension() != 4) {
        throw std::invalid_argument("concurrence is defined for two-qubit (4x4) states");
    }
    const CVector psi = state.amplitudes() / state.norm();
    return 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
}

double negativity(const DensityOperator &rho, std::span<const SubsystemLabel> party_a) {
    std::vector<SubsystemLabel> order(party_a.begin(), party_a.end());
    const CompositeSpace rest = rho.space().without(party_a);
    order.insert(order.end(), rest.labels().begin(), rest.labels().end());
    const DensityOperator arranged = reorder(rho, order);

    const auto da = static_cast<Eigen::Index>(
        CompositeSpace(std::vector<SubsystemLabel>(party_a.begin(), party_a.end())).dimension());
    const auto db = static_cast<Eigen::Index>(rest.dimension());
    const CMatrix &m = arranged.matrix();
    CMatrix pt(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            for (Eigen::Index k = 0; k < db; ++k) {
                for (Eigen::Index l = 0; l < db; ++l) {
                    pt(i * db + k, j * db + l) = m(j * db + k, i * db + l);
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pt, Eigen::EigenvaluesOnly);
    double negative = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        negative += std::max(0.0, -es.eigenvalues()(k));
    }
    return negative;
}

double purity(const DensityOperator &rho) { return rho.purity(); }

double visibility(const PatternSummary &pattern) {
    if (pattern.i_max < pattern.i_min || pattern.i_min < 0.0) {
        throw std::invalid_argument("pattern summary needs I_max >= I_min >= 0");
    }
    if (!(pattern.i_max > 0.0)) {
        throw std::invalid_argument("visibility of an all-zero pattern is undefined");
    }
    return (pattern.i_max - pattern.i_min) / (pattern.i_max + pattern.i_min);
}

PatternSummary summarize_pattern(const std::vector<double> &positions,
                                 const std::vector<double> &values,
                                 const std::optional<std::vector<double>> &envelope) {
    if (positions.size() != values.size() || positions.empty()) {
        throw std::invalid_argument("summarize_pattern: positions and values must match");
    }
    if (envelope && envelope->size() != values.size()) {
        throw std::invalid_argument("summarize_pattern: envelope sampling mismatch");
    }
    const double envelope_peak =
        envelope ? *std::max_element(envelope->begin(), envelope->end()) : 0.0;
    PatternSummary out;
    bool first = true;
    for (std::size_t k = 0; k < values.size(); ++k) {
        double v = values[k];
        if (envelope) {
            if ((*envelope)[k] < 0.5 * envelope_peak) {
                continue;
            }
            v /= (*envelope)[k];
        }
        if (first || v > out.i_max) {
            out.i_max = v;
            out.x_max = positions[k];
        }
        if (first || v < out.i_min) {
            out.i_min = v;
            out.x_min = positions[k];
        }
        first = false;
    }
    if (first) {
        throw std::invalid_argument("summarize_pattern: no samples inside the central lobe");
    }
    return out;
}

double concurrence_from_conditional_counts(const ConditionalCounts &counts) {
    const double total = static_cast<double>(counts.on_f) + static_cast<double>(counts.on_a);
    if (total == 0.0) {
        throw std::invalid_argument("conditional counts are all zero");
    }
    return 2.0 * std::sqrt(static_cast<double>(counts.on_f) * static_cast<double>(counts.on_a)) /
           total;
}

double concurrence_from_marginal_visibility(double marginal_visibility) {
    if (marginal_visibility < 0.0 || marginal_visibility > 1.0 + 1e-12) {
        throw std::invalid_argument("visibility must lie in [0, 1]");
    }
    return std::sqrt(std::max(0.0, 1.0 - marginal_visibility * marginal_visibility));
}

}  // namespace hybrident
