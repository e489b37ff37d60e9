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

#ifndef HYBRIDENT_TESTS_SUPPORT_HPP
#define HYBRIDENT_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>

#include "hybrident/qstate.hpp"

namespace hybrident::testing {

inline CVector random_vector(std::mt19937_64 &rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = Complex(g(rng), g(rng));
    }
    return v / v.norm();
}

inline Ket random_ket(std::mt19937_64 &rng, const CompositeSpace &space) {
    return Ket(space, random_vector(rng, static_cast<Eigen::Index>(space.dimension())));
}

/// Random mixed state of the given rank.
inline DensityOperator random_density(std::mt19937_64 &rng, const CompositeSpace &space,
                                      int rank = -1) {
    const auto d = static_cast<Eigen::Index>(space.dimension());
    const Eigen::Index r = rank < 0 ? d : rank;
    CMatrix b(d, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        b.col(k) = random_vector(rng, d);
    }
    CMatrix m = b * b.adjoint();
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityOperator(space, m / m.trace().real());
}

inline CMatrix random_unitary(std::mt19937_64 &rng, Eigen::Index n) {
    CMatrix z(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        z.col(k) = random_vector(rng, n);
    }
    Eigen::HouseholderQR<CMatrix> qr(z);
    return qr.householderQ() * CMatrix::Identity(n, n);
}

inline double max_abs_diff(const CMatrix &a, const CMatrix &b) { return (a - b).cwiseAbs().maxCoeff(); }

/// |<a|b>| ignoring global phase.
inline double ket_overlap(const CVector &a, const CVector &b) {
    return std::abs(a.normalized().dot(b.normalized()));
}

}  // namespace hybrident::testing

#endif  // HYBRIDENT_TESTS_SUPPORT_HPP
