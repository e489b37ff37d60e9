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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hybrident/elements.hpp"
#include "hybrident/measures.hpp"
#include "hybrident/protocol.hpp"
#include "support.hpp"

using namespace hybrident;
using namespace hybrident::testing;

namespace {

const SubsystemLabel SP = signal_polarization();
const SubsystemLabel IP = idler_polarization();
const CompositeSpace kTwoQubit{SP, IP};

Ket bell() {
    CVector v = CVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return Ket(kTwoQubit, v);
}

CMatrix local(std::mt19937_64 &rng) { return kron(random_unitary(rng, 2), random_unitary(rng, 2)); }

}  // namespace

TEST_CASE("fidelity") {
    const Ket b = bell();
    CHECK(fidelity(DensityOperator::from_ket(b), b) == doctest::Approx(1.0));
    CHECK(fidelity(DensityOperator::maximally_mixed(kTwoQubit), b) == doctest::Approx(0.25));
    CHECK(fidelity(werner_mix(DensityOperator::from_ket(b), 0.9), b) ==
          doctest::Approx(0.925).epsilon(1e-12));
    CHECK_THROWS_AS(fidelity(DensityOperator::from_ket(b), Ket::basis(CompositeSpace{SP}, 0)),
                    std::invalid_argument);
}

TEST_CASE("property: fidelity is linear in the state") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r1 = random_density(rng, kTwoQubit);
        const auto r2 = random_density(rng, kTwoQubit);
        const Ket psi = random_ket(rng, kTwoQubit);
        const double p = std::uniform_real_distribution<double>(0, 1)(rng);
        const DensityOperator mix(kTwoQubit, p * r1.matrix() + (1 - p) * r2.matrix());
        CHECK(std::abs(fidelity(mix, psi) - (p * fidelity(r1, psi) + (1 - p) * fidelity(r2, psi))) < 1e-12);
    }
}

TEST_CASE("concurrence examples") {
    CHECK(concurrence(DensityOperator::from_ket(bell())) == doctest::Approx(1.0).epsilon(1e-12));
    CVector v = CVector::Zero(4);
    v(0) = 0.89;
    v(3) = 0.46;
    const Ket unnormalized(kTwoQubit, v);
    const Ket k = unnormalized.normalized();
    const double a = 0.89 / std::hypot(0.89, 0.46);
    const double b = 0.46 / std::hypot(0.89, 0.46);
    CHECK(concurrence(k) == doctest::Approx(2 * a * b).epsilon(1e-14));
    CHECK(concurrence(DensityOperator::from_ket(k)) == doctest::Approx(2 * a * b).epsilon(1e-12));
    CHECK(concurrence(Ket::basis(kTwoQubit, 1)) == 0.0);
    CHECK_THROWS_AS(concurrence(CMatrix::Identity(2, 2)), std::invalid_argument);
    CMatrix bad = CMatrix::Zero(4, 4);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(concurrence(bad), std::invalid_argument);
}

TEST_CASE("concurrence of Werner states") {
    const auto b = DensityOperator::from_ket(bell());
    for (int k = 0; k <= 20; ++k) {
        const double p = k / 20.0;
        CHECK(std::abs(concurrence(werner_mix(b, p)) - std::max(0.0, (3 * p - 1) / 2)) < 1e-8);
    }
    CHECK(concurrence(werner_mix(b, 1.0 / 3.0)) < 1e-8);
}

TEST_CASE("property: pure-state concurrence equals twice the Schmidt product") {
    std::mt19937_64 rng(42);
    const SubsystemLabel left[] = {SP};
    for (int trial = 0; trial < 50; ++trial) {
        const Ket psi = random_ket(rng, kTwoQubit);
        const auto sd = schmidt_decompose(psi, left);
        const double expected = sd.rank() == 2 ? 2 * sd.coefficients[0] * sd.coefficients[1] : 0.0;
        CHECK(std::abs(concurrence(DensityOperator::from_ket(psi)) - expected) < 1e-10);
        CHECK(std::abs(concurrence(psi) - expected) < 1e-10);
    }
}

TEST_CASE("property: concurrence and negativity are local-unitary invariant") {
    std::mt19937_64 rng(43);
    const SubsystemLabel party[] = {SP};
    for (int trial = 0; trial < 50; ++trial) {
        const auto rho = random_density(rng, kTwoQubit, 1 + trial % 4);
        const CMatrix u = local(rng);
        const DensityOperator moved(kTwoQubit, u * rho.matrix() * u.adjoint());
        CHECK(std::abs(concurrence(rho) - concurrence(moved)) < 1e-8);
        CHECK(std::abs(negativity(rho, party) - negativity(moved, party)) < 1e-8);
    }
}

TEST_CASE("negativity") {
    const SubsystemLabel party[] = {SP};
    CHECK(negativity(DensityOperator::from_ket(bell()), party) == doctest::Approx(0.5));
    CHECK(negativity(DensityOperator::from_ket(Ket::basis(kTwoQubit, 2)), party) < 1e-15);

    const double a = 0.89 / std::hypot(0.89, 0.46);
    const double b = 0.46 / std::hypot(0.89, 0.46);
    for (std::size_t D : {2u, 4u, 8u}) {
        const Ket hes = qudit_hes(D, a, b, 1);
        const SubsystemLabel signal[] = {signal_spatial(D)};
        const SubsystemLabel idler[] = {idler_polarization()};
        CHECK(std::abs(negativity(DensityOperator::from_ket(hes), signal) - a * b) < 1e-8);
        CHECK(std::abs(negativity(DensityOperator::from_ket(hes), idler) - a * b) < 1e-8);
    }
}

TEST_CASE("visibility") {
    CHECK(visibility({1.0, 0.0, 0, 0}) == 1.0);
    CHECK(visibility({1.0, 1.0, 0, 0}) == 0.0);
    CHECK(visibility({3.0, 1.0, 0, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(visibility({0.0, 0.0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(visibility({1.0, 2.0, 0, 0}), std::invalid_argument);
}

TEST_CASE("pattern summaries from far-field curves") {
    const OpticsGeometry g;
    const CompositeSpace s{signal_spatial(2)};
    const auto xs = linspace_positions(3e-3, 3001);
    const auto envelope = intensity_curve(Ket(s, spatial::slit(0)), g, xs);
    const auto f_curve = intensity_curve(Ket(s, spatial::F()), g, xs);
    const auto mixed = intensity_curve(DensityOperator::maximally_mixed(s), g, xs);

    const auto pf = summarize_pattern(xs, f_curve, envelope);
    CHECK(visibility(pf) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(pf.x_max) < 1e-5);
    const auto pm = summarize_pattern(xs, mixed, envelope);
    CHECK(visibility(pm) < 1e-10);

    const auto raw = summarize_pattern(xs, f_curve);
    CHECK(raw.x_max == doctest::Approx(0.0));
    CHECK_THROWS_AS(summarize_pattern(xs, std::vector<double>(3, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(summarize_pattern(xs, f_curve, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("count-based estimators") {
    CHECK(concurrence_from_conditional_counts({500, 500}) == 1.0);
    CHECK(concurrence_from_conditional_counts({500, 0}) == 0.0);
    CHECK(concurrence_from_conditional_counts({792, 212}) ==
          doctest::Approx(2 * std::sqrt(792.0 * 212.0) / 1004.0));
    CHECK_THROWS_AS(concurrence_from_conditional_counts({0, 0}), std::invalid_argument);

    CHECK(concurrence_from_marginal_visibility(0.0) == 1.0);
    CHECK(concurrence_from_marginal_visibility(1.0) == 0.0);
    CHECK(concurrence_from_marginal_visibility(0.6) == doctest::Approx(0.8));
    CHECK_THROWS_AS(concurrence_from_marginal_visibility(1.5), std::invalid_argument);
}
