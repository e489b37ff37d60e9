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

#include <numbers>

#include "hybrident/measures.hpp"
#include "hybrident/protocol.hpp"
#include "support.hpp"

using namespace hybrident;
using namespace hybrident::testing;
using std::numbers::pi;

namespace {

const Complex I1(0, 1);
const double kSqrtHalf = 1.0 / std::sqrt(2.0);

/**
 * Independent amplitude-level model of the hyperentangled pipeline.
 *
 * Index order (sp, ip, ss, is), all qubits, spatial factors in the slit
 * basis. The CNOT multiplies the V branch of sp by i and the slit-1
 * component of ss by -1. Returns amplitudes on (ss, ip) and the overall
 * success probability.
 */
std::pair<CVector, double> pipeline_oracle(Complex a, Complex b, Complex c, Complex d,
                                           const CVector &erasure, const CVector &filter) {
    const double f[2] = {kSqrtHalf, kSqrtHalf};
    const double aa[2] = {kSqrtHalf, -kSqrtHalf};
    Complex psi[2][2][2][2] = {};
    for (int ss = 0; ss < 2; ++ss) {
        for (int is = 0; is < 2; ++is) {
            const Complex spatial = c * f[ss] * f[is] + d * aa[ss] * aa[is];
            psi[0][0][ss][is] = a * spatial;
            psi[1][1][ss][is] = b * spatial;
        }
    }
    for (int ip = 0; ip < 2; ++ip) {
        for (int ss = 0; ss < 2; ++ss) {
            for (int is = 0; is < 2; ++is) {
                psi[1][ip][ss][is] *= I1 * (ss == 0 ? 1.0 : -1.0);
            }
        }
    }
    CVector out = CVector::Zero(4);
    for (int ss = 0; ss < 2; ++ss) {
        for (int ip = 0; ip < 2; ++ip) {
            for (int sp = 0; sp < 2; ++sp) {
                for (int is = 0; is < 2; ++is) {
                    out(2 * ss + ip) +=
                        std::conj(erasure(sp)) * std::conj(filter(is)) * psi[sp][ip][ss][is];
                }
            }
        }
    }
    const double p = out.squaredNorm() / (erasure.squaredNorm() * filter.squaredNorm());
    return {out, p};
}

Ket bell_hes(Complex phase = 1.0) {
    const CVector v = (kron(spatial::F(), pol::H()) + phase * kron(spatial::A(), pol::V())) * kSqrtHalf;
    return Ket(CompositeSpace{signal_spatial(2), idler_polarization()}, v);
}

double deg(double d) { return d * pi / 180.0; }

}  // namespace

TEST_CASE("source params") {
    const auto p = SourceParams::from_magnitudes(0.89, 0.46, 0.37 * pi, 1.0, 1.0, 0.0);
    CHECK(std::norm(p.a) + std::norm(p.b) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p.b) / std::abs(p.a) == doctest::Approx(0.46 / 0.89));
    CHECK(std::arg(p.b) == doctest::Approx(0.37 * pi));
    CHECK(std::abs(p.c) == doctest::Approx(kSqrtHalf));
    CHECK_NOTHROW(p.validate());

    SourceParams bad;
    bad.a = 0.89;
    bad.b = 0.46;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(SourceParams::from_magnitudes(0, 0, 0, 1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(SourceParams::from_magnitudes(-1, 0, 0, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("generic initial state") {
    const Ket k = generic_initial(1.0, 0.0);
    CHECK((k.amplitudes() - Ket::basis(k.space(), 0).amplitudes()).norm() < 1e-15);
    CHECK_THROWS_AS(generic_initial(0.89, 0.46), std::invalid_argument);

    const double n = std::hypot(0.89, 0.46);
    const Ket partial = generic_initial(0.89 / n, 0.46 / n);
    const SubsystemLabel dof1[] = {signal_polarization(), idler_polarization()};
    const auto rho1 = partial_trace(DensityOperator::from_ket(partial), dof1);
    CHECK(concurrence(rho1) == doctest::Approx(2.0 * 0.89 * 0.46 / (n * n)).epsilon(1e-12));
    const SubsystemLabel dof2[] = {signal_spatial(2)};
    CHECK(partial_trace(DensityOperator::from_ket(partial), dof2).purity() ==
          doctest::Approx(1.0));
}

TEST_CASE("hyper source layout") {
    SourceParams p;
    p.c = 1.0;
    p.d = 0.0;
    const Ket k = hyper_source(p);
    CHECK(k.space() == CompositeSpace{signal_polarization(), idler_polarization(), signal_spatial(2),
                                      idler_spatial(2)});
    const CVector expected =
        kron(CVector(kSqrtHalf * (kron(pol::H(), pol::H()) + kron(pol::V(), pol::V()))),
             kron(spatial::F(), spatial::F()));
    CHECK((k.amplitudes() - expected).norm() < 1e-15);

    const Ket full = hyper_source(SourceParams{});
    const SubsystemLabel keep_spatial[] = {signal_spatial(2), idler_spatial(2)};
    const auto spatial_rho = partial_trace(DensityOperator::from_ket(full), keep_spatial);
    CHECK(concurrence(spatial_rho) == doctest::Approx(1.0));
}

TEST_CASE("bell pipeline matches the oracle and target") {
    const auto result =
        run_irreversible(hyper_source(SourceParams{}), EraserSpec::irreversible(pol::L(), 0), sptq_cnot(2));
    REQUIRE_FALSE(result.is_null());
    const auto [oracle, p] = pipeline_oracle(kSqrtHalf, kSqrtHalf, kSqrtHalf, kSqrtHalf, pol::L(), spatial::F());
    CHECK(ket_overlap(result.final_state->amplitudes(), oracle) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.success_probability == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fidelity(DensityOperator::from_ket(*result.final_state), bell_hes()) ==
          doctest::Approx(1.0).epsilon(1e-10));

    REQUIRE(result.stages.size() == 4);
    CHECK(result.stages[0].name == "source");
    CHECK(result.stages[1].name == "post_cnot");
    CHECK(result.stages[2].name == "post_filter");
    CHECK(result.stages[3].name == "post_erasure");
    CHECK(result.stages[2].probability == doctest::Approx(0.5));
    CHECK(result.stages[3].probability == doctest::Approx(0.5));
    double product = 1.0;
    for (const auto &s : result.stages) {
        product *= s.probability;
    }
    CHECK(product == result.success_probability);
    CHECK(*result.normalization == doctest::Approx(kSqrtHalf));
}

TEST_CASE("partial state phase propagation") {
    const auto params = SourceParams::from_magnitudes(0.89, 0.46, 0.37 * pi, 1.0, 1.0, 0.0);
    const auto result =
        run_irreversible(hyper_source(params), EraserSpec::irreversible(pol::linear(deg(45))), sptq_cnot(2));
    REQUIRE_FALSE(result.is_null());
    const auto comps = hes_components(*result.final_state);
    CHECK(comps.relative_phase() == doctest::Approx(0.87 * pi).epsilon(1e-12));
    CHECK(std::abs(comps.av) / std::abs(comps.fh) == doctest::Approx(0.46 / 0.89).epsilon(1e-12));
    CHECK(comps.fh.imag() == doctest::Approx(0.0));
}

TEST_CASE("property: pipeline agrees with the amplitude oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const CVector ab = random_vector(rng, 2);
        const CVector cd = random_vector(rng, 2);
        const CVector erasure = random_vector(rng, 2);
        const std::size_t filter = trial % 2;
        SourceParams p{ab(0), ab(1), cd(0), cd(1)};
        const auto result =
            run_irreversible(hyper_source(p), EraserSpec::irreversible(erasure, filter), sptq_cnot(2));
        REQUIRE_FALSE(result.is_null());
        const auto [oracle, prob] = pipeline_oracle(ab(0), ab(1), cd(0), cd(1), erasure,
                                                    filter == 0 ? spatial::F() : spatial::A());
        CHECK(ket_overlap(result.final_state->amplitudes(), oracle) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(result.success_probability == doctest::Approx(prob).epsilon(1e-12));
        const Complex first = result.final_state->amplitudes()(0);
        CHECK(std::abs(first.imag()) < 1e-15);
    }
}

TEST_CASE("erasure onto H keeps which-state information") {
    const auto result =
        run_irreversible(hyper_source(SourceParams{}), EraserSpec::irreversible(pol::H()), sptq_cnot(2));
    REQUIRE_FALSE(result.is_null());
    CHECK(concurrence(*result.final_state) < 1e-12);
    CHECK(overlap_probability(
              *result.final_state,
              Ket(result.final_state->space(), kron(spatial::F(), pol::H()))) == doctest::Approx(1.0));
}

TEST_CASE("null projections are flagged") {
    SourceParams hh;
    hh.a = 1.0;
    hh.b = 0.0;
    const auto erased =
        run_irreversible(hyper_source(hh), EraserSpec::irreversible(pol::V()), sptq_cnot(2));
    CHECK(erased.is_null());
    CHECK(erased.null_stage == "post_erasure");

    SourceParams ff;
    ff.c = 1.0;
    ff.d = 0.0;
    const auto filtered =
        run_irreversible(hyper_source(ff), EraserSpec::irreversible(pol::L(), 1), sptq_cnot(2));
    CHECK(filtered.is_null());
    CHECK(filtered.null_stage == "post_filter");
}

TEST_CASE("eraser spec validation") {
    EraserSpec s;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    EraserSpec r = EraserSpec::reversible();
    r.erasure_state = pol::H();
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    CHECK_THROWS_AS(run_irreversible(hyper_source(SourceParams{}), EraserSpec::reversible(), sptq_cnot(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_reversible(hyper_source(SourceParams{})), std::invalid_argument);
    const Ket wrong_target = apply_unitary(generic_initial(kSqrtHalf, kSqrtHalf),
                                           permutation_cnot(),
                                           std::vector<SubsystemLabel>{signal_polarization(), signal_spatial(2)});
    CHECK_THROWS_AS(run_reversible(wrong_target), std::invalid_argument);
}

TEST_CASE("reversible eraser") {
    const auto bell = run_reversible(generic_initial(kSqrtHalf, kSqrtHalf));
    REQUIRE_FALSE(bell.is_null());
    CHECK(bell.success_probability == 1.0);
    CHECK(concurrence(*bell.final_state) == doctest::Approx(1.0).epsilon(1e-12));

    const auto product = run_reversible(generic_initial(1.0, 0.0));
    CHECK(concurrence(*product.final_state) < 1e-12);
    CHECK(product.success_probability == 1.0);
}

TEST_CASE("property: reversible output equals irreversible output with diagonal erasure") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        const CVector ab = random_vector(rng, 2);
        const Ket source = generic_initial(ab(0), ab(1));
        const auto rev = run_reversible(source);
        const auto irr = run_irreversible(source, EraserSpec::irreversible(pol::D()), permutation_cnot());
        REQUIRE_FALSE(irr.is_null());
        CHECK(ket_overlap(rev.final_state->amplitudes(), irr.final_state->amplitudes()) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(irr.success_probability == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(concurrence(*rev.final_state) ==
              doctest::Approx(2.0 * std::abs(ab(0) * ab(1))).epsilon(1e-10));
    }
}

TEST_CASE("property: the cnot dilutes polarization entanglement") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const CVector ab = random_vector(rng, 2);
        const auto rev = run_reversible(generic_initial(ab(0), ab(1)));
        const auto rho = DensityOperator::from_ket(rev.stages[1].state);
        const SubsystemLabel dof1[] = {signal_polarization(), idler_polarization()};
        const SubsystemLabel mixed[] = {signal_spatial(2), idler_polarization()};
        CHECK(concurrence(partial_trace(rho, dof1)) < 1e-10);
        CHECK(concurrence(partial_trace(rho, mixed)) < 1e-10);
    }
    const auto ghz = run_reversible(generic_initial(kSqrtHalf, kSqrtHalf)).stages[1].state;
    CVector expected = CVector::Zero(8);
    expected(0) = expected(7) = kSqrtHalf;
    CHECK(ket_overlap(ghz.amplitudes(), expected) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("concentration") {
    CHECK(concentration_angle(0.46) == doctest::Approx(std::acos(0.46)));
    CHECK(concentration_angle(kSqrtHalf) == doctest::Approx(pi / 4));
    CHECK_THROWS_AS(concentration_angle(0.0), std::invalid_argument);
    CHECK_THROWS_AS(concentration_angle(1.0), std::invalid_argument);
    CHECK((concentration_projector(0.46).matrix() -
           concentration_state(0.46) * concentration_state(0.46).adjoint())
              .norm() < 1e-15);

    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        const CVector ab = random_vector(rng, 2);
        SourceParams p{ab(0), ab(1)};
        const auto result = run_irreversible(hyper_source(p),
                                             EraserSpec::irreversible(concentration_state(ab(1))), sptq_cnot(2));
        REQUIRE_FALSE(result.is_null());
        CHECK(concurrence(*result.final_state) == doctest::Approx(1.0).epsilon(1e-10));
        const double cost = 2.0 * std::norm(ab(0)) * std::norm(ab(1));
        CHECK(result.stages.back().probability == doctest::Approx(cost).epsilon(1e-12));
        CHECK(*result.normalization * *result.normalization == doctest::Approx(cost).epsilon(1e-12));
        CHECK(cost <= 0.5 + 1e-15);
    }
}

TEST_CASE("qudit hybrid states") {
    CHECK(ket_overlap(qudit_hes(2, kSqrtHalf, kSqrtHalf, 0).amplitudes(), bell_hes().amplitudes()) ==
          doctest::Approx(1.0).epsilon(1e-12));

    for (std::size_t D : {4u, 8u}) {
        for (std::size_t j = 0; j < D; ++j) {
            const Ket hes = qudit_hes(D, kSqrtHalf, kSqrtHalf, j);
            CHECK(ket_overlap(hes.amplitudes(), hes_target(D, kSqrtHalf, kSqrtHalf, j).amplitudes()) ==
                  doctest::Approx(1.0).epsilon(1e-12));
            const SubsystemLabel signal[] = {signal_spatial(D)};
            CHECK(negativity(DensityOperator::from_ket(hes), signal) == doctest::Approx(0.5).epsilon(1e-10));
        }
        const Ket product = qudit_hes(D, 1.0, 0.0, 1);
        const SubsystemLabel signal[] = {signal_spatial(D)};
        CHECK(negativity(DensityOperator::from_ket(product), signal) < 1e-12);
        const SubsystemLabel left[] = {signal_spatial(D)};
        CHECK(schmidt_decompose(qudit_hes(D, kSqrtHalf, kSqrtHalf, 0), left).rank() == 2);
    }
    CHECK_THROWS_AS(qudit_hes(4, kSqrtHalf, kSqrtHalf, 4), std::invalid_argument);
    CHECK_THROWS_AS(qudit_hes(6, kSqrtHalf, kSqrtHalf, 0), std::invalid_argument);
    CHECK_THROWS_AS(hes_target(3, kSqrtHalf, kSqrtHalf, 0), std::invalid_argument);
}

TEST_CASE("hes components") {
    const auto c = hes_components(bell_hes(std::polar(1.0, -0.5 * pi)));
    CHECK(c.relative_phase() == doctest::Approx(1.5 * pi));
    CHECK_THROWS_AS(hes_components(Ket::basis(CompositeSpace{signal_spatial(2)}, 0)), std::invalid_argument);
}
