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

#include <algorithm>
#include <map>
#include <set>

#include "hybrident/measures.hpp"
#include "hybrident/tomography.hpp"
#include "support.hpp"

using namespace hybrident;
using namespace hybrident::testing;

namespace {

const SubsystemLabel SS = signal_spatial(2);
const SubsystemLabel IP = idler_polarization();

Ket bell_hes() {
    const CVector v = (kron(spatial::F(), pol::H()) + kron(spatial::A(), pol::V())) / std::sqrt(2.0);
    return Ket(CompositeSpace{SS, IP}, v);
}

std::vector<double> expected_probabilities(const DensityOperator &rho, const ProjectorSet &set) {
    std::vector<double> p;
    for (const auto &np : set.projectors) {
        p.push_back(born_probability(rho, np.projector));
    }
    return p;
}

/// Expected probability of each projector is rate * p, so counts/row ~ rate / 2 for the busiest rows.
CountsTable simulate(const DensityOperator &rho, const ProjectorSet &set, double rate, std::uint64_t seed) {
    return tomography_counts(rho, set.projectors, {1.0, rate, 0.0, seed});
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
}

}  // namespace

TEST_CASE("overcomplete projector set") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    CHECK(set.size() == 36);
    CHECK(set.complete);
    CHECK(set.space == CompositeSpace{SS, IP});
    std::set<std::string> ids;
    std::map<std::string, CMatrix> sums;
    for (const auto &np : set.projectors) {
        ids.insert(np.id);
        const CMatrix &p = np.projector.matrix();
        CHECK(std::abs(p.trace() - 1.0) < 1e-12);
        CHECK(max_abs_diff(p * p, p) < 1e-12);
        auto [it, inserted] = sums.try_emplace(np.context, CMatrix::Zero(4, 4));
        it->second += p;
    }
    CHECK(ids.size() == 36);
    CHECK(sums.size() == 9);
    for (const auto &[context, total] : sums) {
        CHECK(max_abs_diff(total, CMatrix::Identity(4, 4)) < 1e-12);
    }
    CHECK_NOTHROW(set.find("F|H"));
    CHECK_THROWS_AS(set.find("nope"), std::invalid_argument);
}

TEST_CASE("minimal projector set spans the operator space") {
    for (const auto &[a, b] : {std::pair{SS, IP}, std::pair{signal_polarization(), IP}}) {
        const auto set = build_projector_set(ProjectorSetKind::minimal16, a, b);
        CHECK(set.size() == 16);
        CHECK_FALSE(set.complete);
        Eigen::MatrixXcd vectorized(16, 16);
        for (int k = 0; k < 16; ++k) {
            const CMatrix &p = set.projectors[k].projector.matrix();
            vectorized.row(k) = Eigen::Map<const CVector>(p.data(), 16).transpose();
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vectorized);
        CHECK(svd.rank() == 16);
        CHECK(svd.singularValues()(15) > 1e-3);
    }
    CHECK_THROWS_AS(build_projector_set(ProjectorSetKind::minimal16, signal_spatial(4), IP), std::invalid_argument);
    CHECK(projector_set_kind_from_string("minimal16") == ProjectorSetKind::minimal16);
    CHECK(to_string(ProjectorSetKind::overcomplete36) == "overcomplete36");
    CHECK_THROWS_AS(projector_set_kind_from_string("x"), std::invalid_argument);
}

TEST_CASE("linear inversion of exact probabilities") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto bell = DensityOperator::from_ket(bell_hes());
    CHECK(max_abs_diff(linear_inversion(expected_probabilities(bell, set), set), bell.matrix()) < 1e-10);
    const auto werner = werner_mix(bell, 0.5);
    CHECK(max_abs_diff(linear_inversion(expected_probabilities(werner, set), set), werner.matrix()) < 1e-10);
    CHECK_THROWS_AS(linear_inversion(std::vector<double>(3, 0.1), set), std::invalid_argument);

    ProjectorSet partial = set;
    partial.projectors.erase(partial.projectors.begin() + 8, partial.projectors.end());
    CHECK_THROWS_AS(linear_inversion(std::vector<double>(8, 0.1), partial), std::invalid_argument);
}

TEST_CASE("property: linear inversion inverts the forward model") {
    std::mt19937_64 rng(61);
    for (auto kind : {ProjectorSetKind::overcomplete36, ProjectorSetKind::minimal16}) {
        const auto set = build_projector_set(kind, SS, IP);
        for (int trial = 0; trial < 50; ++trial) {
            const auto rho = random_density(rng, set.space, 1 + trial % 4);
            CHECK(max_abs_diff(linear_inversion(expected_probabilities(rho, set), set), rho.matrix()) < 1e-9);
        }
    }
}

TEST_CASE("linear inversion from sparse counts can be unphysical") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto bell = DensityOperator::from_ket(bell_hes());
    int negative = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CMatrix est = linear_inversion(simulate(bell, set, 200.0, seed), set);
        CHECK(std::abs(est.trace() - 1.0) < 1e-12);
        CHECK(max_abs_diff(est, est.adjoint()) < 1e-15);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(est);
        negative += es.eigenvalues().minCoeff() < 0.0;
        const CMatrix physical = project_to_physical(est);
        Eigen::SelfAdjointEigenSolver<CMatrix> ep(physical);
        CHECK(ep.eigenvalues().minCoeff() > -1e-15);
        CHECK(std::abs(physical.trace() - 1.0) < 1e-12);
    }
    CHECK(negative > 0);
}

TEST_CASE("likelihood gradient matches finite differences") {
    std::mt19937_64 rng(62);
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto rho = random_density(rng, set.space);
    const auto counts = tomography_counts(rho, set.projectors, {2.0, 500.0, 3.0, 4});
    for (int trial = 0; trial < 5; ++trial) {
        const auto start = random_density(rng, set.space);
        const Eigen::VectorXd x = cholesky_parameters(start.matrix());
        CHECK(max_abs_diff(density_from_parameters(x, 4), start.matrix()) < 1e-12);
        const Eigen::VectorXd g = log_likelihood_gradient(x, counts, set);
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const double h = 1e-6;
            Eigen::VectorXd up = x, down = x;
            up(k) += h;
            down(k) -= h;
            const double fd = (log_likelihood(density_from_parameters(up, 4), counts, set) -
                               log_likelihood(density_from_parameters(down, 4), counts, set)) /
                              (2 * h);
            CHECK(std::abs(fd - g(k)) < 1e-4 * std::max(1.0, std::abs(g(k))));
        }
    }
}

TEST_CASE("cholesky parameters handle rank-deficient states") {
    const auto bell = DensityOperator::from_ket(bell_hes());
    const Eigen::VectorXd x = cholesky_parameters(bell.matrix());
    CHECK(max_abs_diff(density_from_parameters(x, 4), bell.matrix()) < 1e-12);
    CHECK_THROWS_AS(density_from_parameters(Eigen::VectorXd::Zero(16), 4), std::invalid_argument);
    CHECK_THROWS_AS(density_from_parameters(Eigen::VectorXd::Ones(5), 4), std::invalid_argument);
}

TEST_CASE("mle reconstruction is physical and improves on its start") {
    std::mt19937_64 rng(63);
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rho = random_density(rng, set.space, 1 + trial % 4);
        const auto counts = simulate(rho, set, 300.0, static_cast<std::uint64_t>(trial));
        const auto r = mle_reconstruct(counts, set);
        CHECK(r.converged);
        CHECK(r.log_likelihood >= r.start_log_likelihood);
        const CMatrix &m = r.rho_hat.matrix();
        CHECK(std::abs(m.trace() - 1.0) < 1e-14);
        CHECK(max_abs_diff(m, m.adjoint()) == 0.0);
        CHECK(r.rho_hat.eigenvalues().minCoeff() > -1e-15);
        CHECK(r.log_likelihood == doctest::Approx(log_likelihood(m, counts, set)));
    }
}

TEST_CASE("mle reaches high fidelity at ten thousand counts per row") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto bell = DensityOperator::from_ket(bell_hes());
    std::vector<double> fids;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = mle_reconstruct(simulate(bell, set, 2e4, seed), set);
        fids.push_back(fidelity(r.rho_hat, bell_hes()));
    }
    CHECK(median(fids) >= 0.99);
}

TEST_CASE("property: mle infidelity shrinks with statistics") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto rho = werner_mix(DensityOperator::from_ket(bell_hes()), 0.8);
    double previous = 1.0;
    for (double per_row : {1e2, 1e3, 1e4, 1e5}) {
        std::vector<double> errors;
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            const auto r = mle_reconstruct(simulate(rho, set, 2 * per_row, seed), set);
            errors.push_back((r.rho_hat.matrix() - rho.matrix()).norm());
        }
        const double m = median(errors);
        CHECK(m < previous);
        previous = m;
    }
}

TEST_CASE("mle recovers a Werner state") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto werner = werner_mix(DensityOperator::from_ket(bell_hes()), 0.9);
    const auto r = mle_reconstruct(simulate(werner, set, 2e5, 8), set);
    CHECK(fidelity(r.rho_hat, bell_hes()) == doctest::Approx(0.925).epsilon(0.005));
}

TEST_CASE("property: reconstruction ignores count-row order") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    std::mt19937_64 rng(64);
    const auto rho = random_density(rng, set.space, 2);
    const auto counts = simulate(rho, set, 500.0, 1);
    const auto base = mle_reconstruct(counts, set);
    for (int trial = 0; trial < 5; ++trial) {
        CountsTable shuffled = counts;
        std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
        const auto r = mle_reconstruct(shuffled, set);
        CHECK(max_abs_diff(r.rho_hat.matrix(), base.rho_hat.matrix()) < 1e-12);
    }
}

TEST_CASE("mle options and row validation") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto counts = simulate(DensityOperator::from_ket(bell_hes()), set, 1000.0, 2);
    const auto capped = mle_reconstruct(counts, set, {1e-9, 1});
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 1);
    CHECK(capped.log_likelihood >= capped.start_log_likelihood);
    CHECK_THROWS_AS(mle_reconstruct(counts, set, {0.0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(mle_reconstruct(counts, set, {1e-9, 0}), std::invalid_argument);

    CountsTable missing = counts;
    missing.rows.pop_back();
    CHECK_THROWS_AS(mle_reconstruct(missing, set), std::invalid_argument);
    CountsTable duplicated = counts;
    duplicated.rows.back() = duplicated.rows.front();
    CHECK_THROWS_AS(mle_reconstruct(duplicated, set), std::invalid_argument);
    CountsTable no_rate = counts;
    no_rate.pair_rate = 0.0;
    CHECK_THROWS_AS(mle_reconstruct(no_rate, set), std::invalid_argument);
    const auto other = build_projector_set(ProjectorSetKind::minimal16, SS, IP);
    CHECK_THROWS_AS(mle_reconstruct(counts, other), std::invalid_argument);
}

TEST_CASE("bootstrap errors") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto werner = werner_mix(DensityOperator::from_ket(bell_hes()), 0.9);
    const auto counts = simulate(werner, set, 2000.0, 3);
    const auto r = mle_reconstruct(counts, set);
    CHECK_THROWS_AS(bootstrap_errors(r, counts, set, 9), std::invalid_argument);
    const auto capped = mle_reconstruct(counts, set, {1e-9, 1});
    CHECK_THROWS_AS(bootstrap_errors(capped, counts, set, 20), std::invalid_argument);

    const auto b1 = bootstrap_errors(r, counts, set, 200, bell_hes(), 5);
    const auto b2 = bootstrap_errors(r, counts, set, 200, bell_hes(), 5);
    REQUIRE(b1.bootstrap.has_value());
    CHECK(b1.bootstrap->fidelity_std == b2.bootstrap->fidelity_std);
    CHECK(b1.bootstrap->n_resamples == 200);
    CHECK(b1.bootstrap->fidelity_std > 0.0);
    CHECK(b1.bootstrap->rho_real_std.rows() == 4);
    CHECK(b1.bootstrap->method == "parametric bootstrap");

    const auto doubled = simulate(werner, set, 4000.0, 3);
    const auto rd = mle_reconstruct(doubled, set);
    const auto bd = bootstrap_errors(rd, doubled, set, 200, bell_hes(), 5);
    const double ratio = bd.bootstrap->fidelity_std / b1.bootstrap->fidelity_std;
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));

    const auto huge = simulate(werner, set, 1e9, 3);
    const auto rh = mle_reconstruct(huge, set);
    const auto bh = bootstrap_errors(rh, huge, set, 10, std::nullopt, 5);
    CHECK(bh.bootstrap->fidelity_std < 1e-4);
    CHECK(bh.bootstrap->rho_real_std.maxCoeff() < 1e-4);
}

TEST_CASE("reconstruction json layout") {
    const auto set = build_projector_set(ProjectorSetKind::overcomplete36, SS, IP);
    const auto counts = simulate(DensityOperator::from_ket(bell_hes()), set, 1000.0, 2);
    const auto r = mle_reconstruct(counts, set);
    const auto j = reconstruction_to_json(r, {{"fidelity", 0.5}}, {{"key", "value"}}, 77);
    REQUIRE(j["rho_real"].size() == 4);
    CHECK(j["rho_real"][0].size() == 4);
    CHECK(j["rho_imag"][3][3].get<double>() == 0.0);
    CHECK(j["rho_real"][0][0].get<double>() == r.rho_hat.matrix()(0, 0).real());
    CHECK(j["bootstrap"].is_null());
    CHECK(j["optimizer"]["converged"].get<bool>());
    CHECK(j["seed"].get<std::uint64_t>() == 77);
    CHECK(j["config"]["key"] == "value");
    CHECK(j["metrics"]["fidelity"].get<double>() == 0.5);
}
