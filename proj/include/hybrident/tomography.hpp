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

#ifndef HYBRIDENT_TOMOGRAPHY_HPP
#define HYBRIDENT_TOMOGRAPHY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hybrident/qstate.hpp"
#include "hybrident/simulate.hpp"

namespace hybrident {

enum class ProjectorSetKind { minimal16, overcomplete36 };

std::string to_string(ProjectorSetKind kind);
ProjectorSetKind projector_set_kind_from_string(const std::string &name);

/**
 * Product projectors on a two-qubit space.
 *
 * `complete` is true when the projectors sharing a context resolve the
 * identity for every context.
 */
struct ProjectorSet {
    ProjectorSetKind kind = ProjectorSetKind::overcomplete36;
    CompositeSpace space;
    std::vector<NamedProjector> projectors;
    bool complete = false;

    std::size_t size() const { return projectors.size(); }
    const NamedProjector &find(const std::string &id) const;
};

/**
 * overcomplete36 pairs every element of the three bases of `first` with
 * every element of the three bases of `second`. minimal16 uses the four
 * states e0, e1, (e0+e1)/sqrt2, (e0-i e1)/sqrt2 per qubit.
 */
ProjectorSet build_projector_set(ProjectorSetKind kind, const SubsystemLabel &first,
                                 const SubsystemLabel &second);

/// Least-squares inversion of p_k = Tr(P_k rho); probabilities are index-aligned with the set.
CMatrix linear_inversion(const std::vector<double> &probabilities, const ProjectorSet &set);

/// Same, with frequencies (n_k - bg T_k) / (rate T_k) estimated from counts matched by id.
CMatrix linear_inversion(const CountsTable &counts, const ProjectorSet &set);

/// Eigenvalue clipping to the PSD cone followed by trace renormalization.
CMatrix project_to_physical(const CMatrix &hermitian);

struct MleOptions {
    double tol = 1e-9;
    std::size_t max_iter = 5000;
};

struct BootstrapSummary {
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    double fidelity_std = 0.0;
    double concurrence_std = 0.0;
    Eigen::MatrixXd rho_real_std;
    Eigen::MatrixXd rho_imag_std;
    std::string method = "parametric bootstrap";
};

struct ReconstructionResult {
    DensityOperator rho_hat;
    double log_likelihood = 0.0;
    double start_log_likelihood = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::optional<BootstrapSummary> bootstrap;
};

/**
 * Poisson log-likelihood sum_k n_k ln(lambda_k) - lambda_k with
 * lambda_k = T_k (rate Tr(P_k rho) + background).
 */
double log_likelihood(const CMatrix &rho, const CountsTable &counts, const ProjectorSet &set);

/**
 * Maximum-likelihood state over rho = T^dag T / Tr(T^dag T), T lower
 * triangular with real diagonal.
 *
 * BFGS with backtracking line search; each accepted step increases the
 * likelihood. Starts from the physical projection of the linear-inversion
 * estimate.
 */
ReconstructionResult mle_reconstruct(const CountsTable &counts, const ProjectorSet &set,
                                     const MleOptions &options = {});

/// T parameters (real diagonal, then real and imaginary strictly lower entries) and back.
Eigen::VectorXd cholesky_parameters(const CMatrix &rho);
CMatrix density_from_parameters(const Eigen::VectorXd &params, Eigen::Index dimension);

/// Gradient of log_likelihood with respect to the T parameters.
Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd &params, const CountsTable &counts,
                                        const ProjectorSet &set);

/**
 * Parametric bootstrap: Poisson counts redrawn at the fitted lambda_k and
 * reconstructed again. Fidelity is taken against `target`, or against the
 * principal eigenvector of rho_hat when none is given.
 */
ReconstructionResult bootstrap_errors(const ReconstructionResult &result, const CountsTable &counts,
                                      const ProjectorSet &set, std::size_t n_resamples = 100,
                                      const std::optional<Ket> &target = std::nullopt,
                                      std::uint64_t seed = 0, const MleOptions &options = {});

/// rho_real/rho_imag row-major, metrics, bootstrap, diagnostics, config echo and seed.
nlohmann::ordered_json reconstruction_to_json(const ReconstructionResult &result,
                                              const nlohmann::ordered_json &metrics,
                                              const nlohmann::ordered_json &config_echo,
                                              std::uint64_t seed);

}  // namespace hybrident

#endif  // HYBRIDENT_TOMOGRAPHY_HPP
