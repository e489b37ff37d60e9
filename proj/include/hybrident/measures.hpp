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

#ifndef HYBRIDENT_MEASURES_HPP
#define HYBRIDENT_MEASURES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hybrident/qstate.hpp"

namespace hybrident {

/// <psi|rho|psi>.
double fidelity(const DensityOperator &rho, const Ket &target);

/**
 * Wootters concurrence of a two-qubit state.
 *
 * Uses the Hermitian form sqrt(rho) rho~ sqrt(rho), whose eigenvalues are
 * the squares of the decreasing lambda_i. The raw-matrix overload rejects
 * states with an eigenvalue below -1e-6.
 */
double concurrence(const DensityOperator &rho);
double concurrence(const CMatrix &rho);
double concurrence(const Ket &state);

/// (||rho^{T_A}||_1 - 1) / 2 with the partial transpose taken on `party_a`.
double negativity(const DensityOperator &rho, std::span<const SubsystemLabel> party_a);

double purity(const DensityOperator &rho);

struct PatternSummary {
    double i_max = 0.0;
    double i_min = 0.0;
    double x_max = 0.0;
    double x_min = 0.0;
};

/// (I_max - I_min) / (I_max + I_min); throws for an all-zero pattern.
double visibility(const PatternSummary &pattern);

/**
 * Fringe extrema of a sampled far-field curve.
 *
 * When an envelope (same sampling) is supplied the curve is divided by it,
 * which isolates the two-slit interference term; only samples where the
 * envelope exceeds half its peak are used.
 */
PatternSummary summarize_pattern(const std::vector<double> &positions,
                                 const std::vector<double> &values,
                                 const std::optional<std::vector<double>> &envelope = std::nullopt);

/// Integrated coincidences with the idler projected on F and on A.
struct ConditionalCounts {
    std::uint64_t on_f = 0;
    std::uint64_t on_a = 0;
};

/// 2 sqrt(N_F N_A) / (N_F + N_A), the Schmidt-weight estimator for c|FF> + d|AA>.
double concurrence_from_conditional_counts(const ConditionalCounts &counts);

/// sqrt(1 - V^2): pure-state relation between marginal fringe visibility and concurrence.
double concurrence_from_marginal_visibility(double marginal_visibility);

}  // namespace hybrident

#endif  // HYBRIDENT_MEASURES_HPP
