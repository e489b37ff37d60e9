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

#include "hybrident/tomography.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "hybrident/elements.hpp"
#include "hybrident/measures.hpp"

namespace hybrident {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Consecutive steps below the relative tolerance required to stop.
constexpr int kQuietSteps = 3;

std::array<CMatrix, 4> paulis() {
    std::array<CMatrix, 4> s;
    for (auto &m : s) {
        m = CMatrix::Zero(2, 2);
    }
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    s[3] << 1, 0, 0, -1;
    return s;
}

/// Hermitian operator basis B_m = sigma_i (x) sigma_j / 4, m = 4 i + j.
const std::vector<CMatrix> &operator_basis() {
    static const std::vector<CMatrix> basis = [] {
        const auto s = paulis();
        std::vector<CMatrix> out;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                out.push_back(kron(s[i], s[j]) / 4.0);
            }
        }
        return out;
    }();
    return basis;
}

Eigen::MatrixXd design_matrix(const ProjectorSet &set) {
    const auto &basis = operator_basis();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(set.size()), 16);
    for (std::size_t k = 0; k < set.size(); ++k) {
        const CMatrix &p = set.projectors[k].projector.matrix();
        for (int m = 0; m < 16; ++m) {
            a(static_cast<Eigen::Index>(k), m) = (p * basis[m]).trace().real();
        }
    }
    return a;
}

CMatrix hermitize(const CMatrix &m) { return 0.5 * (m + m.adjoint()); }

void check_two_qubit(const ProjectorSet &set) {
    if (set.space.dimension() != 4) {
        throw std::invalid_argument("tomography supports two-qubit spaces only");
    }
}

struct RowModel {
    CMatrix projector;
    double counts = 0.0;
    double exposure = 0.0;    // T_k * rate
    double background = 0.0;  // T_k * bg
};

/// Count rows aligned with the projector set order, so row order in the table is irrelevant.
std::vector<RowModel> align(const CountsTable &counts, const ProjectorSet &set) {
    check_two_qubit(set);
    if (!(counts.pair_rate > 0.0)) {
        throw std::invalid_argument("counts table needs a positive pair_rate");
    }
    std::map<std::string, const CountsRow *> by_id;
    for (const auto &row : counts.rows) {
        if (!by_id.emplace(row.projector_id, &row).second) {
            throw std::invalid_argument("duplicate projector id in counts: " + row.projector_id);
        }
    }
    if (by_id.size() != set.size()) {
        throw std::invalid_argument("counts rows do not match the projector set (" +
                                    std::to_string(by_id.size()) + " rows, " +
                                    std::to_string(set.size()) + " projectors)");
    }
    std::vector<RowModel> rows;
    for (const auto &np : set.projectors) {
        const auto it = by_id.find(np.id);
        if (it == by_id.end()) {
            throw std::invalid_argument("counts table has no row for projector " + np.id);
        }
        const CountsRow &row = *it->second;
        if (!(row.duration_s > 0.0)) {
            throw std::invalid_argument("row " + np.id + " has nonpositive duration");
        }
        rows.push_back({np.projector.matrix(), static_cast<double>(row.counts),
                        row.duration_s * counts.pair_rate, row.duration_s * counts.background_rate});
    }
    return rows;
}

double likelihood(const CMatrix &rho, const std::vector<RowModel> &rows) {
    double total = 0.0;
    for (const auto &r : rows) {
        const double p = std::max(0.0, (r.projector * rho).trace().real());
        const double lambda = r.exposure * p + r.background;
        if (r.counts > 0.0) {
            if (!(lambda > 0.0)) {
                return -kInf;
            }
            total += r.counts * std::log(lambda);
        }
        total -= lambda;
    }
    return total;
}

CMatrix t_from_parameters(const Eigen::VectorXd &params, Eigen::Index d) {
    if (params.size() != d * d) {
        throw std::invalid_argument("parameter vector must have dimension^2 entries");
    }
    CMatrix t = CMatrix::Zero(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        t(i, i) = params(k++);
    }
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            t(i, j) = Complex(params(k), params(k + 1));
            k += 2;
        }
    }
    return t;
}

double objective(const Eigen::VectorXd &params, Eigen::Index d, const std::vector<RowModel> &rows) {
    const CMatrix t = t_from_parameters(params, d);
    const CMatrix m = t.adjoint() * t;
    const double s = m.trace().real();
    if (!(s > 0.0) || !std::isfinite(s)) {
        return kInf;
    }
    return -likelihood(m / s, rows);
}

Eigen::VectorXd gradient(const Eigen::VectorXd &params, Eigen::Index d,
                         const std::vector<RowModel> &rows) {
    const CMatrix t = t_from_parameters(params, d);
    const CMatrix m = t.adjoint() * t;
    const double s = m.trace().real();
    const CMatrix rho = m / s;
    CMatrix q = CMatrix::Zero(d, d);
    for (const auto &r : rows) {
        const double p = std::max(0.0, (r.projector * rho).trace().real());
        const double lambda = r.exposure * p + r.background;
        const double weight = lambda > 0.0 ? r.counts / lambda - 1.0 : -1.0;
        q += weight * r.exposure * r.projector;
    }
    const Complex qrho = (q * rho).trace();
    const CMatrix qp = (q - qrho.real() * CMatrix::Identity(d, d)) / s;
    const CMatrix qt = qp * t.adjoint();

    Eigen::VectorXd g(d * d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        g(k++) = 2.0 * qt(i, i).real();
    }
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            g(k) = 2.0 * qt(j, i).real();
            g(k + 1) = -2.0 * qt(j, i).imag();
            k += 2;
        }
    }
    return g;
}

CMatrix normalized_density(const CMatrix &m) {
    CMatrix rho = hermitize(m);
    return rho / rho.trace().real();
}

double standard_deviation(const std::vector<double> &xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (const double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (const double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd &m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::string to_string(ProjectorSetKind kind) {
    return kind == ProjectorSetKind::minimal16 ? "minimal16" : "overcomplete36";
}

ProjectorSetKind projector_set_kind_from_string(const std::string &name) {
    if (name == "minimal16") {
        return ProjectorSetKind::minimal16;
    }
    if (name == "overcomplete36") {
        return ProjectorSetKind::overcomplete36;
    }
    throw std::invalid_argument("unknown projector set '" + name +
                                "' (expected minimal16 or overcomplete36)");
}

const NamedProjector &ProjectorSet::find(const std::string &id) const {
    for (const auto &p : projectors) {
        if (p.id == id) {
            return p;
        }
    }
    throw std::invalid_argument("projector set has no projector " + id);
}

ProjectorSet build_projector_set(ProjectorSetKind kind, const SubsystemLabel &first,
                                 const SubsystemLabel &second) {
    if (first.dimension != 2 || second.dimension != 2) {
        throw std::invalid_argument("projector sets are defined for qubit pairs; got " +
                                    first.name() + " and " + second.name());
    }
    ProjectorSet set;
    set.kind = kind;
    set.space = CompositeSpace{first, second};
    const auto &bases_a = basis_catalog().for_dof(first.dof);
    const auto &bases_b = basis_catalog().for_dof(second.dof);

    auto add = [&](const NamedVector &ea, const NamedVector &eb, const std::string &context) {
        set.projectors.push_back({ea.name + "|" + eb.name, context,
                                  Projector::onto(set.space, kron(ea.vector, eb.vector))});
    };

    if (kind == ProjectorSetKind::overcomplete36) {
        for (const auto &ba : bases_a) {
            for (const auto &bb : bases_b) {
                const std::string context = ba.name + "|" + bb.name;
                for (const auto &ea : ba.states) {
                    for (const auto &eb : bb.states) {
                        add(ea, eb, context);
                    }
                }
            }
        }
        set.complete = true;
    } else {
        const auto tetrad = [](const std::array<Basis, 3> &b) {
            return std::array<NamedVector, 4>{b[0].states[0], b[0].states[1], b[1].states[0],
                                              b[2].states[1]};
        };
        for (const auto &ea : tetrad(bases_a)) {
            for (const auto &eb : tetrad(bases_b)) {
                add(ea, eb, "minimal");
            }
        }
        set.complete = false;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design_matrix(set));
    const auto &sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-8 * sv(0)) {
        throw std::logic_error("projector set does not span the operator space");
    }
    return set;
}

CMatrix linear_inversion(const std::vector<double> &probabilities, const ProjectorSet &set) {
    check_two_qubit(set);
    if (probabilities.size() != set.size()) {
        throw std::invalid_argument("linear_inversion: one probability per projector required");
    }
    const Eigen::MatrixXd a = design_matrix(set);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-8 * sv(0)) {
        throw std::invalid_argument("linear_inversion: singular design matrix");
    }
    const Eigen::VectorXd f =
        Eigen::Map<const Eigen::VectorXd>(probabilities.data(),
                                          static_cast<Eigen::Index>(probabilities.size()));
    const Eigen::VectorXd x = svd.solve(f);
    const auto &basis = operator_basis();
    CMatrix rho = CMatrix::Zero(4, 4);
    for (int m = 0; m < 16; ++m) {
        rho += x(m) * basis[m];
    }
    const double trace = rho.trace().real();
    if (!(trace > 0.0)) {
        throw std::invalid_argument("linear_inversion: estimated trace is not positive");
    }
    return hermitize(rho) / trace;
}

CMatrix linear_inversion(const CountsTable &counts, const ProjectorSet &set) {
    const auto rows = align(counts, set);
    std::vector<double> f;
    f.reserve(rows.size());
    for (const auto &r : rows) {
        f.push_back((r.counts - r.background) / r.exposure);
    }
    return linear_inversion(f, set);
}

CMatrix project_to_physical(const CMatrix &hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(hermitian));
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    if (!(clipped.sum() > 0.0)) {
        throw std::invalid_argument("matrix has no positive eigenvalue to keep");
    }
    const CMatrix rho =
        es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    return normalized_density(rho);
}

double log_likelihood(const CMatrix &rho, const CountsTable &counts, const ProjectorSet &set) {
    return likelihood(rho, align(counts, set));
}

Eigen::VectorXd cholesky_parameters(const CMatrix &rho) {
    const Eigen::Index d = rho.rows();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(rho));
    const CMatrix b = es.eigenvectors() *
                      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
    const CMatrix j = CMatrix::Identity(d, d).rowwise().reverse();
    // (J B)^dag = Q R, so rho = (J R J)^dag (J R J) with J R J lower triangular.
    Eigen::HouseholderQR<CMatrix> qr((j * b).adjoint());
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    CMatrix t = j * r * j;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double mag = std::abs(t(i, i));
        if (mag > 0.0) {
            t.row(i) *= std::conj(t(i, i)) / mag;
        }
    }
    Eigen::VectorXd params(d * d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        params(k++) = t(i, i).real();
    }
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index jj = 0; jj < i; ++jj) {
            params(k++) = t(i, jj).real();
            params(k++) = t(i, jj).imag();
        }
    }
    return params;
}

CMatrix density_from_parameters(const Eigen::VectorXd &params, Eigen::Index dimension) {
    const CMatrix t = t_from_parameters(params, dimension);
    const CMatrix m = t.adjoint() * t;
    const double s = m.trace().real();
    if (!(s > 0.0)) {
        throw std::invalid_argument("parameters describe the zero matrix");
    }
    return normalized_density(m);
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd &params, const CountsTable &counts,
                                        const ProjectorSet &set) {
    return gradient(params, 4, align(counts, set));
}

ReconstructionResult mle_reconstruct(const CountsTable &counts, const ProjectorSet &set,
                                     const MleOptions &options) {
    if (!(options.tol > 0.0) || options.max_iter == 0) {
        throw std::invalid_argument("MLE options need tol > 0 and max_iter > 0");
    }
    const auto rows = align(counts, set);
    const Eigen::Index d = 4;

    CMatrix start = project_to_physical(linear_inversion(counts, set));
    double start_ll = likelihood(start, rows);
    for (double eps = 1e-6; !std::isfinite(start_ll) && eps <= 1.0; eps *= 10.0) {
        start = (1.0 - eps) * start + eps * CMatrix::Identity(d, d) / static_cast<double>(d);
        start_ll = likelihood(start, rows);
    }

    Eigen::VectorXd x = cholesky_parameters(start);
    double fx = objective(x, d, rows);
    Eigen::VectorXd g = -gradient(x, d, rows);
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    bool converged = false;
    std::size_t iter = 0;
    int quiet_steps = 0;

    while (iter < options.max_iter) {
        ++iter;
        Eigen::VectorXd dir = -h * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            scaled = false;
            dir = -g;
            slope = g.dot(dir);
        }
        if (!(slope < 0.0)) {
            converged = true;
            break;
        }
        double alpha = scaled ? 1.0 : std::min(1.0, 1e-2 * x.norm() / dir.norm());
        double f_new = kInf;
        Eigen::VectorXd x_new;
        for (int tries = 0; tries < 60; ++tries) {
            x_new = x + alpha * dir;
            f_new = objective(x_new, d, rows);
            if (f_new <= fx + 1e-4 * alpha * slope) {
                break;
            }
            alpha *= 0.5;
        }
        if (!(f_new <= fx)) {
            if (scaled || !h.isIdentity()) {
                h.setIdentity();
                scaled = false;
                continue;
            }
            converged = true;
            break;
        }
        // Rescale so Tr(T^dag T) = 1; the likelihood is invariant and the parameters stay bounded.
        const double scale = std::sqrt(
            (t_from_parameters(x_new, d).adjoint() * t_from_parameters(x_new, d)).trace().real());
        const Eigen::VectorXd g_new_raw = -gradient(x_new, d, rows);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new_raw - g;
        const double ys = y.dot(s);
        if (ys > 1e-14 * s.norm() * y.norm()) {
            if (!scaled) {
                h = Eigen::MatrixXd::Identity(n, n) * (ys / y.dot(y));
                scaled = true;
            }
            const double rho_k = 1.0 / ys;
            const Eigen::MatrixXd i_n = Eigen::MatrixXd::Identity(n, n);
            h = (i_n - rho_k * s * y.transpose()) * h * (i_n - rho_k * y * s.transpose()) +
                rho_k * s * s.transpose();
        }
        const double change = std::abs(fx - f_new) / std::max(1.0, std::abs(fx));
        x = x_new / scale;
        g = g_new_raw * scale;
        h /= scale * scale;
        fx = objective(x, d, rows);
        quiet_steps = change < options.tol ? quiet_steps + 1 : 0;
        if (quiet_steps >= kQuietSteps) {
            converged = true;
            break;
        }
    }

    const CMatrix rho = density_from_parameters(x, d);
    return ReconstructionResult{DensityOperator(set.space, rho), likelihood(rho, rows), start_ll,
                                iter, converged, std::nullopt};
}

ReconstructionResult bootstrap_errors(const ReconstructionResult &result, const CountsTable &counts,
                                      const ProjectorSet &set, std::size_t n_resamples,
                                      const std::optional<Ket> &target, std::uint64_t seed,
                                      const MleOptions &options) {
    if (n_resamples < 10) {
        throw std::invalid_argument("bootstrap needs at least 10 resamples");
    }
    if (!result.converged) {
        throw std::invalid_argument("bootstrap requires a converged reconstruction");
    }
    const Ket reference = [&] {
        if (target) {
            return *target;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(result.rho_hat.matrix());
        return Ket(set.space, es.eigenvectors().col(es.eigenvalues().size() - 1));
    }();

    const CMatrix &fitted = result.rho_hat.matrix();
    std::vector<double> fidelities;
    std::vector<double> concurrences;
    std::vector<CMatrix> samples;
    for (std::size_t r = 0; r < n_resamples; ++r) {
        CountsTable resampled = counts;
        for (auto &row : resampled.rows) {
            const double p = std::clamp(
                (set.find(row.projector_id).projector.matrix() * fitted).trace().real(), 0.0, 1.0);
            AcquisitionSpec acq{row.duration_s, counts.pair_rate, counts.background_rate,
                                child_seed(seed, "bootstrap:" + std::to_string(r) + ":" +
                                                     row.projector_id)};
            row.counts = sample_counts(p, acq);
        }
        const auto fit = mle_reconstruct(resampled, set, options);
        fidelities.push_back(fidelity(fit.rho_hat, reference));
        concurrences.push_back(concurrence(fit.rho_hat));
        samples.push_back(fit.rho_hat.matrix());
    }

    BootstrapSummary summary;
    summary.n_resamples = n_resamples;
    summary.seed = seed;
    summary.fidelity_std = standard_deviation(fidelities);
    summary.concurrence_std = standard_deviation(concurrences);
    const Eigen::Index d = fitted.rows();
    summary.rho_real_std = Eigen::MatrixXd::Zero(d, d);
    summary.rho_imag_std = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            std::vector<double> re;
            std::vector<double> im;
            for (const auto &s : samples) {
                re.push_back(s(i, j).real());
                im.push_back(s(i, j).imag());
            }
            summary.rho_real_std(i, j) = standard_deviation(re);
            summary.rho_imag_std(i, j) = standard_deviation(im);
        }
    }
    ReconstructionResult out = result;
    out.bootstrap = summary;
    return out;
}

nlohmann::ordered_json reconstruction_to_json(const ReconstructionResult &result,
                                              const nlohmann::ordered_json &metrics,
                                              const nlohmann::ordered_json &config_echo,
                                              std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["space"] = result.rho_hat.space().describe();
    j["rho_real"] = matrix_json(result.rho_hat.matrix().real());
    j["rho_imag"] = matrix_json(result.rho_hat.matrix().imag());
    j["metrics"] = metrics;
    if (result.bootstrap) {
        const auto &b = *result.bootstrap;
        j["bootstrap"] = {{"method", b.method},
                          {"n_resamples", b.n_resamples},
                          {"seed", b.seed},
                          {"fidelity_std", b.fidelity_std},
                          {"concurrence_std", b.concurrence_std},
                          {"rho_real_std", matrix_json(b.rho_real_std)},
                          {"rho_imag_std", matrix_json(b.rho_imag_std)}};
    } else {
        j["bootstrap"] = nullptr;
    }
    j["optimizer"] = {{"method", "bfgs-cholesky"},
                      {"log_likelihood", result.log_likelihood},
                      {"start_log_likelihood", result.start_log_likelihood},
                      {"iterations", result.iterations},
                      {"converged", result.converged}};
    j["config"] = config_echo;
    j["seed"] = seed;
    return j;
}

}  // namespace hybrident
