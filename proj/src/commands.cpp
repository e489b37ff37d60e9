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

#include "hybrident/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "command_support.hpp"
#include "hybrident/measures.hpp"

namespace hybrident {

using nlohmann::ordered_json;

namespace detail {

ordered_json space_json(const CompositeSpace &space) {
    ordered_json j = ordered_json::array();
    for (const auto &l : space.labels()) {
        j.push_back(l.name());
    }
    return j;
}

ordered_json ket_json(const Ket &ket) {
    ordered_json re = ordered_json::array(), im = ordered_json::array();
    for (Eigen::Index k = 0; k < ket.amplitudes().size(); ++k) {
        re.push_back(ket.amplitudes()(k).real());
        im.push_back(ket.amplitudes()(k).imag());
    }
    return {{"space", space_json(ket.space())}, {"real", re}, {"imag", im}};
}

ordered_json density_json(const DensityOperator &rho) {
    ordered_json re = ordered_json::array(), im = ordered_json::array();
    const CMatrix &m = rho.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json rr = ordered_json::array(), ir = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ir.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return {{"space", space_json(rho.space())}, {"real", re}, {"imag", im}};
}

std::string dump(const ordered_json &j) { return j.dump(2) + "\n"; }

CommandOutput begin_output(std::string command, std::string bundle, const ScenarioConfig &config) {
    CommandOutput out;
    out.command = std::move(command);
    out.bundle = std::move(bundle);
    out.config = config;
    return out;
}

void emit(CommandOutput &out, const std::string &file, std::string content) {
    const auto dot = file.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : file.substr(dot + 1);
    if (out.config.outputs.wants(ext)) {
        out.artifacts.push_back({file, std::move(content)});
    }
}

PipelineResult ideal_pipeline(const ScenarioConfig &config) {
    const Ket source = config.source_ket();
    PipelineResult result = config.eraser.variant == "reversible"
                                ? run_reversible(source)
                                : run_irreversible(source, config.eraser_spec(),
                                                   sptq_cnot(config.slits()));
    if (result.is_null()) {
        throw NullProjectionError("pipeline stage " + result.null_stage +
                                  " has zero probability");
    }
    return result;
}

ScanSetup scan_setup(const ScenarioConfig &config) {
    config.validate_for("scan");
    const std::size_t slits = config.slits();
    const auto &scan = config.scan;
    std::optional<DensityOperator> state;
    SubsystemLabel conditioned = idler_polarization();
    Dof dof = Dof::polarization;
    if (scan.target == "source_spatial") {
        const SourceParams p = config.source_params();
        const Ket source = config.qudit.enabled ? qudit_source(slits, p.a, p.b, config.qudit.j)
                                                : hyper_source(p);
        const SubsystemLabel keep[] = {signal_spatial(slits), idler_spatial(slits)};
        state = partial_trace(DensityOperator::from_ket(source), keep);
        conditioned = idler_spatial(slits);
        dof = Dof::spatial;
    } else if (scan.target == "final") {
        state = perturbed_pipeline(config.source_ket(), config.eraser_spec(), config.noise_spec());
    } else {
        const CVector pol_in = scan.input[0] == 'H' ? pol::H() : pol::V();
        const CVector spatial_in = scan.input[1] == 'F' ? spatial::F() : spatial::A();
        const Ket input(CompositeSpace{signal_polarization(), signal_spatial(2)},
                        kron(pol_in, spatial_in));
        const SubsystemLabel targets[] = {signal_polarization(), signal_spatial(2)};
        const CMatrix u = qwp_array_cnot(2, config.noise_spec().qwp_errors());
        state = DensityOperator::from_ket(apply_unitary(input, u, targets));
        conditioned = signal_polarization();
    }
    ScanSetup setup{*state, {}, {}};
    for (const auto &name : scan.conditioning) {
        setup.names.push_back(name);
        if (name == "none") {
            setup.conditionings.push_back(std::nullopt);
        } else {
            const CompositeSpace targets{conditioned};
            setup.conditionings.push_back(NamedProjector{
                name, conditioned.name(), Projector::onto(targets, named_state(dof, name, slits))});
        }
    }
    return setup;
}

std::vector<double> scan_positions(const ScenarioConfig &config) {
    return linspace_positions(config.scan.half_width_mm * 1e-3, config.scan.points);
}

std::vector<double> envelope_curve(const OpticsGeometry &geometry,
                                   const std::vector<double> &positions) {
    const FarFieldModel model(geometry);
    CMatrix single = CMatrix::Zero(static_cast<Eigen::Index>(geometry.slit_count),
                                   static_cast<Eigen::Index>(geometry.slit_count));
    single(0, 0) = 1.0;
    std::vector<double> out;
    for (double x : positions) {
        out.push_back(model.detector_intensity(single, x));
    }
    return out;
}

std::string scan_file(const ScenarioConfig &config, const std::string &conditioning) {
    std::string stem = "scan_" + config.scan.target;
    if (config.scan.target == "cnot_output") {
        stem += "_" + config.scan.input;
    }
    return stem + "_" + conditioning + ".csv";
}

TomoRun tomo_run(const ScenarioConfig &config, bool with_bootstrap) {
    config.validate_for("tomo");
    const Ket source = config.source_ket();
    const NoiseSpec noise = config.noise_spec();
    std::optional<DensityOperator> truth;
    std::optional<Ket> target;
    if (config.tomography.target == "source_pol") {
        const SubsystemLabel keep[] = {signal_polarization(), idler_polarization()};
        truth = werner_mix(partial_trace(DensityOperator::from_ket(source), keep), noise.werner_p);
        const SourceParams p = config.source_params();
        CVector v = CVector::Zero(4);
        v(0) = p.a;
        v(3) = p.b;
        target = Ket(CompositeSpace{signal_polarization(), idler_polarization()}, v);
    } else {
        target = *ideal_pipeline(config).final_state;
        truth = perturbed_pipeline(source, config.eraser_spec(), noise);
    }
    const auto &labels = truth->space().labels();
    ProjectorSet set = build_projector_set(
        projector_set_kind_from_string(config.tomography.projector_set), labels[0], labels[1]);
    const AcquisitionSpec acq = config.acquisition_spec();
    CountsTable counts = tomography_counts(*truth, set.projectors, acq);
    ReconstructionResult result = mle_reconstruct(counts, set, config.mle_options());
    if (with_bootstrap && result.converged && config.tomography.bootstrap_resamples > 0) {
        result = bootstrap_errors(result, counts, set, config.tomography.bootstrap_resamples, target,
                                  acq.seed, config.mle_options());
    }
    return {*truth, *target, std::move(set), std::move(counts), std::move(result)};
}

ordered_json tomo_metrics(const TomoRun &run) {
    const DensityOperator &rho = run.result.rho_hat;
    std::uint64_t total = 0;
    for (const auto &row : run.counts.rows) {
        total += row.counts;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> lin(linear_inversion(run.counts, run.set));
    ordered_json m;
    m["fidelity"] = fidelity(rho, run.target);
    m["concurrence"] = concurrence(rho);
    m["purity"] = purity(rho);
    m["min_eigenvalue"] = rho.eigenvalues().minCoeff();
    m["true_fidelity"] = fidelity(run.truth, run.target);
    m["true_concurrence"] = concurrence(run.truth);
    m["linear_inversion_min_eigenvalue"] = lin.eigenvalues().minCoeff();
    m["total_counts"] = total;
    m["settings"] = run.set.size();
    if (run.result.bootstrap) {
        m["fidelity_std"] = run.result.bootstrap->fidelity_std;
        m["concurrence_std"] = run.result.bootstrap->concurrence_std;
    }
    return m;
}

Curve parse_scan_csv(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (line != "position_mm,intensity_expected,counts") {
        throw std::invalid_argument("parse_scan_csv: unexpected header \"" + line + "\"");
    }
    Curve c;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) {
            throw std::invalid_argument("parse_scan_csv: malformed row \"" + line + "\"");
        }
        c.x.push_back(std::stod(line.substr(0, a)));
        c.y.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    return c;
}

namespace {

/// Parabolic vertex through three neighbouring samples around index k.
double refine(const Curve &c, std::size_t k) {
    const double y0 = c.y[k - 1], y1 = c.y[k], y2 = c.y[k + 1];
    const double denom = y0 - 2 * y1 + y2;
    const double h = c.x[k + 1] - c.x[k];
    return denom > 0.0 ? c.x[k] + 0.5 * h * (y0 - y2) / denom : c.x[k];
}

}  // namespace

double central_minima_spacing(const Curve &c) {
    if (c.x.size() < 5) {
        throw std::invalid_argument("central_minima_spacing: curve too short");
    }
    const auto centre = static_cast<std::size_t>(
        std::min_element(c.x.begin(), c.x.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        c.x.begin());
    std::optional<double> right, left;
    for (std::size_t k = centre + 1; k + 1 < c.x.size() && !right; ++k) {
        if (c.y[k] < c.y[k - 1] && c.y[k] <= c.y[k + 1]) {
            right = refine(c, k);
        }
    }
    for (std::size_t k = centre - 1; k >= 1 && !left; --k) {
        if (c.y[k] < c.y[k + 1] && c.y[k] <= c.y[k - 1]) {
            left = refine(c, k);
        }
    }
    if (!right || !left) {
        throw std::invalid_argument("central_minima_spacing: no minimum on one side");
    }
    return *right - *left;
}

}  // namespace detail

using namespace detail;

const Artifact &CommandOutput::artifact(const std::string &file) const {
    for (const auto &a : artifacts) {
        if (a.file == file) {
            return a;
        }
    }
    throw std::invalid_argument("no artifact named " + file);
}

bool CommandOutput::all_checks_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const TargetCheck &c) { return c.pass; });
}

CVector named_state(Dof dof, const std::string &name, std::size_t slits) {
    if (slits == 2) {
        for (const auto &basis : basis_catalog().for_dof(dof)) {
            for (const auto &s : basis.states) {
                if (s.name == name) {
                    return s.vector;
                }
            }
        }
    } else if (dof == Dof::spatial && name.size() > 1 && name[0] == 'F') {
        const std::size_t k = std::stoul(name.substr(1));
        if (k < slits) {
            return mode_family(slits).mode(k);
        }
    }
    throw std::invalid_argument("unknown state name \"" + name + "\"");
}

ordered_json physics_echo(const ScenarioConfig &config) {
    ordered_json j = scenario_to_json(config);
    j.erase("outputs");
    return j;
}

CommandOutput cmd_generate(const ScenarioConfig &config) {
    config.validate();
    CommandOutput out = begin_output("generate", "", config);
    const PipelineResult ideal = ideal_pipeline(config);
    const DensityOperator noisy =
        perturbed_pipeline(config.source_ket(), config.eraser_spec(), config.noise_spec());
    const Ket &target = *ideal.final_state;
    const auto &labels = noisy.space().labels();
    const SubsystemLabel party[] = {labels[0]};
    const bool two_qubit = noisy.space().dimension() == 4 && labels.size() == 2;

    ordered_json m;
    m["success_probability"] = ideal.success_probability;
    ordered_json stage_p;
    for (const auto &s : ideal.stages) {
        stage_p[s.name] = s.probability;
    }
    m["stage_probabilities"] = stage_p;
    m["fidelity"] = fidelity(noisy, target);
    m["purity"] = purity(noisy);
    m["negativity"] = negativity(noisy, party);
    if (two_qubit) {
        m["concurrence"] = concurrence(noisy);
        m["target_concurrence"] = concurrence(target);
        if (config.eraser.variant == "irreversible") {
            m["hes_phase_over_pi"] = hes_components(target).relative_phase() / std::numbers::pi;
        }
    }
    out.metrics = m;

    ordered_json stages = ordered_json::array();
    std::string stages_csv = "stage,probability,dimension\n";
    for (const auto &s : ideal.stages) {
        stages.push_back({{"name", s.name}, {"probability", s.probability}, {"state", ket_json(s.state)}});
        stages_csv += s.name + "," + format_double(s.probability) + "," +
                      std::to_string(s.state.space().dimension()) + "\n";
    }
    ordered_json doc;
    doc["target_state"] = ket_json(target);
    doc["final_state"] = density_json(noisy);
    doc["stages"] = stages;
    doc["metrics"] = m;
    doc["config"] = physics_echo(config);
    doc["seed"] = config.acquisition.seed;
    emit(out, "state.json", dump(doc));
    emit(out, "metrics.json", dump(m));
    emit(out, "stages.csv", stages_csv);
    return out;
}

CommandOutput cmd_scan(const ScenarioConfig &config) {
    config.validate_for("scan");
    CommandOutput out = begin_output("scan", "", config);
    const ScanSetup setup = scan_setup(config);
    const OpticsGeometry geometry = config.optics();
    const auto positions = scan_positions(config);
    const auto envelope = envelope_curve(geometry, positions);
    const AcquisitionSpec acq = config.acquisition_spec();
    ordered_json m;
    for (std::size_t k = 0; k < setup.names.size(); ++k) {
        const ScanCurve curve = scan_run(setup.state, geometry, positions, acq, setup.conditionings[k]);
        const auto summary = summarize_pattern(positions, curve.expected(), envelope);
        std::uint64_t total = 0;
        for (const auto &p : curve.points) {
            total += p.counts;
        }
        m[setup.names[k]] = {{"conditioning_probability", curve.conditioning_probability},
                             {"visibility", visibility(summary)},
                             {"x_max_mm", summary.x_max * 1e3},
                             {"total_counts", total}};
        emit(out, scan_file(config, setup.names[k]), curve.to_csv());
    }
    out.metrics = m;
    emit(out, "metrics.json", dump(m));
    return out;
}

CommandOutput cmd_tomo(const ScenarioConfig &config) {
    config.validate_for("tomo");
    CommandOutput out = begin_output("tomo", "", config);
    const TomoRun run = tomo_run(config, true);
    out.metrics = tomo_metrics(run);
    out.metrics["converged"] = run.result.converged;
    out.metrics["iterations"] = run.result.iterations;
    emit(out, "counts.csv", run.counts.to_csv());
    emit(out, "reconstruction.json",
         dump(reconstruction_to_json(run.result, out.metrics, physics_echo(config),
                                     config.acquisition.seed)));
    if (!run.result.converged) {
        out.exit_code = kExitNotConverged;
        out.message = "maximum-likelihood reconstruction did not converge within " +
                      std::to_string(config.tomography.max_iter) + " iterations";
    }
    return out;
}

std::string checks_csv(const std::vector<TargetCheck> &checks) {
    std::string out = "check,value,target,status\n";
    for (const auto &c : checks) {
        out += c.name + "," + format_double(c.value) + ",\"" + c.target + "\"," +
               (c.pass ? "PASS" : "FAIL") + "\n";
    }
    return out;
}

std::string checks_table(const std::vector<TargetCheck> &checks) {
    std::size_t width = 0;
    for (const auto &c : checks) {
        width = std::max(width, c.name.size());
    }
    std::ostringstream os;
    for (const auto &c : checks) {
        os << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width) + 2)
           << c.name << std::setprecision(10) << c.value << "  (" << c.target << ")\n";
    }
    return os.str();
}

ordered_json make_manifest(const CommandOutput &output, const std::string &timestamp) {
    ordered_json j;
    j["tool"] = "hybrident";
    j["version"] = kToolVersion;
    j["command"] = output.command;
    j["bundle"] = output.bundle.empty() ? ordered_json() : ordered_json(output.bundle);
    j["seed"] = output.config.acquisition.seed;
    j["timestamp"] = timestamp;
    j["config"] = scenario_to_json(output.config);
    j["metrics"] = output.metrics;
    ordered_json checks = ordered_json::array();
    for (const auto &c : output.checks) {
        checks.push_back({{"check", c.name}, {"value", c.value}, {"target", c.target}, {"pass", c.pass}});
    }
    j["checks"] = checks;
    j["exit_code"] = output.exit_code;
    ordered_json files = ordered_json::array();
    for (const auto &a : output.artifacts) {
        files.push_back({{"file", a.file}, {"digest", content_digest(a.content)}});
    }
    j["artifacts"] = files;
    return j;
}

LoadedConfig load_config(const ordered_json &doc) {
    if (doc.is_object() && doc.contains("tool")) {
        if (doc.at("tool") != "hybrident" || !doc.contains("config")) {
            throw ConfigError("tool", "not a hybrident manifest");
        }
        LoadedConfig loaded{parse_scenario(doc.at("config")), std::nullopt, std::nullopt};
        if (doc.contains("command") && doc.at("command").is_string()) {
            loaded.command = doc.at("command").get<std::string>();
        }
        if (doc.contains("bundle") && doc.at("bundle").is_string()) {
            loaded.bundle = doc.at("bundle").get<std::string>();
        }
        return loaded;
    }
    return {parse_scenario(doc), std::nullopt, std::nullopt};
}

void write_output(const std::filesystem::path &directory, const CommandOutput &output,
                  const std::string &timestamp) {
    std::filesystem::create_directories(directory);
    const auto write = [&](const std::string &file, const std::string &content) {
        std::ofstream f(directory / file, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + (directory / file).string());
        }
        f << content;
    };
    for (const auto &a : output.artifacts) {
        write(a.file, a.content);
    }
    if (!output.checks.empty()) {
        write("checks.csv", checks_csv(output.checks));
    }
    write("manifest.json", dump(make_manifest(output, timestamp)));
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace hybrident
