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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "command_support.hpp"
#include "hybrident/commands.hpp"
#include "hybrident/measures.hpp"

namespace hybrident {

using nlohmann::ordered_json;
using namespace detail;

namespace {

constexpr double kFidelityFloor = 0.97;
constexpr double kBootstrapLow = 0.005;
constexpr double kBootstrapHigh = 0.04;
constexpr double kFringePeriodMm = 0.842;
constexpr double kFirstZeroMm = 2.63;
constexpr std::size_t kEstimatorRuns = 200;
constexpr double kEstimatorCoincidences = 1e4;

TargetCheck at_least(std::string name, double value, double floor) {
    return {std::move(name), value, ">= " + format_double(floor), value >= floor};
}

TargetCheck at_most(std::string name, double value, double ceiling) {
    return {std::move(name), value, "<= " + format_double(ceiling), value <= ceiling};
}

TargetCheck within(std::string name, double value, double expected, double tolerance) {
    return {std::move(name), value, format_double(expected) + " +/- " + format_double(tolerance),
            std::abs(value - expected) <= tolerance};
}

TargetCheck inside(std::string name, double value, double low, double high) {
    return {std::move(name), value, "[" + format_double(low) + ", " + format_double(high) + "]",
            value >= low && value <= high};
}

TargetCheck within_relative(std::string name, double value, double expected, double relative) {
    return {std::move(name), value,
            format_double(expected) + " within " + format_double(relative * 100) + "%",
            std::abs(value - expected) <= relative * expected};
}

/// Angular distance on the 180-degree period of a Malus curve.
double malus_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

struct NamedCurve {
    std::string name;
    std::string file;
    ScanCurve curve;
    std::string csv;
};

std::vector<NamedCurve> scan_curves(CommandOutput &out, const ScenarioConfig &config,
                                    const std::string &metric_prefix) {
    const ScanSetup setup = scan_setup(config);
    const OpticsGeometry geometry = config.optics();
    const auto positions = scan_positions(config);
    const auto envelope = envelope_curve(geometry, positions);
    std::vector<NamedCurve> curves;
    for (std::size_t k = 0; k < setup.names.size(); ++k) {
        ScanCurve curve = scan_run(setup.state, geometry, positions, config.acquisition_spec(),
                                   setup.conditionings[k]);
        const auto summary = summarize_pattern(positions, curve.expected(), envelope);
        out.metrics[metric_prefix + setup.names[k]] = {
            {"conditioning_probability", curve.conditioning_probability},
            {"visibility", visibility(summary)},
            {"x_max_mm", summary.x_max * 1e3}};
        const std::string file = scan_file(config, setup.names[k]);
        std::string csv = curve.to_csv();
        emit(out, file, csv);
        curves.push_back({setup.names[k], file, std::move(curve), std::move(csv)});
    }
    return curves;
}

/// I(0) / max I of the expected curve.
double centre_ratio(const ScanCurve &curve) {
    const auto values = curve.expected();
    const auto positions = curve.positions();
    const auto centre = std::min_element(positions.begin(), positions.end(), [](double a, double b) {
                            return std::abs(a) < std::abs(b);
                        }) - positions.begin();
    return values[static_cast<std::size_t>(centre)] / *std::max_element(values.begin(), values.end());
}

double envelope_visibility(const ScenarioConfig &config, const ScanCurve &curve) {
    const auto positions = curve.positions();
    return visibility(summarize_pattern(positions, curve.expected(),
                                        envelope_curve(config.optics(), positions)));
}

void truth_table(CommandOutput &out) {
    const CMatrix u = qwp_array_cnot(2, out.config.noise_spec().qwp_errors());
    const CMatrix probabilities = cnot_truth_table(u);
    CMatrix basis = CMatrix::Zero(4, 4);
    const CVector pols[] = {pol::H(), pol::V()};
    const CVector modes[] = {spatial::F(), spatial::A()};
    for (int k = 0; k < 4; ++k) {
        basis.col(k) = kron(pols[k / 2], modes[k % 2]);
    }
    const CMatrix amplitudes = (basis.adjoint() * u * basis).transpose();

    const char *names[] = {"HF", "HA", "VF", "VA"};
    const int image[] = {0, 1, 3, 2};
    std::string csv = "input,HF,HA,VF,VA\n";
    ordered_json prob = ordered_json::array(), re = ordered_json::array(), im = ordered_json::array();
    double off_target = 0.0, on_target = 1.0;
    for (int i = 0; i < 4; ++i) {
        csv += names[i];
        ordered_json pr = ordered_json::array(), rr = ordered_json::array(), ir = ordered_json::array();
        for (int o = 0; o < 4; ++o) {
            const double p = probabilities(i, o).real();
            csv += "," + format_double(p);
            pr.push_back(p);
            rr.push_back(amplitudes(i, o).real());
            ir.push_back(amplitudes(i, o).imag());
            if (o == image[i]) {
                on_target = std::min(on_target, p);
            } else {
                off_target = std::max(off_target, p);
            }
        }
        csv += "\n";
        prob.push_back(pr);
        re.push_back(rr);
        im.push_back(ir);
    }
    ordered_json doc;
    doc["order"] = {"HF", "HA", "VF", "VA"};
    doc["probability"] = prob;
    doc["amplitude_real"] = re;
    doc["amplitude_imag"] = im;
    doc["config"] = physics_echo(out.config);
    emit(out, "truth_table.csv", csv);
    emit(out, "truth_table.json", dump(doc));
    out.metrics["max_off_target_probability"] = off_target;
    out.metrics["min_on_target_probability"] = on_target;
    out.checks.push_back(at_most("max_off_target_probability", off_target, 1e-12));
    out.checks.push_back(at_least("min_on_target_probability", on_target, 1.0 - 1e-12));
}

void cnot_outputs(CommandOutput &out) {
    for (const std::string input : {"HF", "HA", "VF", "VA"}) {
        ScenarioConfig c = out.config;
        c.scan.input = input;
        const auto curves = scan_curves(out, c, input + ":");
        const NamedCurve &nc = curves.front();
        const bool f_output = input == "HF" || input == "VA";
        if (f_output) {
            out.checks.push_back(at_least(input + "_centre_is_maximum", centre_ratio(nc.curve), 1.0 - 1e-9));
        } else {
            out.checks.push_back(at_most(input + "_centre_is_dark", centre_ratio(nc.curve), 0.01));
        }
        if (input == "HF") {
            const double period = central_minima_spacing(parse_scan_csv(nc.csv));
            out.metrics["fringe_period_mm"] = period;
            out.checks.push_back(within_relative("fringe_period_mm", period, kFringePeriodMm, 0.01));
        }
    }
}

void phase_signature(CommandOutput &out) {
    const Ket input(CompositeSpace{signal_polarization(), signal_spatial(2)},
                    kron(pol::D(), spatial::F()));
    const SubsystemLabel targets[] = {signal_polarization(), signal_spatial(2)};
    const Ket state =
        apply_unitary(input, qwp_array_cnot(2, out.config.noise_spec().qwp_errors()), targets);
    std::vector<double> degrees, radians;
    for (int k = -180; k <= 180; ++k) {
        degrees.push_back(0.5 * k);
        radians.push_back(deg_to_rad(0.5 * k));
    }
    const std::pair<const char *, double> projections[] = {
        {"F", 0.0}, {"A", 90.0}, {"F+iA", 45.0}, {"F-iA", -45.0}};
    std::vector<std::vector<double>> curves;
    for (const auto &[name, expected] : projections) {
        curves.push_back(malus_curve(state, named_state(Dof::spatial, name), radians));
        const auto &curve = curves.back();
        const auto peak = std::max_element(curve.begin(), curve.end()) - curve.begin();
        const double at = degrees[static_cast<std::size_t>(peak)];
        out.metrics[std::string(name) + "_peak_deg"] = at;
        out.checks.push_back({std::string(name) + "_peak_offset_deg", malus_distance(at, expected),
                              "peak at " + format_double(expected) + " deg within 0.5",
                              malus_distance(at, expected) <= 0.5});
    }
    std::string csv = "angle_deg,F,A,F+iA,F-iA\n";
    for (std::size_t k = 0; k < degrees.size(); ++k) {
        csv += format_double(degrees[k]);
        for (const auto &c : curves) {
            csv += "," + format_double(c[k]);
        }
        csv += "\n";
    }
    emit(out, "malus.csv", csv);
}

void tomography_checks(CommandOutput &out) {
    const TomoRun run = tomo_run(out.config, true);
    out.metrics = tomo_metrics(run);
    out.metrics["converged"] = run.result.converged;
    out.metrics["iterations"] = run.result.iterations;
    emit(out, "counts.csv", run.counts.to_csv());
    emit(out, "reconstruction.json",
         dump(reconstruction_to_json(run.result, out.metrics, physics_echo(out.config),
                                     out.config.acquisition.seed)));
    if (!run.result.converged) {
        out.exit_code = kExitNotConverged;
        out.message = "maximum-likelihood reconstruction did not converge";
    }
    out.checks.push_back(at_least("reconstructed_fidelity", out.metrics["fidelity"], kFidelityFloor));
    out.checks.push_back(at_least("rho_hat_min_eigenvalue", out.metrics["min_eigenvalue"], -1e-12));
    if (run.result.bootstrap) {
        out.checks.push_back(inside("bootstrap_fidelity_std", run.result.bootstrap->fidelity_std,
                                    kBootstrapLow, kBootstrapHigh));
    }
}

void hes_phase_check(CommandOutput &out, double expected_over_pi) {
    const Ket hes = *ideal_pipeline(out.config).final_state;
    const double phase = hes_components(hes).relative_phase() / std::numbers::pi;
    out.metrics["hes_phase_over_pi"] = phase;
    out.checks.push_back(within("hes_phase_over_pi", phase, expected_over_pi, 1e-10));
}

void offset_sweep(CommandOutput &out) {
    std::string csv = "offset_deg,fidelity_expected,fidelity_reconstructed\n";
    for (int offset = 1; offset <= 5; ++offset) {
        ScenarioConfig c = out.config;
        c.noise.qwp_offset_deg = {static_cast<double>(offset), -static_cast<double>(offset)};
        c.acquisition.seed = child_seed(out.config.acquisition.seed, "offset:" + std::to_string(offset));
        const TomoRun run = tomo_run(c, false);
        const double expected = fidelity(run.truth, run.target);
        const double reconstructed = fidelity(run.result.rho_hat, run.target);
        csv += std::to_string(offset) + "," + format_double(expected) + "," +
               format_double(reconstructed) + "\n";
        out.checks.push_back(inside("offset_" + std::to_string(offset) + "deg_fidelity",
                                    reconstructed, 0.90, 0.97));
    }
    emit(out, "offset_sweep.csv", csv);
}

void concentration(CommandOutput &out) {
    const SourceParams p = out.config.source_params();
    const double angle = rad_to_deg(concentration_angle(p.b));
    out.metrics["concentration_angle_deg"] = angle;
    out.checks.push_back(within("concentration_angle_deg", angle, 62.5, 0.1));
    const PipelineResult ideal = ideal_pipeline(out.config);
    const double c = concurrence(*ideal.final_state);
    const double erasure_p = ideal.stages.back().probability;
    out.metrics["ideal_concurrence"] = c;
    out.metrics["erasure_probability"] = erasure_p;
    out.checks.push_back(within("ideal_concurrence", c, 1.0, 1e-10));
    out.checks.push_back(within("erasure_probability", erasure_p, 0.335, 1e-6));
}

void schmidt(CommandOutput &out) {
    const auto curves = scan_curves(out, out.config, "");
    std::map<std::string, const NamedCurve *> by_name;
    for (const auto &c : curves) {
        by_name[c.name] = &c;
    }
    const NamedCurve &f = *by_name.at("F");
    const NamedCurve &a = *by_name.at("A");
    const NamedCurve &marginal = *by_name.at("none");

    out.checks.push_back(at_least("F_visibility", envelope_visibility(out.config, f.curve), 0.99));
    out.checks.push_back(at_least("A_visibility", envelope_visibility(out.config, a.curve), 0.99));
    out.checks.push_back(at_least("F_centre_is_maximum", centre_ratio(f.curve), 1.0 - 1e-9));
    out.checks.push_back(at_most("A_centre_is_dark", centre_ratio(a.curve), 0.01));
    const double marginal_v = envelope_visibility(out.config, marginal.curve);
    out.checks.push_back(at_most("marginal_visibility", marginal_v, 0.01));
    out.checks.push_back(at_least("concurrence_from_marginal_visibility",
                                  concurrence_from_marginal_visibility(marginal_v), 0.99));

    const double period = central_minima_spacing(parse_scan_csv(f.csv));
    const double first_zero = 0.5 * central_minima_spacing(parse_scan_csv(marginal.csv));
    out.metrics["fringe_period_mm"] = period;
    out.metrics["envelope_first_zero_mm"] = first_zero;
    out.checks.push_back(within_relative("fringe_period_mm", period, kFringePeriodMm, 0.01));
    out.checks.push_back(within_relative("envelope_first_zero_mm", first_zero, kFirstZeroMm, 0.01));

    double expected_total = 0.0;
    for (const NamedCurve *c : {&f, &a}) {
        for (const auto &pt : c->curve.points) {
            expected_total += pt.p_expected * c->curve.conditioning_probability;
        }
    }
    const std::uint64_t seed = out.config.acquisition.seed;
    const double scale = kEstimatorCoincidences / expected_total;
    std::string csv = "run,on_f,on_a,concurrence\n";
    double sum = 0.0;
    for (std::size_t r = 0; r < kEstimatorRuns; ++r) {
        ConditionalCounts counts;
        for (const NamedCurve *c : {&f, &a}) {
            std::uint64_t total = 0;
            for (std::size_t k = 0; k < c->curve.points.size(); ++k) {
                const AcquisitionSpec acq{
                    1.0, scale, 0.0,
                    child_seed(seed, "estimator:" + std::to_string(r) + ":" + c->name + ":" +
                                         std::to_string(k))};
                total += sample_counts(c->curve.points[k].p_expected * c->curve.conditioning_probability, acq);
            }
            (c == &f ? counts.on_f : counts.on_a) = total;
        }
        const double estimate = concurrence_from_conditional_counts(counts);
        sum += estimate;
        csv += std::to_string(r) + "," + std::to_string(counts.on_f) + "," +
               std::to_string(counts.on_a) + "," + format_double(estimate) + "\n";
    }
    const double mean = sum / kEstimatorRuns;
    out.metrics["conditional_counts_concurrence_mean"] = mean;
    out.checks.push_back(within("conditional_counts_concurrence_mean", mean, 1.0, 0.02));
    emit(out, "estimator_runs.csv", csv);
}

struct Bundle {
    std::function<void(ScenarioConfig &)> preset;
    std::function<void(CommandOutput &)> run;
};

void partial_source(ScenarioConfig &c) {
    c.source.a = 0.89;
    c.source.b = 0.46;
    c.source.phase_pol = 0.37 * 180.0;
}

void erase_at(ScenarioConfig &c, double degrees) {
    c.eraser.circular.reset();
    c.eraser.projector_angle_deg = degrees;
}

void acquisition(ScenarioConfig &c, double duration, double rate) {
    c.acquisition.duration_s = duration;
    c.acquisition.pair_rate_hz = rate;
}

const std::map<std::string, Bundle> &bundles() {
    static const std::map<std::string, Bundle> table{
        {"fig2c_truth_table", {[](ScenarioConfig &) {}, truth_table}},
        {"fig2d_outputs",
         {[](ScenarioConfig &c) {
              c.scan.target = "cnot_output";
              c.scan.conditioning = {"none"};
              c.scan.points = 3001;
              acquisition(c, 10.0, 1e4);
          },
          cnot_outputs}},
        {"fig2e_phase", {[](ScenarioConfig &) {}, phase_signature}},
        {"fig3c_bell_pol",
         {[](ScenarioConfig &c) {
              c.tomography.target = "source_pol";
              acquisition(c, 300.0, 4.2);
          },
          tomography_checks}},
        {"fig3d_bell_hes",
         {[](ScenarioConfig &c) { acquisition(c, 600.0, 1.8); },
          [](CommandOutput &out) {
              tomography_checks(out);
              offset_sweep(out);
          }}},
        {"fig3e_partial_pol",
         {[](ScenarioConfig &c) {
              partial_source(c);
              c.tomography.target = "source_pol";
              acquisition(c, 300.0, 4.2);
          },
          tomography_checks}},
        {"fig3f_partial_hes",
         {[](ScenarioConfig &c) {
              partial_source(c);
              erase_at(c, 45.0);
              acquisition(c, 600.0, 1.8);
          },
          [](CommandOutput &out) {
              tomography_checks(out);
              hes_phase_check(out, 0.87);
          }}},
        {"fig3g_concentrated",
         {[](ScenarioConfig &c) {
              partial_source(c);
              erase_at(c, rad_to_deg(concentration_angle(c.source_params().b)));
              acquisition(c, 1000.0, 0.98);
          },
          [](CommandOutput &out) {
              tomography_checks(out);
              concentration(out);
              hes_phase_check(out, 0.87);
          }}},
        {"schmidt_scan",
         {[](ScenarioConfig &c) {
              c.scan.target = "source_spatial";
              c.scan.conditioning = {"F", "A", "none"};
              c.scan.points = 3001;
              acquisition(c, 10.0, 1e4);
          },
          schmidt}},
    };
    return table;
}

}  // namespace

const std::vector<std::string> &bundle_names() {
    static const std::vector<std::string> names{
        "fig2c_truth_table", "fig2d_outputs",     "fig2e_phase",
        "fig3c_bell_pol",    "fig3d_bell_hes",    "fig3e_partial_pol",
        "fig3f_partial_hes", "fig3g_concentrated", "schmidt_scan"};
    return names;
}

ScenarioConfig bundle_config(const std::string &bundle) {
    const auto it = bundles().find(bundle);
    if (it == bundles().end()) {
        std::string list;
        for (const auto &n : bundle_names()) {
            list += (list.empty() ? "" : ", ") + n;
        }
        throw ConfigError("bundle", "unknown bundle \"" + bundle + "\"; available: " + list);
    }
    ScenarioConfig c;
    c.outputs.directory = bundle;
    it->second.preset(c);
    c.validate();
    return c;
}

CommandOutput cmd_reproduce(const std::string &bundle, const std::optional<ScenarioConfig> &config) {
    ScenarioConfig c = config ? *config : bundle_config(bundle);
    if (config) {
        bundle_config(bundle);
    }
    c.validate();
    CommandOutput out = begin_output("reproduce", bundle, c);
    bundles().at(bundle).run(out);
    emit(out, "metrics.json", dump(out.metrics));
    if (out.exit_code == kExitOk && !out.all_checks_pass()) {
        out.exit_code = kExitTargetMissed;
        out.message = "bundle " + bundle + " missed one or more targets";
    }
    return out;
}

}  // namespace hybrident
