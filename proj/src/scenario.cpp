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

#include "hybrident/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hybrident {

namespace {

using nlohmann::ordered_json;

std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const ordered_json &obj, const std::string &path,
                std::initializer_list<const char *> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(path.empty() ? "config" : path, "expected an object");
    }
    for (const auto &item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char *k) { return item.key() == k; });
        if (!known) {
            throw ConfigError(join(path, item.key()), "unknown key");
        }
    }
}

void read(const ordered_json &obj, const std::string &path, const char *key, double &out) {
    if (!obj.contains(key)) {
        return;
    }
    const auto &v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(join(path, key), "expected a number");
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
        throw ConfigError(join(path, key), "must be finite");
    }
}

template <typename Int>
void read_count(const ordered_json &v, const std::string &field, Int &out) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(field, "expected a non-negative integer");
    }
    out = static_cast<Int>(v.get<std::uint64_t>());
}

void read(const ordered_json &obj, const std::string &path, const char *key, std::size_t &out) {
    if (obj.contains(key)) {
        read_count(obj.at(key), join(path, key), out);
    }
}

void read_seed(const ordered_json &obj, const std::string &path, const char *key, std::uint64_t &out) {
    if (obj.contains(key)) {
        read_count(obj.at(key), join(path, key), out);
    }
}

void read(const ordered_json &obj, const std::string &path, const char *key, bool &out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(join(path, key), "expected true or false");
    }
    out = obj.at(key).get<bool>();
}

void read(const ordered_json &obj, const std::string &path, const char *key, std::string &out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_string()) {
        throw ConfigError(join(path, key), "expected a string");
    }
    out = obj.at(key).get<std::string>();
}

void read(const ordered_json &obj, const std::string &path, const char *key,
          std::vector<std::string> &out) {
    if (!obj.contains(key)) {
        return;
    }
    const auto &v = obj.at(key);
    if (!v.is_array()) {
        throw ConfigError(join(path, key), "expected an array of strings");
    }
    out.clear();
    for (const auto &e : v) {
        if (!e.is_string()) {
            throw ConfigError(join(path, key), "expected an array of strings");
        }
        out.push_back(e.get<std::string>());
    }
}

const ordered_json &section(const ordered_json &doc, const char *key) {
    static const ordered_json empty = ordered_json::object();
    return doc.contains(key) ? doc.at(key) : empty;
}

bool contains_name(const std::vector<std::string> &names, const std::string &name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> polarization_names() {
    std::vector<std::string> out;
    for (const auto &basis : basis_catalog().polarization) {
        for (const auto &s : basis.states) {
            out.push_back(s.name);
        }
    }
    return out;
}

std::vector<std::string> spatial_names(std::size_t slits) {
    std::vector<std::string> out;
    if (slits == 2) {
        for (const auto &basis : basis_catalog().spatial) {
            for (const auto &s : basis.states) {
                out.push_back(s.name);
            }
        }
    } else {
        for (std::size_t k = 0; k < slits; ++k) {
            out.push_back("F" + std::to_string(k));
        }
    }
    return out;
}

void require(bool ok, const std::string &field, const std::string &message) {
    if (!ok) {
        throw ConfigError(field, message);
    }
}

void require_positive(double v, const std::string &field) {
    require(std::isfinite(v) && v > 0.0, field, "must be positive");
}

}  // namespace

bool ScenarioConfig::Outputs::wants(const std::string &format) const {
    return contains_name(formats, format);
}

void ScenarioConfig::validate() const {
    const std::initializer_list<std::pair<const char *, double>> magnitudes{
        {"source.a", source.a}, {"source.b", source.b}, {"source.c", source.c}, {"source.d", source.d}};
    for (const auto &[name, value] : magnitudes) {
        require(std::isfinite(value) && value >= 0.0, name, "must be a non-negative magnitude");
    }
    require(source.a > 0.0 || source.b > 0.0, "source.b", "a and b cannot both be zero");
    require(source.c > 0.0 || source.d > 0.0, "source.d", "c and d cannot both be zero");
    require(std::isfinite(source.phase_pol), "source.phase_pol", "must be finite");
    require(std::isfinite(source.phase_spatial), "source.phase_spatial", "must be finite");

    require(qudit.D == 2 || qudit.D == 4 || qudit.D == 8, "qudit.D", "must be 2, 4 or 8");
    require(qudit.j < qudit.D, "qudit.j", "must be below qudit.D");

    if (eraser.variant == "irreversible") {
        require(eraser.projector_angle_deg.has_value() != eraser.circular.has_value(),
                "eraser.projector_angle_deg",
                "set exactly one of projector_angle_deg and circular");
        if (eraser.projector_angle_deg) {
            require(std::isfinite(*eraser.projector_angle_deg), "eraser.projector_angle_deg",
                    "must be finite");
        }
        if (eraser.circular) {
            require(*eraser.circular == "L" || *eraser.circular == "R", "eraser.circular",
                    "must be \"L\" or \"R\"");
        }
        if (eraser.idler_filter_mode) {
            require(*eraser.idler_filter_mode < slits(), "eraser.idler_filter_mode",
                    "must be below the slit count " + std::to_string(slits()));
        }
    } else if (eraser.variant == "reversible") {
        require(!eraser.projector_angle_deg && !eraser.circular, "eraser.projector_angle_deg",
                "not used by the reversible eraser");
        require(!eraser.idler_filter_mode, "eraser.idler_filter_mode",
                "not used by the reversible eraser");
        require(!qudit.enabled, "qudit.enabled", "the reversible eraser is two-qubit only");
    } else {
        throw ConfigError("eraser.variant", "must be \"irreversible\" or \"reversible\"");
    }

    for (std::size_t k = 0; k < 2; ++k) {
        require(std::isfinite(noise.qwp_offset_deg[k]) && std::abs(noise.qwp_offset_deg[k]) <= 90.0,
                "noise.qwp_offset_deg", "each offset must lie in [-90, 90]");
    }
    require(std::isfinite(noise.retardance_error) && std::abs(noise.retardance_error) < 180.0,
            "noise.retardance_error", "must lie in (-180, 180)");
    require(noise.werner_p >= 0.0 && noise.werner_p <= 1.0, "noise.werner_p",
            "must lie in [0, 1]");
    require(std::isfinite(noise.background_rate) && noise.background_rate >= 0.0,
            "noise.background_rate", "must be non-negative");

    require_positive(acquisition.duration_s, "acquisition.duration_s");
    require_positive(acquisition.pair_rate_hz, "acquisition.pair_rate_hz");

    require_positive(geometry.slit_width_um, "geometry.slit_width_um");
    require_positive(geometry.separation_um, "geometry.separation_um");
    require_positive(geometry.wavelength_nm, "geometry.wavelength_nm");
    require_positive(geometry.focal_length_mm, "geometry.focal_length_mm");
    require(std::isfinite(geometry.detector_slit_um) && geometry.detector_slit_um >= 0.0,
            "geometry.detector_slit_um", "must be non-negative");
    require(geometry.separation_um > geometry.slit_width_um, "geometry.separation_um",
            "must exceed geometry.slit_width_um");
    require(geometry.detector_slit_um < 1000.0, "geometry.detector_slit_um",
            "must be below 1000");

    require(!outputs.directory.empty(), "outputs.directory", "must not be empty");
    require(!outputs.formats.empty(), "outputs.formats", "must list at least one format");
    std::set<std::string> seen;
    for (const auto &f : outputs.formats) {
        require(f == "csv" || f == "json", "outputs.formats", "unknown format \"" + f + "\"");
        require(seen.insert(f).second, "outputs.formats", "duplicate format \"" + f + "\"");
    }

    require(scan.target == "source_spatial" || scan.target == "final" ||
                scan.target == "cnot_output",
            "scan.target", "must be source_spatial, final or cnot_output");
    require(contains_name({"HF", "HA", "VF", "VA"}, scan.input), "scan.input",
            "must be HF, HA, VF or VA");
    require(!scan.conditioning.empty(), "scan.conditioning", "must list at least one entry");
    seen.clear();
    for (const auto &c : scan.conditioning) {
        require(seen.insert(c).second, "scan.conditioning", "duplicate entry \"" + c + "\"");
    }
    require(std::isfinite(scan.half_width_mm) && scan.half_width_mm > 0.0 &&
                scan.half_width_mm <= 4.5,
            "scan.half_width_mm", "must lie in (0, 4.5]");
    require(scan.points >= 3 && scan.points <= 200001, "scan.points", "must lie in [3, 200001]");

    require(tomography.target == "source_pol" || tomography.target == "final", "tomography.target",
            "must be source_pol or final");
    try {
        projector_set_kind_from_string(tomography.projector_set);
    } catch (const std::invalid_argument &) {
        throw ConfigError("tomography.projector_set", "must be overcomplete36 or minimal16");
    }
    require(tomography.bootstrap_resamples == 0 ||
                (tomography.bootstrap_resamples >= 10 && tomography.bootstrap_resamples <= 100000),
            "tomography.bootstrap_resamples", "must be 0 or lie in [10, 100000]");
    require(std::isfinite(tomography.tol) && tomography.tol > 0.0 && tomography.tol <= 1e-2,
            "tomography.tol", "must lie in (0, 0.01]");
    require(tomography.max_iter >= 1 && tomography.max_iter <= 10000000, "tomography.max_iter",
            "must lie in [1, 10000000]");
}

void ScenarioConfig::validate_for(const std::string &command) const {
    validate();
    if (command == "scan") {
        std::vector<std::string> allowed{"none"};
        if (scan.target == "source_spatial") {
            for (const auto &n : spatial_names(slits())) {
                allowed.push_back(n);
            }
        } else {
            for (const auto &n : polarization_names()) {
                allowed.push_back(n);
            }
        }
        for (const auto &c : scan.conditioning) {
            require(contains_name(allowed, c), "scan.conditioning",
                    "\"" + c + "\" is not a valid conditioning for " + scan.target);
        }
        if (scan.target == "cnot_output") {
            require(!qudit.enabled, "scan.target", "cnot_output scans are two-slit only");
        }
        if (scan.target == "final") {
            require(eraser.variant == "irreversible", "scan.target",
                    "final scans need the irreversible eraser");
        }
    }
    if (command == "tomo" && tomography.target == "final") {
        require(!qudit.enabled, "tomography.target", "final-state tomography is two-qubit only");
        require(eraser.variant == "reversible" || eraser.idler_filter_mode.has_value(),
                "tomography.target", "final-state tomography needs eraser.idler_filter_mode");
    }
}

SourceParams ScenarioConfig::source_params() const {
    return SourceParams::from_magnitudes(source.a, source.b, deg_to_rad(source.phase_pol), source.c,
                                         source.d, deg_to_rad(source.phase_spatial));
}

Ket ScenarioConfig::source_ket() const {
    const SourceParams p = source_params();
    if (eraser.variant == "reversible") {
        return generic_initial(p.a, p.b);
    }
    if (qudit.enabled) {
        return qudit_source(qudit.D, p.a, p.b, qudit.j);
    }
    return hyper_source(p);
}

EraserSpec ScenarioConfig::eraser_spec() const {
    if (eraser.variant == "reversible") {
        return EraserSpec::reversible();
    }
    CVector state;
    if (eraser.projector_angle_deg) {
        state = pol::linear(deg_to_rad(*eraser.projector_angle_deg));
    } else {
        state = *eraser.circular == "L" ? pol::L() : pol::R();
    }
    return EraserSpec::irreversible(state, eraser.idler_filter_mode);
}

NoiseSpec ScenarioConfig::noise_spec() const {
    return {deg_to_rad(noise.qwp_offset_deg[0]), deg_to_rad(noise.qwp_offset_deg[1]),
            deg_to_rad(noise.retardance_error), noise.werner_p};
}

AcquisitionSpec ScenarioConfig::acquisition_spec() const {
    return {acquisition.duration_s, acquisition.pair_rate_hz, noise.background_rate,
            acquisition.seed};
}

OpticsGeometry ScenarioConfig::optics() const {
    OpticsGeometry g;
    g.slit_width = geometry.slit_width_um * 1e-6;
    g.slit_separation = geometry.separation_um * 1e-6;
    g.wavelength = geometry.wavelength_nm * 1e-9;
    g.focal_length = geometry.focal_length_mm * 1e-3;
    g.slit_count = slits();
    g.detector_width = geometry.detector_slit_um * 1e-6;
    return g;
}

MleOptions ScenarioConfig::mle_options() const {
    return {tomography.tol, tomography.max_iter};
}

ScenarioConfig parse_scenario(const ordered_json &doc) {
    check_keys(doc, "", {"source", "eraser", "qudit", "noise", "acquisition", "geometry", "outputs",
                         "scan", "tomography"});
    ScenarioConfig c;

    const auto &src = section(doc, "source");
    check_keys(src, "source", {"a", "b", "phase_pol", "c", "d", "phase_spatial"});
    read(src, "source", "a", c.source.a);
    read(src, "source", "b", c.source.b);
    read(src, "source", "phase_pol", c.source.phase_pol);
    read(src, "source", "c", c.source.c);
    read(src, "source", "d", c.source.d);
    read(src, "source", "phase_spatial", c.source.phase_spatial);

    const auto &er = section(doc, "eraser");
    check_keys(er, "eraser", {"variant", "projector_angle_deg", "circular", "idler_filter_mode"});
    read(er, "eraser", "variant", c.eraser.variant);
    const bool reversible = c.eraser.variant == "reversible";
    const bool angle_given = er.contains("projector_angle_deg");
    const bool circular_given = er.contains("circular");
    if (angle_given || circular_given || reversible) {
        c.eraser.projector_angle_deg.reset();
        c.eraser.circular.reset();
    }
    if (angle_given && !er.at("projector_angle_deg").is_null()) {
        double angle = 0.0;
        read(er, "eraser", "projector_angle_deg", angle);
        c.eraser.projector_angle_deg = angle;
    }
    if (circular_given && !er.at("circular").is_null()) {
        std::string hand;
        read(er, "eraser", "circular", hand);
        c.eraser.circular = hand;
    }
    if (er.contains("idler_filter_mode")) {
        if (er.at("idler_filter_mode").is_null()) {
            c.eraser.idler_filter_mode.reset();
        } else {
            std::size_t mode = 0;
            read(er, "eraser", "idler_filter_mode", mode);
            c.eraser.idler_filter_mode = mode;
        }
    } else if (reversible) {
        c.eraser.idler_filter_mode.reset();
    }

    const auto &qd = section(doc, "qudit");
    check_keys(qd, "qudit", {"enabled", "D", "j"});
    read(qd, "qudit", "enabled", c.qudit.enabled);
    read(qd, "qudit", "D", c.qudit.D);
    read(qd, "qudit", "j", c.qudit.j);

    const auto &nz = section(doc, "noise");
    check_keys(nz, "noise", {"qwp_offset_deg", "retardance_error", "werner_p", "background_rate"});
    if (nz.contains("qwp_offset_deg")) {
        const auto &pair = nz.at("qwp_offset_deg");
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ConfigError("noise.qwp_offset_deg", "expected a pair of numbers");
        }
        c.noise.qwp_offset_deg = {pair[0].get<double>(), pair[1].get<double>()};
    }
    read(nz, "noise", "retardance_error", c.noise.retardance_error);
    read(nz, "noise", "werner_p", c.noise.werner_p);
    read(nz, "noise", "background_rate", c.noise.background_rate);

    const auto &aq = section(doc, "acquisition");
    check_keys(aq, "acquisition", {"duration_s", "pair_rate_hz", "seed"});
    read(aq, "acquisition", "duration_s", c.acquisition.duration_s);
    read(aq, "acquisition", "pair_rate_hz", c.acquisition.pair_rate_hz);
    read_seed(aq, "acquisition", "seed", c.acquisition.seed);

    const auto &ge = section(doc, "geometry");
    check_keys(ge, "geometry", {"slit_width_um", "separation_um", "wavelength_nm", "focal_length_mm",
                                "detector_slit_um"});
    read(ge, "geometry", "slit_width_um", c.geometry.slit_width_um);
    read(ge, "geometry", "separation_um", c.geometry.separation_um);
    read(ge, "geometry", "wavelength_nm", c.geometry.wavelength_nm);
    read(ge, "geometry", "focal_length_mm", c.geometry.focal_length_mm);
    read(ge, "geometry", "detector_slit_um", c.geometry.detector_slit_um);

    const auto &out = section(doc, "outputs");
    check_keys(out, "outputs", {"directory", "formats"});
    read(out, "outputs", "directory", c.outputs.directory);
    read(out, "outputs", "formats", c.outputs.formats);

    const auto &sc = section(doc, "scan");
    check_keys(sc, "scan", {"target", "input", "conditioning", "half_width_mm", "points"});
    read(sc, "scan", "target", c.scan.target);
    read(sc, "scan", "input", c.scan.input);
    read(sc, "scan", "conditioning", c.scan.conditioning);
    read(sc, "scan", "half_width_mm", c.scan.half_width_mm);
    read(sc, "scan", "points", c.scan.points);

    const auto &tm = section(doc, "tomography");
    check_keys(tm, "tomography", {"target", "projector_set", "bootstrap_resamples", "tol", "max_iter"});
    read(tm, "tomography", "target", c.tomography.target);
    read(tm, "tomography", "projector_set", c.tomography.projector_set);
    read(tm, "tomography", "bootstrap_resamples", c.tomography.bootstrap_resamples);
    read(tm, "tomography", "tol", c.tomography.tol);
    read(tm, "tomography", "max_iter", c.tomography.max_iter);

    c.validate();
    return c;
}

ordered_json scenario_to_json(const ScenarioConfig &c) {
    ordered_json j;
    j["source"] = {{"a", c.source.a},       {"b", c.source.b}, {"phase_pol", c.source.phase_pol},
                   {"c", c.source.c},       {"d", c.source.d},
                   {"phase_spatial", c.source.phase_spatial}};
    ordered_json eraser;
    eraser["variant"] = c.eraser.variant;
    eraser["projector_angle_deg"] =
        c.eraser.projector_angle_deg ? ordered_json(*c.eraser.projector_angle_deg) : ordered_json();
    eraser["circular"] = c.eraser.circular ? ordered_json(*c.eraser.circular) : ordered_json();
    eraser["idler_filter_mode"] =
        c.eraser.idler_filter_mode ? ordered_json(*c.eraser.idler_filter_mode) : ordered_json();
    j["eraser"] = eraser;
    j["qudit"] = {{"enabled", c.qudit.enabled}, {"D", c.qudit.D}, {"j", c.qudit.j}};
    j["noise"] = {{"qwp_offset_deg", {c.noise.qwp_offset_deg[0], c.noise.qwp_offset_deg[1]}},
                  {"retardance_error", c.noise.retardance_error},
                  {"werner_p", c.noise.werner_p},
                  {"background_rate", c.noise.background_rate}};
    j["acquisition"] = {{"duration_s", c.acquisition.duration_s},
                        {"pair_rate_hz", c.acquisition.pair_rate_hz},
                        {"seed", c.acquisition.seed}};
    j["geometry"] = {{"slit_width_um", c.geometry.slit_width_um},
                     {"separation_um", c.geometry.separation_um},
                     {"wavelength_nm", c.geometry.wavelength_nm},
                     {"focal_length_mm", c.geometry.focal_length_mm},
                     {"detector_slit_um", c.geometry.detector_slit_um}};
    j["outputs"] = {{"directory", c.outputs.directory}, {"formats", c.outputs.formats}};
    j["scan"] = {{"target", c.scan.target},
                 {"input", c.scan.input},
                 {"conditioning", c.scan.conditioning},
                 {"half_width_mm", c.scan.half_width_mm},
                 {"points", c.scan.points}};
    j["tomography"] = {{"target", c.tomography.target},
                       {"projector_set", c.tomography.projector_set},
                       {"bootstrap_resamples", c.tomography.bootstrap_resamples},
                       {"tol", c.tomography.tol},
                       {"max_iter", c.tomography.max_iter}};
    return j;
}

}  // namespace hybrident
