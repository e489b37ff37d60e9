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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hybrident/commands.hpp"

using namespace hybrident;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string format;
    std::optional<std::uint64_t> seed;
    std::string bundle;
    bool list = false;
};

void add_common(CLI::App *cmd, Options &opt, bool config_required) {
    auto *config = cmd->add_option("--config", opt.config, "scenario JSON or a manifest.json to re-run");
    if (config_required) {
        config->required();
    }
    cmd->add_option("--out", opt.out, "output directory (overrides outputs.directory)");
    cmd->add_option("--seed", opt.seed, "master seed (overrides acquisition.seed)");
    cmd->add_option("--format", opt.format, "comma-separated subset of csv,json");
}

LoadedConfig read_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open " + path);
    }
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    return load_config(doc);
}

void apply_overrides(ScenarioConfig &config, const Options &opt, const std::string &command) {
    if (!opt.out.empty()) {
        config.outputs.directory = opt.out;
    }
    if (opt.seed) {
        config.acquisition.seed = *opt.seed;
    }
    if (!opt.format.empty()) {
        config.outputs.formats.clear();
        std::stringstream ss(opt.format);
        std::string item;
        while (std::getline(ss, item, ',')) {
            config.outputs.formats.push_back(item);
        }
    }
    config.validate_for(command);
}

int run(const std::string &command, const Options &opt) {
    if (command == "reproduce" && opt.list) {
        for (const auto &name : bundle_names()) {
            std::cout << name << "\n";
        }
        return kExitOk;
    }
    std::optional<LoadedConfig> loaded;
    if (!opt.config.empty()) {
        loaded = read_config(opt.config);
    }
    std::string bundle = opt.bundle;
    if (command == "reproduce") {
        if (bundle.empty() && loaded && loaded->bundle) {
            bundle = *loaded->bundle;
        }
        if (bundle.empty()) {
            throw ConfigError("bundle", "name a bundle or pass a bundle manifest via --config");
        }
        if (loaded && loaded->bundle && *loaded->bundle != bundle) {
            throw ConfigError("bundle", "manifest belongs to bundle " + *loaded->bundle);
        }
    }
    ScenarioConfig config = loaded ? loaded->config : bundle_config(bundle);
    apply_overrides(config, opt, command);

    CommandOutput out = command == "generate" ? cmd_generate(config)
                        : command == "scan"   ? cmd_scan(config)
                        : command == "tomo"   ? cmd_tomo(config)
                                              : cmd_reproduce(bundle, config);
    write_output(config.outputs.directory, out, utc_timestamp());
    for (const auto &a : out.artifacts) {
        std::cout << "wrote " << (std::filesystem::path(config.outputs.directory) / a.file).string()
                  << "\n";
    }
    std::cout << out.metrics.dump() << "\n";
    if (!out.checks.empty()) {
        std::cout << checks_table(out.checks);
    }
    if (!out.message.empty()) {
        std::cerr << out.message << "\n";
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hybrid-entanglement eraser simulations: states, scans, tomography, bundles"};
    app.require_subcommand(1);
    Options opt;
    add_common(app.add_subcommand("generate", "run the eraser pipeline and report metrics"), opt, true);
    add_common(app.add_subcommand("scan", "far-field interference scans"), opt, true);
    add_common(app.add_subcommand("tomo", "simulated counts and maximum-likelihood tomography"), opt, true);
    auto *reproduce = app.add_subcommand("reproduce", "emit a named bundle with its pass/fail table");
    add_common(reproduce, opt, false);
    reproduce->add_option("bundle", opt.bundle, "bundle name");
    reproduce->add_flag("--list", opt.list, "list the available bundles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opt);
    } catch (const ConfigError &e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const NullProjectionError &e) {
        std::cerr << "null projection: " << e.what() << "\n";
        return kExitNullProjection;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
