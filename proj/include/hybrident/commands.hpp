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

#ifndef HYBRIDENT_COMMANDS_HPP
#define HYBRIDENT_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybrident/scenario.hpp"
#include "json.hpp"

namespace hybrident {

inline constexpr const char *kToolVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitInvalidConfig = 2,
    kExitNullProjection = 3,
    kExitNotConverged = 4,
    kExitTargetMissed = 5,
};

struct Artifact {
    std::string file;
    std::string content;
};

struct TargetCheck {
    std::string name;
    double value = 0.0;
    std::string target;
    bool pass = false;
};

/// Everything a command produces, held in memory until written.
struct CommandOutput {
    std::string command;
    std::string bundle;
    ScenarioConfig config;
    std::vector<Artifact> artifacts;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<TargetCheck> checks;
    int exit_code = kExitOk;
    std::string message;

    const Artifact &artifact(const std::string &file) const;
    bool all_checks_pass() const;
};

/// Final and stage states, success probability, entanglement and fidelity metrics.
CommandOutput cmd_generate(const ScenarioConfig &config);
/// One curve CSV per entry of scan.conditioning.
CommandOutput cmd_scan(const ScenarioConfig &config);
/// Counts CSV and reconstruction JSON; kExitNotConverged if the MLE stalls.
CommandOutput cmd_tomo(const ScenarioConfig &config);

const std::vector<std::string> &bundle_names();
/// Preset scenario of a bundle; throws ConfigError("bundle") listing the names.
ScenarioConfig bundle_config(const std::string &bundle);
/// Runs a bundle with its preset or with `config` (e.g. from a manifest).
CommandOutput cmd_reproduce(const std::string &bundle,
                            const std::optional<ScenarioConfig> &config = std::nullopt);

/// State vector named in the basis catalog ("H", "F+iA", ...) or a mode "F<k>".
CVector named_state(Dof dof, const std::string &name, std::size_t slits = 2);

/// Config echo embedded in data artifacts; omits the output location.
nlohmann::ordered_json physics_echo(const ScenarioConfig &config);

std::string checks_csv(const std::vector<TargetCheck> &checks);
std::string checks_table(const std::vector<TargetCheck> &checks);

nlohmann::ordered_json make_manifest(const CommandOutput &output, const std::string &timestamp);

/// A manifest or a bare scenario document.
struct LoadedConfig {
    ScenarioConfig config;
    std::optional<std::string> command;
    std::optional<std::string> bundle;
};
LoadedConfig load_config(const nlohmann::ordered_json &document);

/**
 * Writes every artifact, checks.csv when there are checks, and
 * manifest.json into `directory`, creating it if needed.
 */
void write_output(const std::filesystem::path &directory, const CommandOutput &output,
                  const std::string &timestamp);

std::string utc_timestamp();

}  // namespace hybrident

#endif  // HYBRIDENT_COMMANDS_HPP
