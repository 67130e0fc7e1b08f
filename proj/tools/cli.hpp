#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evopagator/experiments.hpp"

namespace evo::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kConfigError = 2 };

/// Thrown for malformed configuration: unknown keys, wrong types, bad values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies one configuration key to `cfg`. Throws ConfigError for unknown
/// keys or values of the wrong type.
void apply_key(StudyConfig& cfg, const std::string& key, const nlohmann::json& value);

/// Study configurations for `subcommand` ("all" expands to every study) after
/// merging the JSON document and key=value overrides. An override `key=v`
/// applies to every selected study; `study.key=v` to one study.
std::vector<StudyConfig> resolve_configs(const std::string& subcommand, const nlohmann::json& document,
                                         const std::vector<std::string>& overrides);

/// argv without the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evo::cli
