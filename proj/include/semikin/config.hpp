#pragma once

#include <string>

#include "semikin/problems.hpp"
#include "semikin/train.hpp"

namespace semikin {

/// Fully-resolved run settings; defaults are the published experiment values.
struct RunConfig {
    ProblemConfig problem;
    TrainConfig train;
    int data_n = 100;
    uint64_t data_seed = 9001;
    ObsScenario scenario = ObsScenario::Full;
    std::string out_dir = "out";
};

/// Flat `key = value` text with dotted sections and '#' comments.  Unknown
/// keys, malformed values and wrong types are rejected with the key path.
RunConfig parse_config_file(const std::string& path);
RunConfig default_config();

/// Apply one `key=value` override (same key set as the file format).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Echo every key in canonical order (a parseable config file).
void write_config_echo(const RunConfig& cfg, const std::string& path);

}  // namespace semikin
