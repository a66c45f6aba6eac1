#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semikin/config.hpp"

namespace semikin {

/// Known experiment names: table1, bp_forward, inverse_full, inverse_partial,
/// ap_sweep.  Settings resolve as defaults -> experiment preset -> config
/// file -> overrides, so flags always win.  Every run directory contains a
/// config echo and the seed; reruns are byte-identical.
void run_experiment(const std::string& name, const std::string& config_path,
                    const std::vector<std::pair<std::string, std::string>>& overrides,
                    const std::vector<uint64_t>& seeds, bool svg = true);

std::vector<std::string> experiment_names();

}  // namespace semikin
