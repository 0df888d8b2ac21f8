#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zmeso/config.hpp"

namespace zmeso {

const std::vector<std::string>& subcommand_names();

// Runs one experiment, writing artifacts and a manifest under cfg.output_dir.
// Module errors propagate; the caller maps them to exit codes.
void run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);

// A remediation hint for a module error message, or "".
std::string remediation_hint(const std::exception& e);

}  // namespace zmeso
