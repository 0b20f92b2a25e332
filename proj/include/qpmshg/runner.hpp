#pragma once

#include "qpmshg/config.hpp"

namespace qpm {

enum class Command { Modes, Census, Match, Spectrum, Scan, Table, Oracle };

Command parse_command(const std::string& name);  // throws ConfigError

// Dispatch one command; writes artifacts under cfg.output_dir atomically.
// Returns 0 on success; configuration and numerical failures surface as
// ConfigError / NumericalError (mapped to exit codes 2 / 3 by the CLI).
int run_command(Command cmd, const RunConfig& cfg);

}  // namespace qpm
