#pragma once

#include <ostream>
#include <stdexcept>

#include "twistwalk/run_config.hpp"

namespace twistwalk {

enum ExitCode { kExitPass = 0, kExitSuiteFailure = 1, kExitUsage = 2, kExitInternal = 3 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Extra grid horizon kept past K so level-m passages up to K exist.
inline constexpr double kIntegrationMargin = 0.25;

// Each command writes to config.output (stdout when empty) and returns an exit code.
int cmd_generate(const RunConfig& config);
int cmd_integrate(const RunConfig& config);
int cmd_diagnose(const RunConfig& config);
int cmd_embed(const RunConfig& config);

int run_command(const RunConfig& config);

}  // namespace twistwalk
