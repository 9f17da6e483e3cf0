#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "homlab/config.hpp"

namespace homlab {

enum ExitCode : int { ExitPass = 0, ExitCheckFailure = 1, ExitConfigError = 2, ExitNumericalFailure = 3 };

struct RunContext {
    std::filesystem::path out_dir = ".";
    int workers = 1;
    std::ostream* log = nullptr;  // one line per check; null for silence
};

const std::vector<std::string>& command_names();

// Runs one workflow command, writes its artifacts and report.json into
// ctx.out_dir and returns the exit code.
int run_command(const std::string& command, const Config& config, const RunContext& ctx);

}  // namespace homlab
