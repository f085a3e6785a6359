#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rydecay/config.hpp"

namespace rydecay {

/// Files written by a command plus its manifest contents.
struct CommandResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json manifest;
};

// Each command writes its CSV files and a JSON manifest into config.out.
CommandResult cmd_coherence(const RunConfig& config);
CommandResult cmd_steady_state(const RunConfig& config);
CommandResult cmd_trajectories(const RunConfig& config);
CommandResult cmd_meanfield(const RunConfig& config);

/// Formats a double with 17 significant digits ('.' decimal point).
std::string format_number(double v);

}  // namespace rydecay
