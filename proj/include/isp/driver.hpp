#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "isp/config.hpp"
#include "isp/io.hpp"

namespace isp {

/// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInput = 2;

struct RunContext {
    std::filesystem::path out_dir;
    int threads = 0;  // 0: OpenMP default
    std::optional<std::uint64_t> seed;
};

struct RunOutcome {
    int exit_code = kExitOk;
    Json report;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand, writes its artifacts and report.json into
/// ctx.out_dir, and maps failures to exit codes.
RunOutcome run_command(const std::string& command, const RunConfig& cfg, const RunContext& ctx);

/// Loads the config first; configuration failures still produce a report.
RunOutcome run_cli(const std::string& command, const std::filesystem::path& config_path, const RunContext& ctx);

/// Random exponential-sum problem (dispersion, potential, two boundary
/// matrices) from {"n", "terms", "amplitude"}; deterministic in the seed.
Json random_problem(const Json& desc, std::uint64_t seed);

}  // namespace isp
