#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "config.hpp"

namespace gridquant::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGridOverflow = 3;
inline constexpr int kExitDivergent = 4;

enum class Command { Run, SweepBits, Ttc, Retrans };

std::optional<Command> parse_command(std::string_view name);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> replicas;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

/// Runs one subcommand. CSV files go to cfg.output, a short summary to `log`.
/// Returns the process exit code; library and config errors propagate as exceptions.
int execute(Command cmd, const ExperimentConfig& cfg, std::ostream& log);

/// Exit code for an exception escaping execute().
int exit_code_for(const std::exception& e);

/// Full command line handling: argv parsing, config loading, execution, error reporting.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridquant::cli
