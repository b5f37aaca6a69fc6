#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/config.hpp"
#include "skewlab/error.hpp"

namespace skewlab {

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> bins;
  std::optional<std::size_t> steps;
  std::optional<int> workers;
};

void apply_overrides(SystemConfig& config, const Overrides& overrides);

const std::vector<std::string>& subcommands();

/// 0 success, 1 I/O or parse, 2 genericity failure, 3 convergence failure,
/// 4 structural contradiction.
int exit_code(ErrorKind kind);

/// Runs one subcommand, writing artifacts into config.output.directory and a
/// summary to `out`. Errors are reported on `err` and mapped to exit codes.
int run_analysis(const SystemConfig& config, const std::string& subcommand, std::ostream& out, std::ostream& err);

/// load_config + overrides + run_analysis.
int run_file(const std::filesystem::path& config_path, const std::string& subcommand, const Overrides& overrides,
             std::ostream& out, std::ostream& err);

}  // namespace skewlab
