#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bkt_irt::cli {

/// Reproducibility record written next to every output file.
struct RunManifest {
  std::vector<std::string> command_line;
  std::vector<std::uint64_t> seeds;
  std::string version;
  double wall_seconds = 0.0;
  /// (path, lowercase hex SHA-256)
  std::vector<std::pair<std::string, std::string>> outputs;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a domain error, 2 on an argument or I/O error; errors are
/// printed to `err` as a single `Code: message` line.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bkt_irt::cli
