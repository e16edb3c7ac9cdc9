#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fuplab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 2,
  kComputationFailure = 3,
  kCertificationNegative = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  int threads = 1;                    // 0 = hardware concurrency
};

struct RunResult {
  int exit_code = kSuccess;
  std::vector<std::string> diagnostics;  // validation problems, all of them
  std::string error;                     // computation error, if any
  std::vector<std::filesystem::path> outputs;
};

/// Every schema and cross-field problem in a YAML config; empty when valid.
std::vector<std::string> validate_config(std::string_view yaml_text);

/// Validates, runs the configured command, and writes its CSV outputs plus
/// manifest.json into the output directory.
RunResult run_config(std::string_view yaml_text, const RunOptions& opts);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace fuplab::cli
