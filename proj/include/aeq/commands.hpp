#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aeq/error.hpp"

namespace aeq {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit code for a failure category.
int exit_code(ErrorCategory c);

/// Flags shared by every command. Unset values fall back to the config file,
/// then to built-in defaults.
struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::size_t jobs = 1;
  bool trace = false;
  std::optional<std::filesystem::path> schema;
  // EP overrides
  std::optional<double> rho;
  std::optional<double> epsilon;
  std::optional<std::size_t> window_max;
};

struct GenerateOptions : CommonOptions {
  std::optional<std::size_t> count;
  std::optional<std::size_t> flow_length;
  bool no_aspiration = false;
};

struct ProfileOptions : CommonOptions {
  std::filesystem::path flow;
};

struct SimulateOptions : CommonOptions {
  std::optional<std::filesystem::path> policy;
  std::filesystem::path flow;
  std::optional<std::string> initial_variant;  // JSON object
};

struct MutateOptions : CommonOptions {
  std::optional<std::filesystem::path> policy;
  std::vector<std::filesystem::path> suites;  // generate output directories
  std::optional<std::filesystem::path> plan;
  std::optional<std::string> initial_variant;
};

struct ReportOptions : CommonOptions {
  std::filesystem::path matrix;
  std::string format = "text";  // text | json | csv
};

/// Each command writes its files under `out` and returns the stdout summary.
/// Failures are thrown as aeq::Error.
std::string cmd_generate(const GenerateOptions& o);
std::string cmd_profile(const ProfileOptions& o);
std::string cmd_simulate(const SimulateOptions& o);
std::string cmd_mutate(const MutateOptions& o);
std::string cmd_report(const ReportOptions& o);

}  // namespace aeq
