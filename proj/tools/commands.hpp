#pragma once

// In-process implementation of every CLI command. main.cpp only parses
// flags into a RunConfig and prints the result.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace negimag::cli {

enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  int points_per_decade = 200;
  std::optional<double> tol;
  double margin = 1.2;
  double gamma_min = 1e3;
  double gamma_max = 1e8;
  double eps = 1e-6;
  std::optional<std::string> out;
  OutputFormat format = OutputFormat::Json;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPropertyFalse = 2;

struct CommandResult {
  int exit_code = kExitOk;
  /// Document to emit (JSON text or CSV), newline terminated.
  std::string output;
  std::vector<std::string> warnings;
  /// Set when exit_code == kExitError.
  std::string error;
};

const std::vector<std::string>& command_names();

/// Throws InvalidArgument on a bad configuration.
void validate(const RunConfig& cfg);

/// Never throws; library errors become exit code 1.
CommandResult run_command(const RunConfig& cfg);

// Individual commands, returning the report. Each throws on error.
nlohmann::json analyze_report(const RunConfig& cfg, int* exit_code = nullptr);
nlohmann::json stability_report(const RunConfig& cfg, int* exit_code = nullptr);
nlohmann::json design_irc_report(const RunConfig& cfg);
nlohmann::json synth_sf_report(const RunConfig& cfg, int* exit_code = nullptr);

/// %.17g, or empty for a non-finite value.
std::string csv_number(double v);

}  // namespace negimag::cli
