#pragma once

// Command line front end: file ingestion, configuration and report writing.
// Kept in a library so tests can drive it without spawning processes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsecert/linalg.hpp"

namespace sparsecert::cli {

enum class InputMode { Gram, Data };
enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::string command;
  std::string input;
  InputMode mode = InputMode::Gram;
  /// Unset means the per-command default (on for covariance commands, off
  /// for subset and rip).
  std::optional<bool> center;
  std::optional<int> k;
  std::optional<int> S;
  /// 1-based, as typed by the user.
  std::vector<int> pattern;
  std::optional<double> rho;
  std::string method;
  std::string kind = "sparse-eig";
  int rho_grid = 50;
  double cert_tol = 1e-6;
  double report_tol = 1e-4;
  double eig_tol = 1e-10;
  double eps_rel = 1e-8;
  int lookahead = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::size_t budget = 2'000'000;
  OutputFormat format = OutputFormat::Json;
  std::string out;
  // synth only
  std::string generator = "spiked-uniform";
  int n = 0;
  int p = 0;
  double strength = 1.0;
  double noise = 0.0;
};

enum ExitCode : int { kSuccess = 0, kFailure = 1, kInputError = 2, kBudgetExceeded = 3 };

/// Dense headerless matrix. The delimiter is a comma when the first data line
/// contains one, whitespace otherwise. Blank lines and lines starting with '#'
/// are skipped. Throws ParseError with 1-based positions.
Matrix parse_matrix(std::istream& in);
Matrix read_matrix(const std::string& path);

/// Subtracts column means in place.
void center_columns(Matrix& m);

/// Registers every subcommand and flag on app, writing into config.
void configure(CLI::App& app, RunConfig& config);

/// Executes a parsed configuration. The report goes to out (or to
/// config.out when set); diagnostics go to err. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Builds the report for a configuration without writing it. Throws the
/// library errors unchanged.
nlohmann::json build_report(const RunConfig& config, std::string* csv);

/// Full entry point: argument parsing plus run.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sparsecert::cli
