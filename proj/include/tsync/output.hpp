#pragma once

// Run artifacts: log.csv (one row per control step), excitation.csv,
// summary.txt (flat key = value) and the resolved config.ini.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsync/simulator.hpp"

namespace tsync {

inline constexpr const char* kCsvSchemaLine = "# sync_sim csv schema v1";

std::vector<std::string> csv_columns(bool with_diagnostics);

void write_log_csv(std::ostream& os, const std::vector<LogRecord>& log,
                   const std::vector<DiagnosticsRecord>* diagnostics = nullptr);
void write_excitation_csv(std::ostream& os, const std::vector<LogRecord>& log);
void write_summary(std::ostream& os, const RunSummary& summary);

struct CsvTable {
  std::string schema;  // comment line, if present
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Writes every artifact into dir (created if missing). Throws
/// std::runtime_error on I/O failure.
void write_outputs(const RunResult& result, const SimConfig& cfg, const std::filesystem::path& dir,
                   bool with_diagnostics);

struct ExecuteOptions {
  bool diagnostics = false;
  bool quiet = false;
};

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitBarrier = 2, kExitNumeric = 3 };

/// Runs the simulation and writes its outputs. Exit codes: 0 completed,
/// 1 I/O failure, 2 barrier violation, 3 numeric failure.
int execute(const SimConfig& cfg, const std::filesystem::path& out_dir, const ExecuteOptions& opt,
            std::ostream& log_stream);

}  // namespace tsync
