#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace toeplitz_wells::cli {

struct RunOptions {
  int jobs = 1;
};

/// One flat table produced by an experiment. `module` and `operation` name
/// the library call whose numbers fill it.
struct CsvArtifact {
  std::string name;
  std::string module;
  std::string operation;
  std::string content;
};

struct RunResult {
  /// results section of report.json (deterministic)
  json results = json::object();
  std::vector<asymptotics::Verdict> verdicts;
  std::vector<CsvArtifact> tables;
  /// short human-readable lines for the terminal summary
  std::vector<std::string> summary;

  bool passed() const;
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

json verdicts_to_json(const std::vector<asymptotics::Verdict>& verdicts);

/// Complete deterministic report: canonical config, results, verdicts and the
/// table provenance.
json build_report(const ExperimentConfig& config, const RunResult& result);

}  // namespace toeplitz_wells::cli
