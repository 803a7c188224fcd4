#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ambiprobe/eval/metrics.hpp"
#include "ambiprobe/eval/neighbors.hpp"

namespace ambiprobe::eval {

struct ReportBundle {
  std::vector<EvalCell> cells;
  std::vector<NeighborReport> neighbors;
  std::vector<CorrelationResult> correlations;
  // Named scalar statistics, e.g. neighbour overlaps.
  std::map<std::string, double> statistics;
  std::string lm_fingerprint;
  // Artifact or configuration name -> hex SHA-256.
  std::map<std::string, std::string> config_hashes;
};

// Machine-readable results: stable key order, no timestamps, so identical
// inputs give identical bytes.
std::string results_json(const ReportBundle& bundle);
// Plain-text table with inputs as rows and tasks as columns.
std::string summary_text(const ReportBundle& bundle);
// "item_id,cos_w_s,cos_pred_target" rows of one correlation.
std::string scatter_csv(const CorrelationResult& correlation);

// Writes results.json, summary.txt and scatter-<name>.csv into `dir`.
// Throws ContractError without cells and IoError when `dir` is unwritable.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace ambiprobe::eval
