#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ambiprobe/eval/report.hpp"

namespace ambiprobe::cli {

// One directional comparison between cosine-table cells.
struct OrderingCheck {
  std::string name;
  std::string description;
  double left = 0.0;
  double right = 0.0;
  bool holds = false;
};

// Mean of the cell (kind, row, task) across bundles; empty when any bundle
// lacks it.
std::optional<double> averaged_cell(const std::vector<eval::ReportBundle>& bundles,
                                    const std::string& kind, const std::string& row,
                                    const std::string& task);

// The three orderings checked at desk scale:
//   (a) current layer-1 WORD above current layer-3 WORD;
//   (b) the weakest current-state WORD cell above the strongest
//       predictive-state WORD cell;
//   (c) layer-averaged predictive SUB above layer-averaged predictive WORD.
// Cell means are averaged across `bundles` first. Checks whose cells are
// missing are omitted.
std::vector<OrderingCheck> directional_checks(const std::vector<eval::ReportBundle>& bundles);

std::string format_checks(const std::vector<OrderingCheck>& checks);

// Inverse of eval::results_json for the fields it records. Per-item scatter
// data is not part of the file and stays empty.
eval::ReportBundle bundle_from_json(std::string_view text);

}  // namespace ambiprobe::cli
