#include "ambiprobe/eval/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::eval {

namespace {

constexpr const char* kTasks[] = {"WORD", "SUB", "WORD_SUB"};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

const EvalCell* find_cell(const ReportBundle& b, const std::string& kind, const std::string& row,
                          const std::string& task) {
  for (const auto& c : b.cells) {
    if (c.key.kind == kind && c.key.row == row && c.key.task == task) return &c;
  }
  return nullptr;
}

}  // namespace

std::string results_json(const ReportBundle& bundle) {
  nlohmann::ordered_json j;
  j["format"] = "ambiprobe-results/1";
  j["std_convention"] = "population";
  j["lm_fingerprint"] = bundle.lm_fingerprint;
  auto& hashes = j["config_hashes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : bundle.config_hashes) hashes[k] = v;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : bundle.cells) {
    cells.push_back({{"kind", c.key.kind},
                     {"row", c.key.row},
                     {"task", c.key.task},
                     {"mean", c.mean},
                     {"std", c.std},
                     {"count", c.count},
                     {"excluded", c.excluded}});
  }
  auto& corr = j["correlations"] = nlohmann::ordered_json::array();
  for (const auto& c : bundle.correlations) {
    corr.push_back({{"name", c.name},
                    {"rho", c.rho},
                    {"p_value", c.p_value},
                    {"n", c.n},
                    {"stars", significance_stars(c.p_value)}});
  }
  auto& stats = j["statistics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : bundle.statistics) stats[k] = v;
  auto& nbrs = j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& r : bundle.neighbors) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& n : r.neighbors) list.push_back({{"word", n.word}, {"cosine", n.cosine}});
    nbrs.push_back({{"query", r.query}, {"neighbors", list}});
  }
  return j.dump(2) + "\n";
}

std::string summary_text(const ReportBundle& bundle) {
  std::ostringstream out;
  out << "Probe retrieval: mean cosine (population std)\n\n";
  out << std::left << std::setw(12) << "input";
  for (const char* t : kTasks) out << std::setw(18) << t;
  out << "\n";
  auto row = [&](const std::string& kind, const std::string& name) {
    bool any = false;
    for (const char* t : kTasks) any = any || find_cell(bundle, kind, name, t) != nullptr;
    if (!any) return;
    out << std::setw(12) << name;
    for (const char* t : kTasks) {
      const auto* c = find_cell(bundle, kind, name, t);
      out << std::setw(18) << (c ? fixed(c->mean, 3) + " (" + fixed(c->std, 2) + ")" : "-");
    }
    out << "\n";
  };
  // Rows in table order: baselines, then current and predictive layers.
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& c : bundle.cells) {
    std::pair<std::string, std::string> key{c.key.kind, c.key.row};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
  }
  for (const char* kind : {"baseline", "current", "predictive"}) {
    bool printed = false;
    for (const auto& [k, name] : order) {
      if (k != kind) continue;
      if (!printed && std::string(kind) != "baseline") out << "-- " << kind << "\n";
      printed = true;
      row(k, name);
    }
  }
  if (!bundle.correlations.empty()) {
    out << "\nCorrelation of cos(w, s) with cos(prediction, s)\n";
    for (const auto& c : bundle.correlations) {
      out << "  " << std::setw(28) << c.name << " rho = " << fixed(c.rho, 3)
          << significance_stars(c.p_value) << "  (n = " << c.n << ")\n";
    }
  }
  if (!bundle.statistics.empty()) {
    out << "\nStatistics\n";
    for (const auto& [k, v] : bundle.statistics) out << "  " << std::setw(28) << k << " " << fixed(v, 3) << "\n";
  }
  if (!bundle.neighbors.empty()) {
    out << "\nNearest neighbours\n";
    for (const auto& r : bundle.neighbors) {
      out << "  " << r.query << ":";
      for (std::size_t i = 0; i < r.neighbors.size(); ++i) out << (i ? ", " : " ") << r.neighbors[i].word;
      out << "\n";
    }
  }
  out << "\nLM fingerprint " << bundle.lm_fingerprint << "\n";
  return out.str();
}

std::string scatter_csv(const CorrelationResult& c) {
  std::ostringstream out;
  out << "item_id,cos_w_s,cos_pred_target\n" << std::setprecision(17);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    out << (i < c.item_ids.size() ? c.item_ids[i] : std::to_string(i)) << ',' << c.x[i] << ','
        << c.y[i] << '\n';
  }
  return out.str();
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  if (bundle.cells.empty()) throw ContractError("emit_report: no cells");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("emit_report: cannot create " + dir.string() + ": " + ec.message());
  util::write_file(dir / "results.json", results_json(bundle));
  util::write_file(dir / "summary.txt", summary_text(bundle));
  for (const auto& c : bundle.correlations) {
    util::write_file(dir / ("scatter-" + c.name + ".csv"), scatter_csv(c));
  }
}

}  // namespace ambiprobe::eval
