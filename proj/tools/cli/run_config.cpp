#include "run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>, std::less<>> kSchema{
    {"run", {"profile", "seed", "out_dir"}},
    {"corpus", {"train", "valid", "test"}},
    {"lm",
     {"embedding_dim", "hidden_sizes", "dropout", "sequence_length", "batch_size", "initial_lr",
      "epochs", "vocab_cap", "clip_norm"}},
    {"extract", {"context"}},
    {"lexsub", {"path", "format", "min_subs", "split", "baseline_window"}},
    {"probes",
     {"grid", "batch_size", "learning_rate", "negatives", "margin", "max_epochs", "patience",
      "tasks", "kinds", "layers"}},
    {"eval", {"neighbors", "overlap_k", "showcase_items"}},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::filesystem::path base) : tree_(tree), base_(std::move(base)) {}

  const std::string* raw(const char* section, const char* key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return nullptr;
    auto value = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    return value ? &value->data() : nullptr;
  }

  [[noreturn]] void fail(const char* section, const char* key, const std::string& why) const {
    throw ConfigError("config [" + std::string(section) + "] " + key + ": " + why);
  }

  template <typename T>
  void number(const char* section, const char* key, T& out) const {
    const auto* v = raw(section, key);
    if (!v) return;
    const auto text = trim(*v);
    T parsed{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (ec != std::errc() || end != text.data() + text.size()) {
      fail(section, key, "cannot parse '" + text + "' as a number");
    }
    out = parsed;
  }

  void text(const char* section, const char* key, std::string& out) const {
    if (const auto* v = raw(section, key)) out = trim(*v);
  }

  void path(const char* section, const char* key, std::filesystem::path& out) const {
    if (const auto* v = raw(section, key)) {
      std::filesystem::path p(trim(*v));
      out = p.is_absolute() ? p : base_ / p;
    }
  }

  template <typename T>
  void list(const char* section, const char* key, std::vector<T>& out) const {
    const auto* v = raw(section, key);
    if (!v) return;
    std::vector<T> parsed;
    for (const auto& item : split_list(*v)) {
      T x{};
      auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (ec != std::errc() || end != item.data() + item.size()) {
        fail(section, key, "cannot parse list entry '" + item + "'");
      }
      parsed.push_back(x);
    }
    out = std::move(parsed);
  }

 private:
  const pt::ptree& tree_;
  std::filesystem::path base_;
};

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    auto known = kSchema.find(section);
    if (known == kSchema.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) {
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
}

template <typename T, typename Parse>
std::vector<T> parse_names(const Reader& r, const char* key, std::vector<T> fallback, Parse parse) {
  const auto* v = r.raw("probes", key);
  if (!v) return fallback;
  std::vector<T> out;
  for (const auto& name : split_list(*v)) out.push_back(parse(name));
  if (out.empty()) r.fail("probes", key, "empty list");
  return out;
}

}  // namespace

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "profile=" << profile << "\nseed=" << seed << "\nlm=" << lm.to_text()
      << "\nextract.context=" << (extract.context == ContextMode::Full ? "full" : "sentence")
      << "\nlexsub.format=" << (lexsub.format == LexsubFormat::Tsv ? "tsv" : "coinco")
      << "\nlexsub.min_subs=" << lexsub.min_subs << "\nlexsub.split=" << lexsub.split[0] << ','
      << lexsub.split[1] << ',' << lexsub.split[2]
      << "\nlexsub.baseline_window=" << lexsub.baseline_window
      << "\nprobes.grid=" << (probes.paper_grid ? "paper" : "fixed")
      << "\nprobes.base=" << probes.base.to_text() << "\nprobes.bindings=";
  for (const auto& b : bindings()) out << b.name() << ' ';
  out << "\neval.neighbors=" << eval.neighbors << "\neval.overlap_k=" << eval.overlap_k
      << "\neval.showcase_items=" << eval.showcase_items << '\n';
  return out.str();
}

std::vector<probe::ProbeBinding> RunConfig::bindings() const {
  std::vector<probe::ProbeBinding> out;
  for (auto kind : probes.kinds) {
    for (auto layer : probes.layers) {
      for (auto task : probes.tasks) out.push_back({task, kind, layer});
    }
  }
  return out;
}

probe::ProbeTrainConfig RunConfig::probe_config(const probe::ProbeBinding& binding) const {
  auto c = probes.base;
  if (probes.paper_grid) {
    const auto cell = probe::paper_grid(binding.task, binding.kind, binding.layer);
    c.batch_size = cell.batch_size;
    c.learning_rate = cell.learning_rate;
  }
  std::uint64_t salt = 1000 + static_cast<std::uint64_t>(binding.task) +
                       3 * static_cast<std::uint64_t>(binding.kind) + 6 * binding.layer;
  c.seed = derive_seed(seed, salt);
  return c;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_schema(tree);
  Reader r(tree, base_dir);
  RunConfig c;

  r.text("run", "profile", c.profile);
  r.number("run", "seed", c.seed);
  if (seed_override) c.seed = *seed_override;
  c.out_dir = base_dir / "out";
  r.path("run", "out_dir", c.out_dir);

  r.path("corpus", "train", c.corpus.train);
  r.path("corpus", "valid", c.corpus.valid);
  r.path("corpus", "test", c.corpus.test);

  c.lm = lm::LMConfig::desk();
  r.number("lm", "embedding_dim", c.lm.embedding_dim);
  r.list("lm", "hidden_sizes", c.lm.hidden_sizes);
  r.number("lm", "dropout", c.lm.dropout);
  r.number("lm", "sequence_length", c.lm.sequence_length);
  r.number("lm", "batch_size", c.lm.batch_size);
  r.number("lm", "initial_lr", c.lm.initial_lr);
  r.number("lm", "epochs", c.lm.epochs);
  r.number("lm", "vocab_cap", c.lm.vocab_cap);
  r.number("lm", "clip_norm", c.lm.clip_norm);
  c.lm.seed = derive_seed(c.seed, 11);
  c.lm.validate();

  std::string context = "full";
  r.text("extract", "context", context);
  if (context == "full") {
    c.extract.context = ContextMode::Full;
  } else if (context == "sentence") {
    c.extract.context = ContextMode::Sentence;
  } else {
    r.fail("extract", "context", "expected 'full' or 'sentence', got '" + context + "'");
  }

  r.path("lexsub", "path", c.lexsub.path);
  std::string format = "tsv";
  r.text("lexsub", "format", format);
  if (format == "tsv") {
    c.lexsub.format = LexsubFormat::Tsv;
  } else if (format == "coinco") {
    c.lexsub.format = LexsubFormat::Coinco;
  } else {
    r.fail("lexsub", "format", "expected 'tsv' or 'coinco', got '" + format + "'");
  }
  r.number("lexsub", "min_subs", c.lexsub.min_subs);
  std::vector<double> split(c.lexsub.split.begin(), c.lexsub.split.end());
  r.list("lexsub", "split", split);
  if (split.size() != 3) r.fail("lexsub", "split", "expected three ratios");
  std::copy(split.begin(), split.end(), c.lexsub.split.begin());
  r.number("lexsub", "baseline_window", c.lexsub.baseline_window);

  std::string grid = "paper";
  r.text("probes", "grid", grid);
  if (grid != "paper" && grid != "fixed") {
    r.fail("probes", "grid", "expected 'paper' or 'fixed', got '" + grid + "'");
  }
  c.probes.paper_grid = grid == "paper";
  r.number("probes", "batch_size", c.probes.base.batch_size);
  r.number("probes", "learning_rate", c.probes.base.learning_rate);
  r.number("probes", "negatives", c.probes.base.negatives);
  r.number("probes", "margin", c.probes.base.margin);
  r.number("probes", "max_epochs", c.probes.base.max_epochs);
  r.number("probes", "patience", c.probes.base.patience);
  c.probes.base.validate();
  c.probes.tasks = parse_names(r, "tasks", c.probes.tasks, probe::parse_task);
  c.probes.kinds = parse_names(r, "kinds", c.probes.kinds, states::parse_state_kind);
  r.list("probes", "layers", c.probes.layers);
  for (auto l : c.probes.layers) {
    if (l < 1 || l > c.lm.num_layers()) {
      r.fail("probes", "layers", "layer " + std::to_string(l) + " outside 1.." +
                                     std::to_string(c.lm.num_layers()));
    }
    if (c.probes.paper_grid && l > 3) r.fail("probes", "layers", "grid = paper covers layers 1-3 only");
  }

  r.number("eval", "neighbors", c.eval.neighbors);
  r.number("eval", "overlap_k", c.eval.overlap_k);
  r.number("eval", "showcase_items", c.eval.showcase_items);
  if (c.eval.neighbors == 0 || c.eval.overlap_k == 0) {
    throw ConfigError("config [eval]: neighbour counts must be positive");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("config: cannot read '" + path.string() + "'");
  }
  return parse_run_config(util::read_file(path), path.parent_path(), seed_override);
}

}  // namespace ambiprobe::cli
