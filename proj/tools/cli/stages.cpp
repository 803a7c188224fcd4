#include "stages.hpp"

#include <fnmatch.h>

#include <atomic>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ambiprobe/error.hpp"
#include "ambiprobe/eval/metrics.hpp"
#include "ambiprobe/eval/neighbors.hpp"
#include "ambiprobe/eval/report.hpp"
#include "ambiprobe/lexsub/coinco.hpp"
#include "ambiprobe/lexsub/dataset.hpp"
#include "ambiprobe/lexsub/filter.hpp"
#include "ambiprobe/lexsub/split.hpp"
#include "ambiprobe/lexsub/targets.hpp"
#include "ambiprobe/lm/checkpoint.hpp"
#include "ambiprobe/lm/tokenizer.hpp"
#include "ambiprobe/numcore/functional.hpp"
#include "ambiprobe/probe/checkpoint.hpp"
#include "ambiprobe/probe/sampler.hpp"
#include "ambiprobe/states/archive.hpp"
#include "ambiprobe/util/binary_io.hpp"
#include "ambiprobe/util/sha256.hpp"
#include "log.hpp"
#include "orderings.hpp"

namespace ambiprobe::cli {

namespace fs = std::filesystem;
using lexsub::Split;
using lexsub::SubstitutionItem;
using probe::ProbeBinding;
using probe::ProbeTask;
using states::StateKind;

namespace {

constexpr const char* kSplitNames[] = {"train", "valid", "test"};

std::string file_hash(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw InputError("missing artifact '" + p.string() + "'");
  return util::sha256_hex(util::read_file(p));
}

// A stage is fresh when its stamp records the same settings and input
// contents and every output still exists.
class Freshness {
 public:
  Freshness(fs::path stamp, const std::string& settings, const std::vector<fs::path>& inputs)
      : stamp_(std::move(stamp)) {
    util::Sha256 h;
    h.update(settings);
    for (const auto& in : inputs) h.update(in.filename().string()).update(file_hash(in));
    key_ = util::to_hex(h.finish());
  }

  bool fresh(const std::vector<fs::path>& outputs) const {
    if (!fs::is_regular_file(stamp_) || util::read_file(stamp_) != key_) return false;
    for (const auto& o : outputs) {
      if (!fs::exists(o)) return false;
    }
    return true;
  }

  void record() const { util::write_file(stamp_, key_); }

 private:
  fs::path stamp_;
  std::string key_;
};

std::vector<lm::Sentence> read_tokenized(const fs::path& p) {
  return lm::parse_tokenized(util::read_file(p));
}

std::vector<SubstitutionItem> read_items(const fs::path& p) {
  return lexsub::parse_lexsub(util::read_file(p));
}

lexsub::SplitAssignment read_splits(const fs::path& p) {
  lexsub::SplitAssignment out;
  std::istringstream in(util::read_file(p));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "splits: expected 'id<TAB>split'");
    const auto name = line.substr(tab + 1);
    Split s;
    if (name == "train") {
      s = Split::Train;
    } else if (name == "valid") {
      s = Split::Valid;
    } else if (name == "test") {
      s = Split::Test;
    } else {
      throw ParseError(n, "splits: unknown split '" + name + "'");
    }
    out.emplace(line.substr(0, tab), s);
  }
  return out;
}

std::string row_name(const ProbeBinding& b) {
  return (b.kind == StateKind::Current ? "h" : "pred") + std::to_string(b.layer);
}

bool selected(const ProbeBinding& b, const std::vector<std::string>& only) {
  if (only.empty()) return true;
  const auto name = b.name();
  for (const auto& pattern : only) {
    if (fnmatch(pattern.c_str(), name.c_str(), 0) == 0) return true;
  }
  return false;
}

// Restricts an item to the sentence holding its target.
SubstitutionItem target_sentence(const SubstitutionItem& item) {
  auto is_end = [](const std::string& t) { return t == "." || t == "!" || t == "?"; };
  std::size_t begin = item.target_index;
  while (begin > 0 && !is_end(item.context[begin - 1])) --begin;
  std::size_t end = item.target_index + 1;
  while (end < item.context.size() && !is_end(item.context[end - 1])) ++end;
  SubstitutionItem out = item;
  out.context.assign(item.context.begin() + static_cast<std::ptrdiff_t>(begin),
                     item.context.begin() + static_cast<std::ptrdiff_t>(end));
  out.target_index = item.target_index - begin;
  return out;
}

const Vector& pick_target(const lexsub::TargetVectors& t, ProbeTask task) {
  switch (task) {
    case ProbeTask::Word: return t.w;
    case ProbeTask::Sub: return t.s;
    case ProbeTask::WordSub: return t.ws;
  }
  return t.w;
}

Vector record_vector(const states::StateArchive& archive, const std::string& id, StateKind kind,
                     std::uint32_t layer) {
  const auto& r = archive.at(id, kind, layer);
  Vector v(static_cast<Index>(r.values.size()));
  for (std::size_t i = 0; i < r.values.size(); ++i) v(static_cast<Index>(i)) = r.values[i];
  return v;
}

// Items of one split together with their targets.
struct SplitData {
  std::vector<SubstitutionItem> items;
  std::vector<lexsub::TargetVectors> targets;
};

SplitData split_data(const std::vector<SubstitutionItem>& all,
                     const lexsub::SplitAssignment& assignment, Split which,
                     const lm::Vocabulary& vocab, const Matrix& emb) {
  SplitData d;
  d.items = lexsub::select(all, assignment, which);
  for (const auto& it : d.items) d.targets.push_back(lexsub::build_targets(it, vocab, emb));
  return d;
}

probe::ProbeData probe_data(const SplitData& split, const ProbeBinding& b,
                            const states::StateArchive& archive, const lm::Vocabulary& vocab) {
  probe::ProbeData d;
  const auto n = static_cast<Index>(split.items.size());
  const auto dim = archive.layer_dims().at(b.layer - 1);
  d.inputs = Matrix(static_cast<Index>(dim), n);
  d.targets = Matrix(split.targets.empty() ? 0 : split.targets.front().w.size(), n);
  for (Index j = 0; j < n; ++j) {
    const auto& it = split.items[static_cast<std::size_t>(j)];
    d.inputs.col(j) = record_vector(archive, it.id, b.kind, b.layer);
    d.targets.col(j) = pick_target(split.targets[static_cast<std::size_t>(j)], b.task);
    const auto target = vocab.index(lexsub::normalize(it.target_form));
    d.anchor.push_back(target);
    std::vector<lm::TokenId> excluded;
    if (b.task != ProbeTask::Word) {
      for (const auto& s : lexsub::usable_substitutes(it, vocab)) excluded.push_back(vocab.index(s));
    }
    d.excluded.push_back(std::move(excluded));
  }
  return d;
}

std::string json_number_file(const std::map<std::string, double>& values) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : values) j[k] = v;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- stages

StageOutcome prepare_corpus(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("prepare-corpus");
  const std::vector<fs::path> inputs{c.corpus.train, c.corpus.valid, c.corpus.test};
  const std::vector<fs::path> outputs{out.corpus("train"), out.corpus("valid"), out.corpus("test")};
  Freshness stamp(out.root / "corpus" / ".stamp", "tokenizer/1", inputs);
  if (!o.force && stamp.fresh(outputs)) return StageOutcome::Skipped;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto sentences = lm::split_sentences(util::read_file(inputs[i]));
    if (sentences.empty()) throw InputError("corpus file '" + inputs[i].string() + "' is empty");
    std::size_t tokens = 0;
    for (const auto& s : sentences) tokens += s.size();
    util::write_file(outputs[i], lm::format_tokenized(sentences));
    log(kSplitNames[i], ": ", sentences.size(), " sentences, ", tokens, " tokens");
  }
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome train_lm_stage(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("train-lm");
  const std::vector<fs::path> inputs{out.corpus("train"), out.corpus("valid")};
  Freshness stamp(out.root / "lm" / ".stamp-train", c.lm.to_text(), inputs);
  if (!o.force && stamp.fresh({out.lm_checkpoint(), out.lm_curve()})) return StageOutcome::Skipped;

  const auto train = read_tokenized(inputs[0]);
  const auto valid = read_tokenized(inputs[1]);
  auto vocab = lm::Vocabulary::build(train, c.lm.vocab_cap);
  const auto train_ids = vocab.encode_stream(train);
  const auto valid_ids = vocab.encode_stream(valid);
  log("vocabulary ", vocab.size(), ", ", train_ids.size(), " training positions");
  std::ostringstream curve;
  curve << "epoch,train_loss,valid_perplexity,learning_rate\n" << std::setprecision(17);
  auto result = lm::train_lm(train_ids, valid_ids, vocab.size(), c.lm, [&](const lm::EpochReport& r) {
    log("epoch ", r.epoch, " train loss ", r.train_loss, " valid ppl ", r.valid_perplexity,
        " lr ", r.learning_rate, r.improved ? " *" : "");
    curve << r.epoch << ',' << r.train_loss << ',' << r.valid_perplexity << ',' << r.learning_rate
          << '\n';
  });
  lm::Checkpoint ck{std::move(vocab), std::move(result.model), std::move(result.metadata)};
  ck.save(out.lm_checkpoint());
  util::write_file(out.lm_curve(), curve.str());
  log("kept epoch ", ck.metadata.best_epoch, ", fingerprint ", lm::fingerprint(ck.model));
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome eval_lm(const RunConfig&, const Layout& out, const StageOptions& o) {
  StageLog log("eval-lm");
  const std::vector<fs::path> inputs{out.lm_checkpoint(), out.corpus("valid"), out.corpus("test")};
  Freshness stamp(out.root / "lm" / ".stamp-eval", "perplexity/1", inputs);
  if (!o.force && stamp.fresh({out.perplexity()})) return StageOutcome::Skipped;
  const auto ck = lm::Checkpoint::load(out.lm_checkpoint());
  std::map<std::string, double> ppl;
  for (const char* split : {"valid", "test"}) {
    const auto ids = ck.vocab.encode_stream(read_tokenized(out.corpus(split)));
    ppl[split] = lm::perplexity(ck.model, ids);
    log(split, " perplexity ", ppl[split]);
  }
  util::write_file(out.perplexity(), json_number_file(ppl));
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome prepare_lexsub(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("prepare-lexsub");
  const std::vector<fs::path> inputs{c.lexsub.path, out.lm_checkpoint()};
  std::ostringstream settings;
  settings << (c.lexsub.format == LexsubFormat::Tsv ? "tsv" : "coinco") << ' ' << c.lexsub.min_subs
           << ' ' << c.lexsub.split[0] << ' ' << c.lexsub.split[1] << ' ' << c.lexsub.split[2]
           << " seed " << c.seed;
  Freshness stamp(out.root / "lexsub" / ".stamp", settings.str(), inputs);
  if (!o.force && stamp.fresh({out.items(), out.splits(), out.filter_report()})) {
    return StageOutcome::Skipped;
  }
  const auto ck = lm::Checkpoint::load(out.lm_checkpoint());
  const auto loaded = c.lexsub.format == LexsubFormat::Tsv ? lexsub::load_lexsub(c.lexsub.path)
                                                           : lexsub::load_coinco(c.lexsub.path);
  const auto kept = lexsub::filter_items(loaded, ck.vocab, c.lexsub.min_subs);
  log(loaded.size(), " items loaded, ", kept.size(), " kept");
  const auto assignment = lexsub::split_items(kept, c.lexsub.split, derive_seed(c.seed, 12));
  std::string splits;
  std::map<std::string, double> counts{{"loaded", static_cast<double>(loaded.size())},
                                       {"kept", static_cast<double>(kept.size())}};
  for (const auto& it : kept) {
    const auto s = assignment.at(it.id);
    splits += it.id + '\t' + kSplitNames[static_cast<int>(s)] + '\n';
    counts[kSplitNames[static_cast<int>(s)]] += 1.0;
  }
  log("train ", counts["train"], ", valid ", counts["valid"], ", test ", counts["test"]);
  util::write_file(out.items(), lexsub::format_lexsub(kept));
  util::write_file(out.splits(), splits);
  util::write_file(out.filter_report(), json_number_file(counts));
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome extract_states(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("extract-states");
  const std::vector<fs::path> inputs{out.lm_checkpoint(), out.items()};
  Freshness stamp(out.root / "states" / ".stamp",
                  c.extract.context == ContextMode::Full ? "full" : "sentence", inputs);
  if (!o.force && stamp.fresh({out.states()})) return StageOutcome::Skipped;
  const auto ck = lm::Checkpoint::load(out.lm_checkpoint());
  std::vector<states::ExtractionItem> jobs;
  for (const auto& raw : read_items(out.items())) {
    const auto item = c.extract.context == ContextMode::Full ? raw : target_sentence(raw);
    auto enc = lexsub::encode_context(item, ck.vocab);
    const bool boundary = enc.target_position == 1 || enc.target_position + 2 == enc.tokens.size();
    jobs.push_back({item.id, std::move(enc.tokens), enc.target_position, boundary});
  }
  const auto archive = states::extract_archive(ck.model, lm::fingerprint(ck.model), jobs);
  states::write_archive(out.states(), archive);
  log(jobs.size(), " items, ", archive.size(), " records");
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome train_probes(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("train-probes");
  const std::vector<fs::path> inputs{out.lm_checkpoint(), out.states(), out.items(), out.splits()};
  std::vector<ProbeBinding> todo;
  for (const auto& b : c.bindings()) {
    if (selected(b, o.only)) todo.push_back(b);
  }
  if (todo.empty()) throw ConfigError("train-probes: --only matches no configured probe");

  std::vector<std::unique_ptr<Freshness>> stamps;
  std::vector<ProbeBinding> stale;
  for (const auto& b : todo) {
    auto s = std::make_unique<Freshness>(out.root / "probes" / ("." + b.name() + ".stamp"),
                                         b.name() + c.probe_config(b).to_text(), inputs);
    if (o.force || !s->fresh({out.probe_checkpoint(b.name()), out.probe_curve(b.name())})) {
      stale.push_back(b);
      stamps.push_back(std::move(s));
    }
  }
  if (stale.empty()) return StageOutcome::Skipped;

  const auto ck = lm::Checkpoint::load(out.lm_checkpoint());
  const auto fp = lm::fingerprint(ck.model);
  const auto archive = states::read_archive(out.states());
  archive.require_compatible(fp);
  const auto items = read_items(out.items());
  const auto assignment = read_splits(out.splits());
  const Matrix& emb = ck.model.embeddings();
  const auto train = split_data(items, assignment, Split::Train, ck.vocab, emb);
  const auto valid = split_data(items, assignment, Split::Valid, ck.vocab, emb);
  const probe::NegativeSampler sampler(ck.vocab);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= stale.size()) return;
      const auto& b = stale[i];
      try {
        const auto cfg = c.probe_config(b);
        auto res = probe::train_probe(b, probe_data(train, b, archive, ck.vocab),
                                      probe_data(valid, b, archive, ck.vocab), emb, sampler, cfg);
        probe::ProbeCheckpoint pc{std::move(res.model), cfg, fp, res.best_epoch};
        pc.save(out.probe_checkpoint(b.name()));
        util::write_file(out.probe_curve(b.name()), probe::curve_csv(res.curve));
        const double best = res.best_epoch ? res.curve[res.best_epoch - 1].valid_loss : 0.0;
        log(b.name(), ": ", res.curve.size(), " epochs, best ", res.best_epoch, " valid loss ", best);
        stamps[i]->record();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        next = stale.size();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(o.jobs, stale.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return StageOutcome::Ran;
}

StageOutcome evaluate(const RunConfig& c, const Layout& out, const StageOptions& o) {
  StageLog log("evaluate");
  const auto bindings = c.bindings();
  std::vector<fs::path> inputs{out.lm_checkpoint(), out.perplexity(), out.states(), out.items(),
                               out.splits()};
  for (const auto& b : bindings) inputs.push_back(out.probe_checkpoint(b.name()));
  Freshness stamp(out.eval_dir() / ".stamp", c.canonical_text(), inputs);
  if (!o.force && stamp.fresh({out.results()})) return StageOutcome::Skipped;

  const auto ck = lm::Checkpoint::load(out.lm_checkpoint());
  const auto fp = lm::fingerprint(ck.model);
  const auto archive = states::read_archive(out.states());
  archive.require_compatible(fp);
  const auto items = read_items(out.items());
  const auto assignment = read_splits(out.splits());
  const Matrix& emb = ck.model.embeddings();
  const auto test = split_data(items, assignment, Split::Test, ck.vocab, emb);
  if (test.items.empty()) throw InputError("evaluate: the test split is empty");
  const std::size_t n = test.items.size();
  const char* const tasks[] = {"WORD", "SUB", "WORD_SUB"};
  const ProbeTask task_ids[] = {ProbeTask::Word, ProbeTask::Sub, ProbeTask::WordSub};

  std::vector<eval::CellInput> groups;
  std::vector<std::size_t> baseline_missing;
  std::vector<Vector> w(n), baseline;
  std::size_t missing = 0;
  for (std::size_t j = 0; j < n; ++j) w[j] = test.targets[j].w;
  for (int t = 0; t < 3; ++t) {
    eval::CellInput g{{"baseline", "w_t", tasks[t]}, w, {}};
    for (const auto& tv : test.targets) g.targets.push_back(pick_target(tv, task_ids[t]));
    groups.push_back(std::move(g));
  }
  std::vector<std::size_t> with_baseline;
  for (std::size_t j = 0; j < n; ++j) {
    if (auto b = lexsub::avg_context_baseline(test.items[j], ck.vocab, emb, c.lexsub.baseline_window)) {
      baseline.push_back(std::move(*b));
      with_baseline.push_back(j);
    } else {
      ++missing;
    }
  }
  for (int t = 0; t < 3; ++t) {
    eval::CellInput g{{"baseline", "avg_ctxt", tasks[t]}, baseline, {}};
    for (auto j : with_baseline) g.targets.push_back(pick_target(test.targets[j], task_ids[t]));
    groups.push_back(std::move(g));
  }

  // Probe predictions per binding, keyed by name.
  std::map<std::string, std::vector<Vector>> predictions;
  for (const auto& b : bindings) {
    const auto pc = probe::ProbeCheckpoint::load(out.probe_checkpoint(b.name()));
    if (pc.lm_fingerprint != fp) {
      throw CompatibilityError("probe '" + out.probe_checkpoint(b.name()).string() +
                               "' was trained on states of another language model");
    }
    if (!(pc.model.binding() == b)) {
      throw IntegrityError("probe '" + out.probe_checkpoint(b.name()).string() +
                           "' holds binding " + pc.model.binding().name());
    }
    auto& preds = predictions[b.name()];
    eval::CellInput g{{states::to_string(b.kind), row_name(b), probe::to_string(b.task)}, {}, {}};
    for (std::size_t j = 0; j < n; ++j) {
      preds.push_back(pc.model.forward(record_vector(archive, test.items[j].id, b.kind, b.layer)));
      g.predictions.push_back(preds.back());
      g.targets.push_back(pick_target(test.targets[j], b.task));
    }
    groups.push_back(std::move(g));
  }

  eval::ReportBundle bundle;
  bundle.cells = eval::cosine_table(groups);
  for (auto& cell : bundle.cells) {
    if (cell.key.row == "avg_ctxt") cell.excluded += missing;
  }
  bundle.lm_fingerprint = fp;

  // cos(w, s) against cos(s_hat, s) per SUB probe.
  for (const auto& b : bindings) {
    if (b.task != ProbeTask::Sub) continue;
    eval::CorrelationResult corr;
    std::vector<double> x, y;
    std::vector<std::string> ids;
    for (std::size_t j = 0; j < n; ++j) {
      try {
        const double a = fn::cosine(test.targets[j].w, test.targets[j].s);
        const double p = fn::cosine(predictions[b.name()][j], test.targets[j].s);
        x.push_back(a);
        y.push_back(p);
        ids.push_back(test.items[j].id);
      } catch (const UndefinedSimilarityError&) {
      }
    }
    try {
      corr = eval::pearson(x, y);
    } catch (const Error& e) {
      log("no correlation for ", b.name(), ": ", e.what());
      continue;
    }
    corr.name = row_name(b);
    corr.item_ids = std::move(ids);
    bundle.correlations.push_back(std::move(corr));
  }

  // Neighbour overlap of s and ws with w on training items, target excluded.
  const auto train = split_data(items, assignment, Split::Train, ck.vocab, emb);
  double overlap_s = 0.0, overlap_ws = 0.0;
  std::size_t overlap_n = 0;
  for (std::size_t j = 0; j < train.items.size(); ++j) {
    const std::vector<lm::TokenId> excl{lm::Vocabulary::kUnkId, lm::Vocabulary::kBoundaryId,
                                        ck.vocab.index(lexsub::normalize(train.items[j].target_form))};
    try {
      const auto& tv = train.targets[j];
      overlap_s += eval::neighbor_overlap(tv.s, tv.w, emb, c.eval.overlap_k, excl);
      overlap_ws += eval::neighbor_overlap(tv.ws, tv.w, emb, c.eval.overlap_k, excl);
      ++overlap_n;
    } catch (const UndefinedSimilarityError&) {
    }
  }
  const auto k = std::to_string(c.eval.overlap_k);
  if (overlap_n > 0) {
    bundle.statistics["overlap_top" + k + "_s_w"] = overlap_s / static_cast<double>(overlap_n);
    bundle.statistics["overlap_top" + k + "_ws_w"] = overlap_ws / static_cast<double>(overlap_n);
  }
  const auto ppl = nlohmann::json::parse(util::read_file(out.perplexity()));
  bundle.statistics["lm_valid_perplexity"] = ppl.at("valid").get<double>();
  bundle.statistics["lm_test_perplexity"] = ppl.at("test").get<double>();
  bundle.statistics["items_train"] = static_cast<double>(train.items.size());
  bundle.statistics["items_test"] = static_cast<double>(n);

  // Showcase neighbours for the first test items.
  for (std::size_t j = 0; j < std::min(n, c.eval.showcase_items); ++j) {
    const auto& it = test.items[j];
    const auto target = lexsub::normalize(it.target_form);
    const std::vector<lm::TokenId> excl{lm::Vocabulary::kUnkId, lm::Vocabulary::kBoundaryId,
                                        ck.vocab.index(target)};
    auto add = [&](const std::string& label, const Vector& q) {
      try {
        auto r = eval::nearest_neighbors(q, emb, c.eval.neighbors, excl, &ck.vocab);
        r.query = it.id + " " + target + " | " + label;
        bundle.neighbors.push_back(std::move(r));
      } catch (const UndefinedSimilarityError&) {
      }
    };
    add("s", test.targets[j].s);
    for (const auto& b : bindings) {
      if (b.kind == StateKind::Current && b.layer == 1) add(b.name(), predictions[b.name()][j]);
    }
  }

  bundle.config_hashes["run"] = util::sha256_hex(c.canonical_text());
  bundle.config_hashes["lm"] = util::sha256_hex(c.lm.to_text());
  bundle.config_hashes["lexsub.items"] = file_hash(out.items());
  bundle.config_hashes["lexsub.splits"] = file_hash(out.splits());
  for (const char* split : kSplitNames) {
    bundle.config_hashes[std::string("corpus.") + split] = file_hash(out.corpus(split));
  }
  for (const auto& b : bindings) {
    bundle.config_hashes["probe." + b.name()] = util::sha256_hex(c.probe_config(b).to_text());
  }

  fs::create_directories(out.eval_dir());
  for (const auto& corr : bundle.correlations) {
    util::write_file(out.eval_dir() / ("scatter-" + corr.name + ".csv"), eval::scatter_csv(corr));
  }
  util::write_file(out.results(), eval::results_json(bundle));
  log(bundle.cells.size(), " cells over ", n, " test items");
  stamp.record();
  return StageOutcome::Ran;
}

StageOutcome report(const RunConfig&, const Layout& out, const StageOptions& o) {
  StageLog log("report");
  Freshness stamp(out.eval_dir() / ".stamp-report", "summary/1", {out.results()});
  const bool fresh = !o.force && stamp.fresh({out.summary()});
  if (!fresh) {
    const auto bundle = bundle_from_json(util::read_file(out.results()));
    std::string text = eval::summary_text(bundle);
    text += "\nDirectional checks\n" + format_checks(directional_checks({bundle}));
    util::write_file(out.summary(), text);
    stamp.record();
  }
  std::cout << util::read_file(out.summary());
  return fresh ? StageOutcome::Skipped : StageOutcome::Ran;
}

using StageFn = StageOutcome (*)(const RunConfig&, const Layout&, const StageOptions&);

const std::vector<std::pair<std::string, StageFn>>& registry() {
  static const std::vector<std::pair<std::string, StageFn>> stages{
      {"prepare-corpus", prepare_corpus}, {"train-lm", train_lm_stage},
      {"eval-lm", eval_lm},               {"prepare-lexsub", prepare_lexsub},
      {"extract-states", extract_states}, {"train-probes", train_probes},
      {"evaluate", evaluate},             {"report", report},
  };
  return stages;
}

// Primary artifact of a stage, named in error messages.
fs::path primary_artifact(const std::string& stage, const Layout& out) {
  if (stage == "prepare-corpus") return out.root / "corpus";
  if (stage == "train-lm") return out.lm_checkpoint();
  if (stage == "eval-lm") return out.perplexity();
  if (stage == "prepare-lexsub") return out.items();
  if (stage == "extract-states") return out.states();
  if (stage == "train-probes") return out.root / "probes";
  if (stage == "evaluate") return out.results();
  return out.summary();
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

void check_inputs(const RunConfig& c, const std::string& stage) {
  auto need = [&](const fs::path& p, const char* key) {
    if (p.empty()) throw ConfigError("config: " + std::string(key) + " is required for " + stage);
    if (!fs::is_regular_file(p)) {
      throw ConfigError("config: " + std::string(key) + " '" + p.string() + "' does not exist");
    }
  };
  if (stage == "prepare-corpus" || stage == "pipeline") {
    need(c.corpus.train, "[corpus] train");
    need(c.corpus.valid, "[corpus] valid");
    need(c.corpus.test, "[corpus] test");
  }
  if (stage == "prepare-lexsub" || stage == "pipeline") need(c.lexsub.path, "[lexsub] path");
  if (c.out_dir.empty()) throw ConfigError("config: [run] out_dir is empty");
}

StageOutcome run_stage(const std::string& stage, const RunConfig& config,
                       const StageOptions& options) {
  const Layout out{config.out_dir};
  for (const auto& [name, fn] : registry()) {
    if (name != stage) continue;
    for (const char* dir : {"corpus", "lm", "lexsub", "states", "probes", "eval"}) {
      fs::create_directories(out.root / dir);
    }
    try {
      return fn(config, out, options);
    } catch (const Error& e) {
      StageLog{stage}("failed on ", primary_artifact(stage, out).string(), ": ", e.what());
      throw;
    }
  }
  throw ContractError("unknown stage '" + stage + "'");
}

}  // namespace ambiprobe::cli
