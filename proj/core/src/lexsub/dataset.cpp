#include "ambiprobe/lexsub/dataset.hpp"

#include <charconv>
#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::lexsub {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void add_substitute(std::vector<Substitute>& subs, std::string lemma, std::uint32_t count) {
  for (auto& s : subs) {
    if (s.lemma == lemma) {
      s.count += count;
      return;
    }
  }
  const bool mw = is_multi_word(lemma);
  subs.push_back({std::move(lemma), count, mw});
}

SubstitutionItem parse_line(std::string_view line, std::size_t lineno) {
  auto cols = split(line, '\t');
  if (cols.size() < 7 || cols.size() > 8) {
    throw ParseError(lineno, "expected 7 or 8 tab-separated columns, found " +
                                 std::to_string(cols.size()));
  }
  SubstitutionItem item;
  item.id = std::string(trim(cols[0]));
  item.target_form = std::string(trim(cols[1]));
  item.target_lemma = std::string(trim(cols[2]));
  item.pos = std::string(trim(cols[3]));
  if (item.id.empty()) throw ParseError(lineno, "empty item id");
  if (item.target_form.empty() || item.target_lemma.empty()) {
    throw ParseError(lineno, "empty target form or lemma");
  }
  if (!parse_number(trim(cols[4]), item.target_index)) {
    throw ParseError(lineno, "target index '" + std::string(cols[4]) + "' is not a number");
  }
  for (auto tok : split(trim(cols[5]), ' ')) {
    if (!tok.empty()) item.context.emplace_back(tok);
  }
  if (item.target_index >= item.context.size()) {
    throw ParseError(lineno, "target index " + std::to_string(item.target_index) +
                                 " outside context of " + std::to_string(item.context.size()) +
                                 " tokens");
  }
  if (item.context[item.target_index] != item.target_form) {
    throw ParseError(lineno, "context token '" + item.context[item.target_index] +
                                 "' at target index does not match form '" + item.target_form +
                                 "'");
  }
  for (auto entry : split(cols[6], ',')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    std::uint32_t count = 1;
    auto colon = entry.rfind(':');
    if (colon != std::string_view::npos) {
      if (!parse_number(entry.substr(colon + 1), count) || count == 0) {
        throw ParseError(lineno, "bad substitute count in '" + std::string(entry) + "'");
      }
      entry = trim(entry.substr(0, colon));
      if (entry.empty()) throw ParseError(lineno, "empty substitute lemma");
    }
    add_substitute(item.substitutes, std::string(entry), count);
  }
  if (item.substitutes.empty()) throw ParseError(lineno, "no substitutes");
  if (cols.size() == 8) {
    for (auto flag : split(cols[7], ',')) {
      flag = trim(flag);
      if (flag.empty()) continue;
      if (flag != "compound") throw ParseError(lineno, "unknown flag '" + std::string(flag) + "'");
      item.compound = true;
    }
  }
  return item;
}

}  // namespace

std::string SubstitutionItem::context_key() const {
  std::string out;
  for (const auto& t : context) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

bool is_multi_word(std::string_view lemma) {
  return lemma.find_first_of(" _\t") != std::string_view::npos;
}

std::vector<SubstitutionItem> parse_lexsub(std::string_view text) {
  std::vector<SubstitutionItem> items;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    items.push_back(parse_line(line, lineno));
  }
  if (items.empty()) throw InputError("lexsub dataset contains no items");
  return items;
}

std::vector<SubstitutionItem> load_lexsub(const std::filesystem::path& path) {
  return parse_lexsub(util::read_file(path));
}

std::string format_lexsub(const std::vector<SubstitutionItem>& items) {
  std::ostringstream out;
  for (const auto& it : items) {
    out << it.id << '\t' << it.target_form << '\t' << it.target_lemma << '\t' << it.pos << '\t'
        << it.target_index << '\t' << it.context_key() << '\t';
    for (std::size_t i = 0; i < it.substitutes.size(); ++i) {
      if (i) out << ',';
      out << it.substitutes[i].lemma << ':' << it.substitutes[i].count;
    }
    if (it.compound) out << "\tcompound";
    out << '\n';
  }
  return out.str();
}

}  // namespace ambiprobe::lexsub
