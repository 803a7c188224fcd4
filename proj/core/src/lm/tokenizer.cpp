#include "ambiprobe/lm/tokenizer.hpp"

#include <cctype>
#include <sstream>

namespace ambiprobe::lm {

namespace {

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      word.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  Sentence current;
  for (auto& tok : tokenize(text)) {
    bool end = tok == "." || tok == "!" || tok == "?";
    current.push_back(std::move(tok));
    if (end) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool is_punctuation(std::string_view token) {
  if (token.empty()) return false;
  for (char ch : token) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) return false;
  }
  return true;
}

std::string format_tokenized(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out.push_back(' ');
      out += s[i];
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<Sentence> parse_tokenized(std::string_view text) {
  std::vector<Sentence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    Sentence s;
    std::string tok;
    while (ls >> tok) s.push_back(tok);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ambiprobe::lm
