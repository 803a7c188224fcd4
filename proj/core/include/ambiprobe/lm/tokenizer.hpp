#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ambiprobe::lm {

using Sentence = std::vector<std::string>;

// Lowercases ASCII letters, splits on whitespace and emits every ASCII
// punctuation character as its own token. Bytes >= 0x80 are kept as part of
// words so UTF-8 text passes through intact.
std::vector<std::string> tokenize(std::string_view text);

// Tokenizes a document and breaks it into sentences after ".", "!" or "?".
// A trailing fragment without a terminator forms its own sentence.
std::vector<Sentence> split_sentences(std::string_view text);

// True when the token consists only of non-alphanumeric characters.
bool is_punctuation(std::string_view token);

// One sentence per line, tokens separated by single spaces.
std::string format_tokenized(const std::vector<Sentence>& sentences);
std::vector<Sentence> parse_tokenized(std::string_view text);

}  // namespace ambiprobe::lm
