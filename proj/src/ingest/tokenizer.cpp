#include "copilot/ingest/tokenizer.hpp"

#include <cctype>

namespace copilot::ingest {

namespace {

bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }
bool is_space_byte(unsigned char c) { return c < 0x80 && std::isspace(c) != 0; }

}  // namespace

std::vector<TokenSpan> AlnumRunTokenizer::spans(std::string_view text) const {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      const std::size_t start = i;
      while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({start, i});
    } else {
      out.push_back({i, i + 1});
      ++i;
    }
  }
  return out;
}

const Tokenizer& default_tokenizer() {
  static const AlnumRunTokenizer instance;
  return instance;
}

std::size_t count_tokens(std::string_view text) { return default_tokenizer().count(text); }

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : default_tokenizer().spans(text)) {
    out.emplace_back(text.substr(span.begin, span.size()));
  }
  return out;
}

}  // namespace copilot::ingest
