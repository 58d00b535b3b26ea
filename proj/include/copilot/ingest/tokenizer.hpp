#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace copilot::ingest {

/// Byte range [begin, end) of one token inside the tokenized text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const TokenSpan&) const = default;
};

/// Seam for swapping in a model-specific tokenizer. The chunker only needs
/// token byte spans, so anything that can report them plugs in here.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenSpan> spans(std::string_view text) const = 0;
  virtual std::string name() const = 0;

  std::size_t count(std::string_view text) const { return spans(text).size(); }
};

/// A token is a maximal run of alphanumeric bytes, or a single
/// non-whitespace non-alphanumeric byte. Bytes >= 0x80 count as
/// alphanumeric so UTF-8 words stay whole.
class AlnumRunTokenizer final : public Tokenizer {
 public:
  std::vector<TokenSpan> spans(std::string_view text) const override;
  std::string name() const override { return "alnum-run"; }
};

const Tokenizer& default_tokenizer();

std::size_t count_tokens(std::string_view text);
std::vector<std::string> tokens(std::string_view text);

}  // namespace copilot::ingest
