#include "copilot/ingest/chunker.hpp"

#include <algorithm>
#include <cctype>

#include "copilot/common/error.hpp"

namespace copilot::ingest {

namespace {

// Token index range [begin, end).
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

bool gap_has_paragraph_break(std::string_view gap) {
  const auto first = gap.find('\n');
  if (first == std::string_view::npos) return false;
  return gap.find('\n', first + 1) != std::string_view::npos;
}

bool gap_has_whitespace(std::string_view gap) { return !gap.empty(); }

bool ends_sentence(std::string_view token) {
  if (token.empty()) return false;
  const char last = token.back();
  return last == '.' || last == '!' || last == '?';
}

// Splits `r` after every token index for which `is_boundary(i)` holds, i.e.
// the boundary lies between token i and token i+1.
template <typename Pred>
std::vector<Range> split_range(Range r, Pred&& is_boundary) {
  std::vector<Range> out;
  std::size_t start = r.begin;
  for (std::size_t i = r.begin; i + 1 < r.end; ++i) {
    if (is_boundary(i)) {
      out.push_back({start, i + 1});
      start = i + 1;
    }
  }
  out.push_back({start, r.end});
  return out;
}

class Packer {
 public:
  explicit Packer(std::size_t max_tokens) : max_(max_tokens) {}

  void place(Range unit) {
    if (cur_.size() > 0 && cur_.size() + unit.size() <= max_) {
      cur_.end = unit.end;
      return;
    }
    flush();
    cur_ = unit;
  }

  void flush() {
    if (cur_.size() > 0) out_.push_back(cur_);
    cur_ = {};
  }

  std::vector<Range> take() {
    flush();
    return std::move(out_);
  }

 private:
  std::size_t max_;
  Range cur_{};
  std::vector<Range> out_;
};

}  // namespace

std::string make_chunk_id(const std::string& doc_id, std::size_t chunk_index) {
  return doc_id + "#" + std::to_string(chunk_index);
}

std::vector<DocumentChunk> chunk_document(const SourceDocument& doc,
                                          std::size_t max_chunk_tokens,
                                          const Tokenizer& tokenizer) {
  if (max_chunk_tokens < 1) throw ConfigError("max_chunk_tokens must be >= 1");
  const std::string_view text = doc.text;
  const auto spans = tokenizer.spans(text);
  if (spans.empty()) throw EmptyDocument("document " + doc.doc_id + " has no tokens");

  auto gap_after = [&](std::size_t i) {
    return text.substr(spans[i].end, spans[i + 1].begin - spans[i].end);
  };
  auto token_text = [&](std::size_t i) { return text.substr(spans[i].begin, spans[i].size()); };

  Packer packer(max_chunk_tokens);
  const auto paragraphs = split_range({0, spans.size()}, [&](std::size_t i) {
    return gap_has_paragraph_break(gap_after(i));
  });
  for (const Range& para : paragraphs) {
    if (para.size() <= max_chunk_tokens) {
      packer.place(para);
      continue;
    }
    const auto sentences = split_range(para, [&](std::size_t i) {
      return ends_sentence(token_text(i)) && gap_has_whitespace(gap_after(i));
    });
    for (const Range& sentence : sentences) {
      if (sentence.size() <= max_chunk_tokens) {
        packer.place(sentence);
        continue;
      }
      for (std::size_t b = sentence.begin; b < sentence.end; b += max_chunk_tokens) {
        packer.place({b, std::min(sentence.end, b + max_chunk_tokens)});
      }
    }
  }

  std::vector<DocumentChunk> chunks;
  for (const Range& r : packer.take()) {
    DocumentChunk chunk;
    chunk.doc_id = doc.doc_id;
    chunk.chunk_index = chunks.size();
    chunk.chunk_id = make_chunk_id(doc.doc_id, chunk.chunk_index);
    const std::size_t from = spans[r.begin].begin;
    chunk.text = std::string(text.substr(from, spans[r.end - 1].end - from));
    chunk.token_count = r.size();
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace copilot::ingest
