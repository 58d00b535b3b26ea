#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copilot/ingest/tokenizer.hpp"

namespace copilot::ingest {

inline constexpr std::size_t kDefaultMaxChunkTokens = 500;

struct SourceDocument {
  std::string doc_id;
  std::string origin;  // URL, "inline", or "file:<path>"
  std::string text;
  std::int64_t fetched_at = 0;  // ms since epoch
};

struct DocumentChunk {
  std::string doc_id;
  std::size_t chunk_index = 0;
  std::string chunk_id;  // "<doc_id>#<chunk_index>"
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const DocumentChunk&) const = default;
};

std::string make_chunk_id(const std::string& doc_id, std::size_t chunk_index);

/// Greedy packing of a document into chunks of at most `max_chunk_tokens`.
///
/// Whole paragraphs are packed while they fit. A paragraph too large for any
/// chunk is packed sentence by sentence, and a sentence too large for any
/// chunk is split hard every `max_chunk_tokens` tokens. Each chunk's text is
/// the exact source substring covering its tokens, so re-tokenizing the
/// chunks in order reproduces the document's token sequence.
///
/// Throws ConfigError when max_chunk_tokens < 1, EmptyDocument when the
/// document has no tokens.
std::vector<DocumentChunk> chunk_document(const SourceDocument& doc,
                                          std::size_t max_chunk_tokens = kDefaultMaxChunkTokens,
                                          const Tokenizer& tokenizer = default_tokenizer());

}  // namespace copilot::ingest
