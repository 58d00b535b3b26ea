#pragma once

#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "copilot/ingest/chunker.hpp"

namespace copilot::ingest {

/// Where a document comes from: an HTTP(S) URL or an inline text payload.
struct Origin {
  enum class Kind { Url, Text };

  Kind kind = Kind::Text;
  std::string value;  // URL, or the text payload itself
  std::string label;  // recorded as SourceDocument::origin; defaults to URL / "inline"

  static Origin url(std::string u);
  static Origin text(std::string payload, std::string label = "inline");
};

/// Fetches (URLs) or adopts (inline text) a document and strips markup.
/// Throws FetchError on transport failure or non-2xx status, EmptyDocument
/// when nothing but whitespace remains.
SourceDocument fetch_document(const Origin& origin, const std::string& doc_id);

using FetchFn = std::function<SourceDocument(const Origin&, const std::string&)>;

/// Line-delimited chunk store: `<dir>/chunks.jsonl` holds one record per
/// chunk, `<dir>/documents.jsonl` one per accepted document. Appends are
/// serialized; existing files are loaded on construction.
class CorpusStore {
 public:
  explicit CorpusStore(std::string dir);

  /// Persists a document and its chunks. Throws CorpusError on a duplicate
  /// doc_id.
  void append(const SourceDocument& doc, const std::vector<DocumentChunk>& chunks);

  std::vector<DocumentChunk> chunks() const;
  std::size_t document_count() const;
  std::size_t chunk_count() const;
  bool has_document(const std::string& doc_id) const;

  /// First "doc-NNNNN" id not used yet, reserving `count` consecutive ids.
  std::vector<std::string> reserve_doc_ids(std::size_t count);

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  mutable std::mutex mutex_;
  std::vector<DocumentChunk> chunks_;
  std::set<std::string> doc_ids_;
  std::size_t next_seq_ = 0;
};

struct IngestFailure {
  std::string origin;
  std::string kind;
  std::string message;
};

struct IngestStats {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::vector<IngestFailure> errors;
};

struct IngestOptions {
  std::size_t max_chunk_tokens = kDefaultMaxChunkTokens;
  std::size_t parallelism = 4;
  FetchFn fetcher;  // empty: fetch_document
};

/// Fetches, chunks and persists every origin. Fetches run concurrently (at
/// most `parallelism` at a time); store writes happen in origin order. A
/// failing origin is recorded in `errors` and does not abort the batch.
IngestStats ingest_corpus(const std::vector<Origin>& origins, CorpusStore& store,
                          const IngestOptions& options = {});

}  // namespace copilot::ingest
