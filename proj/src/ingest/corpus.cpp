#include "copilot/ingest/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/http.hpp"
#include "copilot/common/text.hpp"
#include "copilot/ingest/html.hpp"

namespace copilot::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

Origin Origin::url(std::string u) {
  Origin o;
  o.kind = Kind::Url;
  o.label = u;
  o.value = std::move(u);
  return o;
}

Origin Origin::text(std::string payload, std::string label) {
  Origin o;
  o.kind = Kind::Text;
  o.value = std::move(payload);
  o.label = std::move(label);
  return o;
}

SourceDocument fetch_document(const Origin& origin, const std::string& doc_id) {
  std::string raw;
  if (origin.kind == Origin::Kind::Url) {
    if (!net::is_http_url(origin.value)) throw FetchError("not an HTTP(S) URL: " + origin.value);
    const auto resp = net::http_get(origin.value, std::chrono::seconds(30));
    if (resp.status == 0) throw FetchError(origin.value + ": " + resp.error);
    if (!resp.ok()) {
      throw FetchError(origin.value + ": HTTP status " + std::to_string(resp.status));
    }
    raw = resp.body;
  } else {
    raw = origin.value;
  }
  SourceDocument doc;
  doc.doc_id = doc_id;
  doc.origin = origin.label;
  doc.text = extract_text(raw);
  doc.fetched_at = text::now_millis();
  if (text::trim(doc.text).empty()) {
    throw EmptyDocument("no text left after markup stripping: " + origin.label);
  }
  return doc;
}

CorpusStore::CorpusStore(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const fs::path chunks_path = fs::path(dir_) / "chunks.jsonl";
  if (!fs::exists(chunks_path)) return;
  std::ifstream in(chunks_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      DocumentChunk c;
      c.doc_id = j.at("doc_id").get<std::string>();
      c.chunk_index = j.at("chunk_index").get<std::size_t>();
      c.chunk_id = j.at("chunk_id").get<std::string>();
      c.text = j.at("text").get<std::string>();
      c.token_count = j.at("token_count").get<std::size_t>();
      doc_ids_.insert(c.doc_id);
      chunks_.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw CorpusError(chunks_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& id : doc_ids_) {
    unsigned long seq = 0;
    if (std::sscanf(id.c_str(), "doc-%lu", &seq) == 1) {
      next_seq_ = std::max<std::size_t>(next_seq_, seq + 1);
    }
  }
}

void CorpusStore::append(const SourceDocument& doc, const std::vector<DocumentChunk>& chunks) {
  std::lock_guard lock(mutex_);
  if (doc_ids_.count(doc.doc_id)) throw CorpusError("duplicate doc_id: " + doc.doc_id);
  {
    std::ofstream out(fs::path(dir_) / "chunks.jsonl", std::ios::app);
    for (const auto& c : chunks) {
      out << json{{"doc_id", c.doc_id},
                  {"chunk_index", c.chunk_index},
                  {"chunk_id", c.chunk_id},
                  {"text", c.text},
                  {"token_count", c.token_count}}
                 .dump()
          << '\n';
    }
    if (!out) throw CorpusError("failed to append to chunks.jsonl in " + dir_);
  }
  {
    std::ofstream out(fs::path(dir_) / "documents.jsonl", std::ios::app);
    out << json{{"doc_id", doc.doc_id},
                {"origin", doc.origin},
                {"fetched_at", text::iso8601_utc(doc.fetched_at)},
                {"chunks", chunks.size()}}
               .dump()
        << '\n';
  }
  doc_ids_.insert(doc.doc_id);
  chunks_.insert(chunks_.end(), chunks.begin(), chunks.end());
}

std::vector<DocumentChunk> CorpusStore::chunks() const {
  std::lock_guard lock(mutex_);
  return chunks_;
}

std::size_t CorpusStore::document_count() const {
  std::lock_guard lock(mutex_);
  return doc_ids_.size();
}

std::size_t CorpusStore::chunk_count() const {
  std::lock_guard lock(mutex_);
  return chunks_.size();
}

bool CorpusStore::has_document(const std::string& doc_id) const {
  std::lock_guard lock(mutex_);
  return doc_ids_.count(doc_id) > 0;
}

std::vector<std::string> CorpusStore::reserve_doc_ids(std::size_t count) {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  while (ids.size() < count) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "doc-%05zu", next_seq_++);
    if (!doc_ids_.count(buf)) ids.emplace_back(buf);
  }
  return ids;
}

IngestStats ingest_corpus(const std::vector<Origin>& origins, CorpusStore& store,
                          const IngestOptions& options) {
  if (options.max_chunk_tokens < 1) throw ConfigError("max_chunk_tokens must be >= 1");
  IngestStats stats;
  if (origins.empty()) return stats;

  const FetchFn fetch = options.fetcher ? options.fetcher : FetchFn(fetch_document);
  const auto ids = store.reserve_doc_ids(origins.size());

  struct Outcome {
    std::optional<SourceDocument> doc;
    std::vector<DocumentChunk> chunks;
    std::optional<IngestFailure> failure;
  };
  std::vector<Outcome> outcomes(origins.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < origins.size(); i = next++) {
      Outcome& out = outcomes[i];
      try {
        out.doc = fetch(origins[i], ids[i]);
        out.chunks = chunk_document(*out.doc, options.max_chunk_tokens);
      } catch (const Error& e) {
        out.doc.reset();
        out.failure = IngestFailure{origins[i].label, e.kind(), e.what()};
      } catch (const std::exception& e) {
        out.doc.reset();
        out.failure = IngestFailure{origins[i].label, "FetchError", e.what()};
      }
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(options.parallelism, 1, origins.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (auto& out : outcomes) {
    if (out.failure) {
      stats.errors.push_back(*out.failure);
      continue;
    }
    store.append(*out.doc, out.chunks);
    ++stats.documents;
    stats.chunks += out.chunks.size();
  }
  return stats;
}

}  // namespace copilot::ingest
