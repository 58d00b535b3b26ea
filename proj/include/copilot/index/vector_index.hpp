#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "copilot/index/embedding.hpp"

namespace copilot::index {

struct EmbeddingRecord {
  std::string chunk_id;
  EmbeddingVector vector;
};

struct ScoredChunk {
  std::string chunk_id;
  double score = 0.0;
};

/// Exact flat index over unit-agnostic vectors. Immutable once handed out;
/// build a new one to change contents.
class VectorIndex {
 public:
  VectorIndex(std::uint32_t dimension, std::string provider_tag);

  /// Throws DimensionError, DegenerateVector (zero norm) or ConfigError
  /// (duplicate chunk id).
  void add(EmbeddingRecord record);

  /// Exhaustive scan. Results sorted by score descending, ties by chunk_id
  /// ascending; min(k, size()) entries. Throws ConfigError for k == 0 and
  /// DimensionError for a query of the wrong dimension.
  std::vector<ScoredChunk> top_k(const EmbeddingVector& query, std::size_t k) const;

  std::uint32_t dimension() const { return dimension_; }
  const std::string& provider_tag() const { return provider_tag_; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool contains(const std::string& chunk_id) const { return ids_.count(chunk_id) > 0; }

  /// Same dimension, tag, ids and bit-identical components, in order.
  bool operator==(const VectorIndex& other) const;

 private:
  std::uint32_t dimension_;
  std::string provider_tag_;
  std::vector<EmbeddingRecord> records_;
  std::vector<double> norms_;
  std::unordered_set<std::string> ids_;
};

/// Binary layout (all integers u32 little-endian): "VIDX", version,
/// dimension, record count, then per record the id length, the UTF-8 id
/// bytes and `dimension` IEEE-754 binary32 components. The provider tag and
/// build time go to a sidecar text file (`meta_path_for(path)`).
void save_index(const VectorIndex& index, const std::string& path);

/// Throws IndexFormatError on bad magic, unknown version, truncation,
/// trailing bytes or a missing sidecar.
VectorIndex load_index(const std::string& path);

/// "<dir>/index.vidx" -> "<dir>/index.meta".
std::string meta_path_for(const std::string& index_path);

inline constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace copilot::index
