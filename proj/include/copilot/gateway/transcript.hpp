#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace copilot::gateway {

struct TranscriptEntry {
  std::string fingerprint;
  std::string endpoint;
  std::string response;
  std::int64_t latency_ms = 0;
};

/// Recorded model exchanges keyed by request fingerprint. Appends are
/// serialized; the first recording of a fingerprint wins. When bound to a
/// file every new entry is appended to it as one JSON line.
class Transcript {
 public:
  Transcript() = default;

  /// Loads `path` if it exists and appends future entries to it.
  static Transcript open(const std::string& path);

  std::optional<TranscriptEntry> find(const std::string& fingerprint) const;

  /// Returns false (and records nothing) when the fingerprint is present.
  bool append(const TranscriptEntry& entry);

  std::vector<TranscriptEntry> entries() const;
  std::size_t size() const;

  /// File path when file-backed, otherwise "memory".
  std::string reference() const;

  Transcript(Transcript&& other) noexcept;
  Transcript& operator=(Transcript&& other) noexcept;

 private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_fingerprint_;
  std::string path_;
};

}  // namespace copilot::gateway
