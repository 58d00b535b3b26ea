#include "copilot/gateway/transcript.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::gateway {

using nlohmann::json;

Transcript Transcript::open(const std::string& path) {
  Transcript t;
  t.path_ = path;
  std::ifstream in(path);
  if (!in) return t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      TranscriptEntry e;
      e.fingerprint = j.at("fingerprint").get<std::string>();
      e.endpoint = j.at("endpoint").get<std::string>();
      e.response = j.at("response").get<std::string>();
      e.latency_ms = j.value("latency_ms", std::int64_t{0});
      if (!t.by_fingerprint_.count(e.fingerprint)) {
        t.by_fingerprint_.emplace(e.fingerprint, t.entries_.size());
        t.entries_.push_back(std::move(e));
      }
    } catch (const json::exception& ex) {
      throw ConfigError("bad transcript line " + path + ":" + std::to_string(line_no) + ": " +
                        ex.what());
    }
  }
  return t;
}

std::optional<TranscriptEntry> Transcript::find(const std::string& fingerprint) const {
  std::lock_guard lock(mutex_);
  const auto it = by_fingerprint_.find(fingerprint);
  if (it == by_fingerprint_.end()) return std::nullopt;
  return entries_[it->second];
}

bool Transcript::append(const TranscriptEntry& entry) {
  std::lock_guard lock(mutex_);
  if (by_fingerprint_.count(entry.fingerprint)) return false;
  by_fingerprint_.emplace(entry.fingerprint, entries_.size());
  entries_.push_back(entry);
  if (!path_.empty()) {
    const std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path_, std::ios::app);
    out << json{{"fingerprint", entry.fingerprint},
                {"endpoint", entry.endpoint},
                {"response", entry.response},
                {"latency_ms", entry.latency_ms}}
               .dump()
        << '\n';
  }
  return true;
}

std::vector<TranscriptEntry> Transcript::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t Transcript::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string Transcript::reference() const { return path_.empty() ? "memory" : path_; }

Transcript::Transcript(Transcript&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
  by_fingerprint_ = std::move(other.by_fingerprint_);
  path_ = std::move(other.path_);
}

Transcript& Transcript::operator=(Transcript&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = std::move(other.entries_);
    by_fingerprint_ = std::move(other.by_fingerprint_);
    path_ = std::move(other.path_);
  }
  return *this;
}

}  // namespace copilot::gateway
