#pragma once

// Shared test helpers and reference implementations. The oracles below are
// written from the stated rules, not from the library code, so that tests
// compare two independent computations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

inline std::string fixture(const std::string& name) {
  return std::string(COPILOT_FIXTURES) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("copilot-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Tokens: maximal runs of ASCII letters/digits or bytes >= 0x80, or a single
// other non-space character.
inline std::vector<std::string> oracle_tokens(const std::string& s) {
  auto wordish = [](unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
  };
  auto spacey = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (wordish(c)) {
      cur.push_back(static_cast<char>(c));
      continue;
    }
    if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    if (!spacey(c)) out.emplace_back(1, static_cast<char>(c));
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::uint64_t oracle_fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Unit-length bucket-count profile over lowercased tokens.
inline std::vector<double> oracle_mock_embedding(const std::string& text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  for (auto tok : oracle_tokens(text)) {
    for (auto& ch : tok) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    v[oracle_fnv1a(tok) % dim] += 1.0;
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

inline double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct OracleHit {
  std::string id;
  double score;
};

// Exhaustive scan: score every record, full sort by (score desc, id asc).
inline std::vector<OracleHit> oracle_top_k(
    const std::vector<std::pair<std::string, std::vector<float>>>& records,
    const std::vector<float>& query, std::size_t k) {
  std::vector<OracleHit> all;
  for (const auto& [id, v] : records) all.push_back({id, oracle_cosine(query, v)});
  std::stable_sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.score > b.score) return true;
    if (a.score < b.score) return false;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// 'C' contributor, 'M' mitigator, 'N' neither; strict inequalities.
inline char oracle_factor_class(int score, int threshold = 5) {
  if (score > threshold) return 'C';
  if (score < -threshold) return 'M';
  return 'N';
}

// Table 2 row and the texts it must produce.
inline const char* kTable2Csv =
    "model name,channel,absolute change,targeting quality,contact frequency,ad cannibalization\n"
    "lead,display,-82,63,-4,-33\n";

inline const char* kTable2List =
    "model name: lead\n"
    "channel: display\n"
    "absolute change: -82\n"
    "targeting quality: 63\n"
    "contact frequency: -4\n"
    "ad cannibalization: -33";

inline const char* kTable2Text =
    "The **model name** is lead, the **channel** is display, the **absolute change** is -82, the "
    "**targeting quality** has a value of 63, the **contact frequency** has a value of -4, the "
    "**ad cannibalization** has a value of -33.";

// Ideal interpretation with "is a not a factor" read as "is not a factor".
inline const char* kTable2Explanation =
    "lead - display: The absolute change of this channel is -82%, which indicates a decrease in "
    "the touch point's credit. The targeting quality is a contributing factor with a score of 63%. "
    "The contact frequency is not a factor with a score of -4%. The ad cannibalization is a "
    "mitigating factor with a score of -33%.";

// Mean of integer scores rounded half-up to 2 decimals, as "x.yy".
inline std::string oracle_mean2(long sum, long count) {
  const long scaled = (200 * sum + count) / (2 * count);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld.%02ld", scaled / 100, scaled % 100);
  return buf;
}

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace testsupport
