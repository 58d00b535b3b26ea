#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace copilot::text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a. Stable across platforms and process runs.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Random hex identifier with a prefix, e.g. "s-3fa2...".
std::string random_id(std::string_view prefix);

/// Uniform integer in [0, bound) by rejection sampling. Unlike
/// std::uniform_int_distribution the sequence is identical on every
/// standard library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Uniform integer in [lo, hi].
int uniform_int(std::mt19937_64& rng, int lo, int hi);

/// Fisher-Yates with `uniform_below`; portable across standard libraries.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);

/// Milliseconds since the Unix epoch.
std::int64_t now_millis();
std::string iso8601_utc(std::int64_t millis);

}  // namespace copilot::text
