#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace copilot::table {

inline constexpr int kScoreLimit = 100;
inline constexpr int kFactorThreshold = 5;

/// Factor columns of the standard attribution report, in column order.
const std::vector<std::string>& default_factors();

struct AttributionRow {
  std::string model_name;
  std::string channel;
  int absolute_change = 0;  // percent
  std::vector<std::pair<std::string, int>> factor_scores;  // column order

  /// Throws RangeError for a number outside [-100, 100] and ConfigError for
  /// an empty name or factor list.
  void validate() const;

  bool operator==(const AttributionRow&) const = default;
};

/// The worked example: lead / display, -82, with scores 63, -4, -33.
AttributionRow example_row();

enum class FactorClass { Contributor, Mitigator, NonInfluential };

std::string to_string(FactorClass c);  // "CONTRIBUTOR", ...

/// Above +threshold contributes, below -threshold mitigates, anything in
/// between (bounds included) is non-influential. RangeError outside
/// [-100, 100].
FactorClass classify_factor(int score, int threshold = kFactorThreshold);

enum class RowFormat { Csv, List, Text };

RowFormat parse_row_format(std::string_view name);  // "csv" | "list" | "text"
std::string to_string(RowFormat f);

/// CSV: header line then value line. LIST: one "name: value" line per
/// field. TEXT: one sentence, "is" for identity fields and "has a value
/// of" for factors, names in bold markdown.
std::string render_row(const AttributionRow& row, RowFormat format);

/// Reads a CSV table whose header is "model name,channel,absolute change"
/// followed by one column per factor. Throws DatasetError with the line
/// number on malformed input.
std::vector<AttributionRow> parse_csv_rows(std::string_view csv);

enum class Direction { Decrease, Increase, NoChange };

Direction direction_of(int absolute_change);
std::string direction_phrase(Direction d);  // "a decrease" | "an increase" | "no change"

struct Explanation {
  std::string header;  // "model - channel"
  std::string direction_sentence;
  std::vector<std::string> factor_sentences;
  std::string full_text;
};

/// Programmatic ground truth for one row.
Explanation ground_truth_explanation(const AttributionRow& row,
                                     int threshold = kFactorThreshold);

}  // namespace copilot::table
