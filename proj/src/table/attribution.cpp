#include "copilot/table/attribution.hpp"

#include <charconv>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::table {

const std::vector<std::string>& default_factors() {
  static const std::vector<std::string> kFactors = {"targeting quality", "contact frequency",
                                                    "ad cannibalization"};
  return kFactors;
}

namespace {

void check_range(const std::string& field, int value) {
  if (value < -kScoreLimit || value > kScoreLimit) {
    throw RangeError(field + " = " + std::to_string(value) + " is outside [-100, 100]");
  }
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(text::trim(cur)));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DatasetError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::string(text::trim(cur)));
  return fields;
}

int parse_int(const std::string& s, const std::string& field, std::size_t line_no) {
  int value = 0;
  const char* begin = s.data();
  if (!s.empty() && s[0] == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DatasetError("line " + std::to_string(line_no) + ": " + field + " is not an integer: \"" +
                       s + "\"");
  }
  return value;
}

}  // namespace

void AttributionRow::validate() const {
  if (model_name.empty()) throw ConfigError("model name is empty");
  if (channel.empty()) throw ConfigError("channel is empty");
  if (factor_scores.empty()) throw ConfigError("row has no factors");
  check_range("absolute change", absolute_change);
  for (const auto& [name, score] : factor_scores) {
    if (name.empty()) throw ConfigError("factor name is empty");
    check_range(name, score);
  }
}

AttributionRow example_row() {
  AttributionRow row;
  row.model_name = "lead";
  row.channel = "display";
  row.absolute_change = -82;
  row.factor_scores = {{"targeting quality", 63}, {"contact frequency", -4},
                       {"ad cannibalization", -33}};
  return row;
}

std::string to_string(FactorClass c) {
  switch (c) {
    case FactorClass::Contributor: return "CONTRIBUTOR";
    case FactorClass::Mitigator: return "MITIGATOR";
    case FactorClass::NonInfluential: return "NON_INFLUENTIAL";
  }
  return "NON_INFLUENTIAL";
}

FactorClass classify_factor(int score, int threshold) {
  check_range("score", score);
  if (score > threshold) return FactorClass::Contributor;
  if (score < -threshold) return FactorClass::Mitigator;
  return FactorClass::NonInfluential;
}

RowFormat parse_row_format(std::string_view name) {
  const std::string lower = text::to_lower(name);
  if (lower == "csv") return RowFormat::Csv;
  if (lower == "list") return RowFormat::List;
  if (lower == "text") return RowFormat::Text;
  throw ConfigError("unknown row format \"" + std::string(name) + "\" (expected csv, list or text)");
}

std::string to_string(RowFormat f) {
  switch (f) {
    case RowFormat::Csv: return "csv";
    case RowFormat::List: return "list";
    case RowFormat::Text: return "text";
  }
  return "csv";
}

std::string render_row(const AttributionRow& row, RowFormat format) {
  std::vector<std::pair<std::string, std::string>> fields = {
      {"model name", row.model_name},
      {"channel", row.channel},
      {"absolute change", std::to_string(row.absolute_change)}};
  for (const auto& [name, score] : row.factor_scores) fields.emplace_back(name, std::to_string(score));

  std::string out;
  switch (format) {
    case RowFormat::Csv: {
      std::vector<std::string> names;
      std::vector<std::string> values;
      for (const auto& [name, value] : fields) {
        names.push_back(csv_field(name));
        values.push_back(csv_field(value));
      }
      out = text::join(names, ",") + "\n" + text::join(values, ",");
      break;
    }
    case RowFormat::List: {
      std::vector<std::string> lines;
      for (const auto& [name, value] : fields) lines.push_back(name + ": " + value);
      out = text::join(lines, "\n");
      break;
    }
    case RowFormat::Text: {
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto& [name, value] = fields[i];
        parts.push_back("the **" + name + "** " + (i < 3 ? "is " : "has a value of ") + value);
      }
      out = text::join(parts, ", ") + ".";
      out[0] = 'T';
      break;
    }
  }
  return out;
}

std::vector<AttributionRow> parse_csv_rows(std::string_view csv) {
  std::vector<std::string> lines;
  for (auto& l : text::split(csv, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  std::size_t header_line = 0;
  while (header_line < lines.size() && text::trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw DatasetError("line 1: table is empty");

  const auto header = split_csv_line(lines[header_line], header_line + 1);
  static const std::vector<std::string> kIdentity = {"model name", "channel", "absolute change"};
  if (header.size() < 4) {
    throw DatasetError("line " + std::to_string(header_line + 1) +
                       ": expected header \"model name,channel,absolute change,<factor>...\"");
  }
  for (std::size_t i = 0; i < kIdentity.size(); ++i) {
    if (text::to_lower(header[i]) != kIdentity[i]) {
      throw DatasetError("line " + std::to_string(header_line + 1) + ": column " +
                         std::to_string(i + 1) + " must be \"" + kIdentity[i] + "\"");
    }
  }

  std::vector<AttributionRow> rows;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (text::trim(lines[li]).empty()) continue;
    const auto fields = split_csv_line(lines[li], li + 1);
    if (fields.size() != header.size()) {
      throw DatasetError("line " + std::to_string(li + 1) + ": expected " +
                         std::to_string(header.size()) + " fields, got " +
                         std::to_string(fields.size()));
    }
    AttributionRow row;
    row.model_name = fields[0];
    row.channel = fields[1];
    row.absolute_change = parse_int(fields[2], header[2], li + 1);
    for (std::size_t i = 3; i < fields.size(); ++i) {
      row.factor_scores.emplace_back(header[i], parse_int(fields[i], header[i], li + 1));
    }
    try {
      row.validate();
    } catch (const RangeError& e) {
      throw RangeError("line " + std::to_string(li + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw DatasetError("line " + std::to_string(li + 1) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Direction direction_of(int absolute_change) {
  if (absolute_change < 0) return Direction::Decrease;
  if (absolute_change > 0) return Direction::Increase;
  return Direction::NoChange;
}

std::string direction_phrase(Direction d) {
  switch (d) {
    case Direction::Decrease: return "a decrease";
    case Direction::Increase: return "an increase";
    case Direction::NoChange: return "no change";
  }
  return "no change";
}

Explanation ground_truth_explanation(const AttributionRow& row, int threshold) {
  row.validate();
  Explanation ex;
  ex.header = row.model_name + " - " + row.channel;
  ex.direction_sentence = "The absolute change of this channel is " +
                          std::to_string(row.absolute_change) + "%, which indicates " +
                          direction_phrase(direction_of(row.absolute_change)) +
                          " in the touch point's credit.";
  for (const auto& [name, score] : row.factor_scores) {
    std::string role;
    switch (classify_factor(score, threshold)) {
      case FactorClass::Contributor: role = "is a contributing factor"; break;
      case FactorClass::Mitigator: role = "is a mitigating factor"; break;
      case FactorClass::NonInfluential: role = "is not a factor"; break;
    }
    ex.factor_sentences.push_back("The " + name + " " + role + " with a score of " +
                                  std::to_string(score) + "%.");
  }
  ex.full_text = ex.header + ": " + ex.direction_sentence;
  for (const auto& s : ex.factor_sentences) ex.full_text += " " + s;
  return ex;
}

}  // namespace copilot::table
