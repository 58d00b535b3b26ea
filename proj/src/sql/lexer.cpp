#include <algorithm>
#include <array>
#include <cctype>

#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

namespace {

constexpr std::array<std::string_view, 27> kKeywords = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY",   "HAVING", "ORDER",    "LIMIT", "AND",
    "OR",     "NOT",  "IN",    "LIKE",  "BETWEEN", "JOIN", "ON",     "AS",    "INNER",
    "LEFT",   "RIGHT", "FULL", "OUTER", "CROSS", "DISTINCT", "ASC", "DESC",  "IS"};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool ident_char(char c) {
  return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

std::string describe(std::string_view input, std::size_t pos) {
  if (pos >= input.size()) return "end of input";
  const auto c = static_cast<unsigned char>(input[pos]);
  if (std::isprint(c)) return std::string("'") + static_cast<char>(c) + "'";
  return "byte 0x" + text::hex64(c).substr(14);
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::set<std::string> expected,
                       const std::string& message)
    : Error("ParseError", "at offset " + std::to_string(offset) + ": " + message +
                              (expected.empty()
                                   ? std::string()
                                   : " (expected " +
                                         text::join({expected.begin(), expected.end()}, ", ") +
                                         ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

bool is_reserved_keyword(std::string_view upper_word) {
  return std::find(kKeywords.begin(), kKeywords.end(), upper_word) != kKeywords.end() ||
         upper_word == "NULL";
}

std::vector<Token> lex(std::string_view input) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = input.size();
  while (i < n) {
    const char c = input[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token tok;
    tok.offset = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(input[j])) ++j;
      std::string word(input.substr(i, j - i));
      const std::string upper = text::to_upper(word);
      if (is_reserved_keyword(upper)) {
        tok.kind = TokenKind::Keyword;
        tok.text = upper;
      } else {
        tok.kind = TokenKind::Ident;
        tok.text = std::move(word);
      }
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(input[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(input[j]))) ++j;
      if (j < n && input[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(input[j]))) ++j;
      }
      if (j < n && ident_start(input[j])) {
        throw ParseError(j, {}, "malformed number");
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(input.substr(i, j - i));
      i = j;
    } else if (c == '\'' || c == '"' || c == '`') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (input[j] == c) {
          if (j + 1 < n && input[j + 1] == c) {
            value.push_back(c);
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value.push_back(input[j]);
        ++j;
      }
      if (!closed) {
        throw ParseError(i, {}, c == '`' ? "unterminated quoted identifier"
                                         : "unterminated string literal");
      }
      if (c == '`') {
        if (value.empty()) throw ParseError(i, {}, "empty quoted identifier");
        tok.kind = TokenKind::Ident;
      } else {
        tok.kind = TokenKind::String;
      }
      tok.text = std::move(value);
      tok.quote = c;
      i = j;
    } else {
      static constexpr std::array<std::string_view, 3> kTwoChar = {"<=", ">=", "<>"};
      const auto two = input.substr(i, 2);
      if (two.size() == 2 &&
          (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end() || two == "!=")) {
        tok.kind = TokenKind::Symbol;
        tok.text = std::string(two);
        i += 2;
      } else if (std::string_view("(),.*=<>+-/%;").find(c) != std::string_view::npos) {
        tok.kind = TokenKind::Symbol;
        tok.text = std::string(1, c);
        ++i;
      } else {
        throw ParseError(i, {}, "unexpected character " + describe(input, i));
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.offset = n;
  out.push_back(end);
  return out;
}

}  // namespace copilot::sql
