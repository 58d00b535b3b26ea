#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "copilot/common/error.hpp"
#include "copilot/sql/ast.hpp"

namespace copilot::sql {

/// Syntax error with the byte offset where parsing stopped and the set of
/// token descriptions that would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::set<std::string> expected, const std::string& message);

  std::size_t offset() const { return offset_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

enum class TokenKind { Ident, Keyword, Number, String, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // keywords uppercased; strings unescaped; quoted idents unquoted
  char quote = 0;    // string delimiter, or '`' for quoted identifiers
  std::size_t offset = 0;
};

/// Splits `input` into tokens, ending with an End token. Double-quoted text
/// is a string literal (SQLite convention, common in generated SQL);
/// backticks quote identifiers.
std::vector<Token> lex(std::string_view input);

bool is_reserved_keyword(std::string_view upper_word);

/// Parses one SELECT statement of the supported subset. A trailing
/// semicolon is accepted and dropped. Never crashes on arbitrary input:
/// every failure is a ParseError.
SqlAst parse_sql(std::string_view input);

struct ColumnDef {
  std::string name;
  std::string type;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnDef> columns;
};

/// Parses one or more "CREATE TABLE name (col type, ...)" statements
/// separated by commas or semicolons.
std::vector<TableSchema> parse_create_tables(std::string_view input);

/// Canonical single-line SQL for an AST. Keywords are uppercase;
/// identifiers, literals and spellings recorded in the AST are kept, so
/// parse_sql(render_sql(parse_sql(q))) == parse_sql(q).
std::string render_sql(const SqlAst& ast);
std::string render_expr(const Expr& expr);

/// Canonical form for comparison: identifiers and function names
/// lowercased (string literals untouched), optional AS and OUTER/INNER
/// dropped, numbers rewritten to their canonical decimal spelling, "<>"
/// written as "!=", ORDER BY keys given an explicit ASC, string literals
/// single-quoted and parentheses around atoms removed.
///
/// Lenient mode also flattens and sorts AND conjuncts and orients each
/// comparison so that a literal sits on the right (otherwise the operand
/// that renders smaller goes left), mirroring the operator as needed.
SqlAst normalize_ast(const SqlAst& ast, bool lenient = false);

/// "056.50" -> "56.5", "-0" -> "0". Input must be a decimal literal.
std::string canonical_decimal(std::string_view literal);

}  // namespace copilot::sql
