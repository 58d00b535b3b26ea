#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace copilot::sql {

struct SelectStmt;

enum class ExprKind {
  Column,       // qualifier.text
  Star,         // [qualifier.]*
  Number,       // text = literal as written
  String,       // text = unescaped value, quote = delimiter
  Null,
  Aggregate,    // text = function name as written, distinct, args[0] = operand
  Negate,       // -args[0]
  Arith,        // args[0] op args[1], op in + - * / %
  Compare,      // args[0] op args[1], op in = < > <= >= <> !=
  Like,         // args[0] [NOT] LIKE args[1]
  InList,       // args[0] [NOT] IN (args[1..])
  InSubquery,   // args[0] [NOT] IN (subquery[0])
  Between,      // args[0] [NOT] BETWEEN args[1] AND args[2]
  IsNull,       // args[0] IS [NOT] NULL
  And,          // n-ary, >= 2 args
  Or,           // n-ary, >= 2 args
  Not,          // NOT args[0]
  Paren,        // ( args[0] )
};

/// Uniform expression node. Field meaning depends on `kind` (see ExprKind).
struct Expr {
  ExprKind kind = ExprKind::Column;
  std::string text;
  std::string qualifier;
  std::string op;
  bool negated = false;   // NOT LIKE / NOT IN / NOT BETWEEN / IS NOT NULL
  bool distinct = false;  // aggregate DISTINCT
  char quote = '\'';
  std::vector<Expr> args;
  std::vector<SelectStmt> subquery;  // 0 or 1 element

  bool operator==(const Expr& other) const;
};

struct SelectItem {
  Expr expr;
  std::string alias;
  bool as_keyword = false;

  bool operator==(const SelectItem&) const = default;
};

struct TableRef {
  std::string name;
  std::string alias;
  bool as_keyword = false;

  bool operator==(const TableRef&) const = default;
};

enum class JoinKind { Inner, Left, Right, Full, Cross };

struct Join {
  JoinKind kind = JoinKind::Inner;
  bool explicit_inner = false;  // "INNER JOIN" rather than "JOIN"
  bool explicit_outer = false;  // "LEFT OUTER JOIN"
  TableRef table;
  std::optional<Expr> on;

  bool operator==(const Join&) const = default;
};

enum class SortDir { Unspecified, Asc, Desc };

struct OrderKey {
  Expr expr;
  SortDir dir = SortDir::Unspecified;

  bool operator==(const OrderKey&) const = default;
};

struct SelectStmt {
  bool distinct = false;
  std::vector<SelectItem> items;
  TableRef from;
  std::vector<Join> joins;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  std::vector<OrderKey> order_by;
  std::optional<std::int64_t> limit;

  bool operator==(const SelectStmt&) const = default;
};

using SqlAst = SelectStmt;

Expr make_column(std::string name, std::string qualifier = {});
Expr make_number(std::string literal);
Expr make_string(std::string value, char quote = '\'');
Expr make_star(std::string qualifier = {});
Expr make_binary(ExprKind kind, std::string op, Expr lhs, Expr rhs);

bool is_atom(const Expr& e);
bool is_literal(const Expr& e);

}  // namespace copilot::sql
