#include <cctype>

#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

bool Expr::operator==(const Expr& other) const = default;

Expr make_column(std::string name, std::string qualifier) {
  Expr e;
  e.kind = ExprKind::Column;
  e.text = std::move(name);
  e.qualifier = std::move(qualifier);
  return e;
}

Expr make_number(std::string literal) {
  Expr e;
  e.kind = ExprKind::Number;
  e.text = std::move(literal);
  return e;
}

Expr make_string(std::string value, char quote) {
  Expr e;
  e.kind = ExprKind::String;
  e.text = std::move(value);
  e.quote = quote;
  return e;
}

Expr make_star(std::string qualifier) {
  Expr e;
  e.kind = ExprKind::Star;
  e.qualifier = std::move(qualifier);
  return e;
}

Expr make_binary(ExprKind kind, std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = kind;
  e.op = std::move(op);
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

bool is_literal(const Expr& e) {
  return e.kind == ExprKind::Number || e.kind == ExprKind::String || e.kind == ExprKind::Null;
}

bool is_atom(const Expr& e) {
  return is_literal(e) || e.kind == ExprKind::Column || e.kind == ExprKind::Star ||
         e.kind == ExprKind::Aggregate;
}

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Or: return 1;
    case ExprKind::And: return 2;
    case ExprKind::Not: return 3;
    case ExprKind::Compare:
    case ExprKind::Like:
    case ExprKind::InList:
    case ExprKind::InSubquery:
    case ExprKind::Between:
    case ExprKind::IsNull: return 4;
    case ExprKind::Arith: return (e.op == "+" || e.op == "-") ? 5 : 6;
    case ExprKind::Negate: return 7;
    default: return 8;
  }
}

std::string quote_ident(const std::string& name) {
  bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) ||
                                 name[0] == '_' || static_cast<unsigned char>(name[0]) >= 0x80);
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          static_cast<unsigned char>(c) >= 0x80)) {
      plain = false;
    }
  }
  if (plain && !is_reserved_keyword(text::to_upper(name))) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

std::string quote_string(const std::string& value, char quote) {
  std::string out(1, quote);
  for (char c : value) {
    if (c == quote) out.push_back(quote);
    out.push_back(c);
  }
  out.push_back(quote);
  return out;
}

std::string render_child(const Expr& child, int min_prec) {
  std::string s = render_expr(child);
  if (precedence(child) < min_prec) return "(" + s + ")";
  return s;
}

std::string render_table(const TableRef& t) {
  std::string out = quote_ident(t.name);
  if (!t.alias.empty()) out += (t.as_keyword ? " AS " : " ") + quote_ident(t.alias);
  return out;
}

std::string render_join_kind(const Join& j) {
  switch (j.kind) {
    case JoinKind::Inner: return j.explicit_inner ? "INNER JOIN" : "JOIN";
    case JoinKind::Left: return j.explicit_outer ? "LEFT OUTER JOIN" : "LEFT JOIN";
    case JoinKind::Right: return j.explicit_outer ? "RIGHT OUTER JOIN" : "RIGHT JOIN";
    case JoinKind::Full: return j.explicit_outer ? "FULL OUTER JOIN" : "FULL JOIN";
    case JoinKind::Cross: return "CROSS JOIN";
  }
  return "JOIN";
}

}  // namespace

std::string render_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Column:
      return e.qualifier.empty() ? quote_ident(e.text)
                                 : quote_ident(e.qualifier) + "." + quote_ident(e.text);
    case ExprKind::Star:
      return e.qualifier.empty() ? "*" : quote_ident(e.qualifier) + ".*";
    case ExprKind::Number:
      return e.text;
    case ExprKind::String:
      return quote_string(e.text, e.quote);
    case ExprKind::Null:
      return "NULL";
    case ExprKind::Aggregate:
      return e.text + "(" + (e.distinct ? "DISTINCT " : "") +
             (e.args.empty() ? std::string() : render_expr(e.args[0])) + ")";
    case ExprKind::Negate:
      return "- " + render_child(e.args.at(0), 7);
    case ExprKind::Arith: {
      const int p = precedence(e);
      return render_child(e.args.at(0), p) + " " + e.op + " " + render_child(e.args.at(1), p + 1);
    }
    case ExprKind::Compare:
      return render_child(e.args.at(0), 5) + " " + e.op + " " + render_child(e.args.at(1), 5);
    case ExprKind::Like:
      return render_child(e.args.at(0), 5) + (e.negated ? " NOT LIKE " : " LIKE ") +
             render_child(e.args.at(1), 5);
    case ExprKind::InList: {
      std::vector<std::string> items;
      for (std::size_t i = 1; i < e.args.size(); ++i) items.push_back(render_child(e.args[i], 5));
      return render_child(e.args.at(0), 5) + (e.negated ? " NOT IN (" : " IN (") +
             text::join(items, ", ") + ")";
    }
    case ExprKind::InSubquery:
      return render_child(e.args.at(0), 5) + (e.negated ? " NOT IN (" : " IN (") +
             (e.subquery.empty() ? std::string() : render_sql(e.subquery.front())) + ")";
    case ExprKind::Between:
      return render_child(e.args.at(0), 5) + (e.negated ? " NOT BETWEEN " : " BETWEEN ") +
             render_child(e.args.at(1), 5) + " AND " + render_child(e.args.at(2), 5);
    case ExprKind::IsNull:
      return render_child(e.args.at(0), 5) + (e.negated ? " IS NOT NULL" : " IS NULL");
    case ExprKind::And:
    case ExprKind::Or: {
      const int p = precedence(e);
      std::vector<std::string> parts;
      for (const auto& a : e.args) parts.push_back(render_child(a, p + 1));
      return text::join(parts, e.kind == ExprKind::And ? " AND " : " OR ");
    }
    case ExprKind::Not:
      return "NOT " + render_child(e.args.at(0), 3);
    case ExprKind::Paren:
      return "(" + render_expr(e.args.at(0)) + ")";
  }
  return {};
}

std::string render_sql(const SqlAst& ast) {
  std::string out = "SELECT ";
  if (ast.distinct) out += "DISTINCT ";
  std::vector<std::string> items;
  for (const auto& item : ast.items) {
    std::string s = render_expr(item.expr);
    if (!item.alias.empty()) s += (item.as_keyword ? " AS " : " ") + quote_ident(item.alias);
    items.push_back(std::move(s));
  }
  out += text::join(items, ", ");
  out += " FROM " + render_table(ast.from);
  for (const auto& j : ast.joins) {
    out += " " + render_join_kind(j) + " " + render_table(j.table);
    if (j.on) out += " ON " + render_expr(*j.on);
  }
  if (ast.where) out += " WHERE " + render_expr(*ast.where);
  if (!ast.group_by.empty()) {
    std::vector<std::string> keys;
    for (const auto& g : ast.group_by) keys.push_back(render_expr(g));
    out += " GROUP BY " + text::join(keys, ", ");
  }
  if (ast.having) out += " HAVING " + render_expr(*ast.having);
  if (!ast.order_by.empty()) {
    std::vector<std::string> keys;
    for (const auto& k : ast.order_by) {
      std::string s = render_expr(k.expr);
      if (k.dir == SortDir::Asc) s += " ASC";
      if (k.dir == SortDir::Desc) s += " DESC";
      keys.push_back(std::move(s));
    }
    out += " ORDER BY " + text::join(keys, ", ");
  }
  if (ast.limit) out += " LIMIT " + std::to_string(*ast.limit);
  return out;
}

}  // namespace copilot::sql
