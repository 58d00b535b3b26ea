#include <array>
#include <charconv>

#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

namespace {

constexpr int kMaxDepth = 200;

constexpr std::array<std::string_view, 5> kAggregates = {"COUNT", "SUM", "AVG", "MIN", "MAX"};

bool is_aggregate_name(std::string_view name) {
  const auto upper = text::to_upper(name);
  for (auto a : kAggregates) {
    if (a == upper) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view input) : tokens_(lex(input)) {}

  SqlAst parse_statement() {
    SqlAst stmt = parse_select();
    accept_symbol(";");
    if (peek().kind != TokenKind::End) fail({"end of input", "';'"}, "unexpected trailing input");
    return stmt;
  }

  std::vector<TableSchema> parse_ddl() {
    std::vector<TableSchema> out;
    do {
      out.push_back(parse_create_table());
    } while ((accept_symbol(",") || accept_symbol(";")) && peek().kind != TokenKind::End);
    if (peek().kind != TokenKind::End) fail({"end of input", "','"}, "unexpected trailing input");
    return out;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) parser.fail({}, "expression nested too deeply");
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
  }

  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Keyword && t.text == kw;
  }

  bool is_symbol(std::string_view sym, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == sym;
  }

  bool accept_keyword(std::string_view kw) {
    if (!is_keyword(kw)) return false;
    next();
    return true;
  }

  bool accept_symbol(std::string_view sym) {
    if (!is_symbol(sym)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(std::set<std::string> expected, const std::string& message) const {
    throw ParseError(peek().offset, std::move(expected), message);
  }

  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail({std::string(kw)}, "unexpected " + describe(peek()));
  }

  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) {
      fail({"'" + std::string(sym) + "'"}, "unexpected " + describe(peek()));
    }
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End: return "end of input";
      case TokenKind::Keyword: return "keyword " + t.text;
      case TokenKind::Ident: return "identifier " + t.text;
      case TokenKind::Number: return "number " + t.text;
      case TokenKind::String: return "string literal";
      case TokenKind::Symbol: return "'" + t.text + "'";
    }
    return "token";
  }

  std::string expect_ident(const char* what) {
    if (peek().kind != TokenKind::Ident) fail({what}, "unexpected " + describe(peek()));
    return next().text;
  }

  SqlAst parse_select() {
    DepthGuard guard(*this);
    SqlAst stmt;
    expect_keyword("SELECT");
    stmt.distinct = accept_keyword("DISTINCT");
    do {
      stmt.items.push_back(parse_select_item());
    } while (accept_symbol(","));
    if (!accept_keyword("FROM")) fail({"FROM", "','", "AS", "alias"}, "unexpected " + describe(peek()));
    stmt.from = parse_table_ref();
    while (true) {
      auto join = parse_join();
      if (!join) break;
      stmt.joins.push_back(std::move(*join));
    }
    if (accept_keyword("WHERE")) stmt.where = parse_expr();
    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      do {
        stmt.group_by.push_back(parse_expr());
      } while (accept_symbol(","));
    }
    if (accept_keyword("HAVING")) stmt.having = parse_expr();
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      do {
        OrderKey key;
        key.expr = parse_expr();
        if (accept_keyword("ASC")) key.dir = SortDir::Asc;
        else if (accept_keyword("DESC")) key.dir = SortDir::Desc;
        stmt.order_by.push_back(std::move(key));
      } while (accept_symbol(","));
    }
    if (accept_keyword("LIMIT")) {
      const Token& t = peek();
      if (t.kind != TokenKind::Number || t.text.find('.') != std::string::npos) {
        fail({"integer"}, "LIMIT needs a non-negative integer");
      }
      std::int64_t value = 0;
      const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
        fail({"integer"}, "LIMIT value out of range");
      }
      next();
      stmt.limit = value;
    }
    return stmt;
  }

  SelectItem parse_select_item() {
    SelectItem item;
    if (accept_symbol("*")) {
      item.expr = make_star();
      return item;
    }
    if (peek().kind == TokenKind::Ident && is_symbol(".", 1) && is_symbol("*", 2)) {
      item.expr = make_star(next().text);
      next();
      next();
      return item;
    }
    item.expr = parse_expr();
    if (accept_keyword("AS")) {
      item.as_keyword = true;
      item.alias = expect_ident("alias");
    } else if (peek().kind == TokenKind::Ident) {
      item.alias = next().text;
    }
    return item;
  }

  TableRef parse_table_ref() {
    TableRef ref;
    ref.name = expect_ident("table name");
    if (accept_keyword("AS")) {
      ref.as_keyword = true;
      ref.alias = expect_ident("alias");
    } else if (peek().kind == TokenKind::Ident) {
      ref.alias = next().text;
    }
    return ref;
  }

  std::optional<Join> parse_join() {
    Join join;
    if (accept_keyword("INNER")) {
      join.kind = JoinKind::Inner;
      join.explicit_inner = true;
    } else if (accept_keyword("LEFT")) {
      join.kind = JoinKind::Left;
      join.explicit_outer = accept_keyword("OUTER");
    } else if (accept_keyword("RIGHT")) {
      join.kind = JoinKind::Right;
      join.explicit_outer = accept_keyword("OUTER");
    } else if (accept_keyword("FULL")) {
      join.kind = JoinKind::Full;
      join.explicit_outer = accept_keyword("OUTER");
    } else if (accept_keyword("CROSS")) {
      join.kind = JoinKind::Cross;
    } else if (!is_keyword("JOIN")) {
      return std::nullopt;
    }
    expect_keyword("JOIN");
    join.table = parse_table_ref();
    if (join.kind != JoinKind::Cross) {
      if (!accept_keyword("ON")) fail({"ON"}, "JOIN needs an ON condition");
      join.on = parse_expr();
    }
    return join;
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    DepthGuard guard(*this);
    Expr first = parse_and();
    if (!is_keyword("OR")) return first;
    Expr node;
    node.kind = ExprKind::Or;
    node.args.push_back(std::move(first));
    while (accept_keyword("OR")) node.args.push_back(parse_and());
    return node;
  }

  Expr parse_and() {
    Expr first = parse_not();
    if (!is_keyword("AND")) return first;
    Expr node;
    node.kind = ExprKind::And;
    node.args.push_back(std::move(first));
    while (accept_keyword("AND")) node.args.push_back(parse_not());
    return node;
  }

  Expr parse_not() {
    DepthGuard guard(*this);
    if (accept_keyword("NOT")) {
      Expr node;
      node.kind = ExprKind::Not;
      node.args.push_back(parse_not());
      return node;
    }
    return parse_predicate();
  }

  Expr parse_predicate() {
    Expr lhs = parse_additive();
    const Token& t = peek();
    if (t.kind == TokenKind::Symbol &&
        (t.text == "=" || t.text == "<" || t.text == ">" || t.text == "<=" || t.text == ">=" ||
         t.text == "<>" || t.text == "!=")) {
      const std::string op = next().text;
      return make_binary(ExprKind::Compare, op, std::move(lhs), parse_additive());
    }
    if (accept_keyword("IS")) {
      Expr node;
      node.kind = ExprKind::IsNull;
      node.negated = accept_keyword("NOT");
      expect_keyword("NULL");
      node.args.push_back(std::move(lhs));
      return node;
    }
    const bool negated = is_keyword("NOT") &&
                         (is_keyword("LIKE", 1) || is_keyword("IN", 1) || is_keyword("BETWEEN", 1));
    if (negated) next();
    if (accept_keyword("LIKE")) {
      Expr node = make_binary(ExprKind::Like, "LIKE", std::move(lhs), parse_additive());
      node.negated = negated;
      return node;
    }
    if (accept_keyword("BETWEEN")) {
      Expr node;
      node.kind = ExprKind::Between;
      node.negated = negated;
      node.args.push_back(std::move(lhs));
      node.args.push_back(parse_additive());
      expect_keyword("AND");
      node.args.push_back(parse_additive());
      return node;
    }
    if (accept_keyword("IN")) {
      expect_symbol("(");
      Expr node;
      node.negated = negated;
      node.args.push_back(std::move(lhs));
      if (is_keyword("SELECT")) {
        node.kind = ExprKind::InSubquery;
        node.subquery.push_back(parse_select());
      } else {
        node.kind = ExprKind::InList;
        do {
          node.args.push_back(parse_additive());
        } while (accept_symbol(","));
      }
      expect_symbol(")");
      return node;
    }
    return lhs;
  }

  Expr parse_additive() {
    DepthGuard guard(*this);
    Expr lhs = parse_multiplicative();
    while (is_symbol("+") || is_symbol("-")) {
      const std::string op = next().text;
      lhs = make_binary(ExprKind::Arith, op, std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  Expr parse_multiplicative() {
    Expr lhs = parse_unary();
    while (is_symbol("*") || is_symbol("/") || is_symbol("%")) {
      const std::string op = next().text;
      lhs = make_binary(ExprKind::Arith, op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    DepthGuard guard(*this);
    if (is_symbol("-")) {
      next();
      if (peek().kind == TokenKind::Number) return make_number("-" + next().text);
      Expr node;
      node.kind = ExprKind::Negate;
      node.args.push_back(parse_unary());
      return node;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
        return make_number(next().text);
      case TokenKind::String: {
        const Token s = next();
        return make_string(s.text, s.quote);
      }
      case TokenKind::Keyword:
        if (t.text == "NULL") {
          next();
          Expr e;
          e.kind = ExprKind::Null;
          return e;
        }
        break;
      case TokenKind::Symbol:
        if (t.text == "(") {
          next();
          if (is_keyword("SELECT")) fail({"expression"}, "scalar subqueries are not supported");
          Expr node;
          node.kind = ExprKind::Paren;
          node.args.push_back(parse_expr());
          expect_symbol(")");
          return node;
        }
        break;
      case TokenKind::Ident: {
        if (is_symbol("(", 1)) {
          if (!is_aggregate_name(t.text)) {
            fail({"COUNT", "SUM", "AVG", "MIN", "MAX"}, "unsupported function " + t.text);
          }
          Expr node;
          node.kind = ExprKind::Aggregate;
          node.text = next().text;
          next();  // (
          node.distinct = accept_keyword("DISTINCT");
          if (accept_symbol("*")) {
            node.args.push_back(make_star());
          } else {
            node.args.push_back(parse_expr());
          }
          expect_symbol(")");
          return node;
        }
        std::string first = next().text;
        if (accept_symbol(".")) {
          std::string column = expect_ident("column name");
          return make_column(std::move(column), std::move(first));
        }
        return make_column(std::move(first));
      }
      case TokenKind::End:
        break;
    }
    fail({"number", "string", "identifier", "'('", "NULL"}, "unexpected " + describe(t));
  }

  TableSchema parse_create_table() {
    if (!(peek().kind == TokenKind::Ident && text::to_upper(peek().text) == "CREATE")) {
      fail({"CREATE"}, "unexpected " + describe(peek()));
    }
    next();
    if (!(peek().kind == TokenKind::Ident && text::to_upper(peek().text) == "TABLE")) {
      fail({"TABLE"}, "unexpected " + describe(peek()));
    }
    next();
    TableSchema table;
    table.name = expect_ident("table name");
    expect_symbol("(");
    do {
      ColumnDef col;
      col.name = expect_ident("column name");
      col.type = expect_ident("column type");
      if (accept_symbol("(")) {
        std::string params;
        do {
          if (peek().kind != TokenKind::Number) fail({"number"}, "bad type parameter");
          if (!params.empty()) params += ",";
          params += next().text;
        } while (accept_symbol(","));
        expect_symbol(")");
        col.type += "(" + params + ")";
      }
      table.columns.push_back(std::move(col));
    } while (accept_symbol(","));
    expect_symbol(")");
    return table;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

SqlAst parse_sql(std::string_view input) { return Parser(input).parse_statement(); }

std::vector<TableSchema> parse_create_tables(std::string_view input) {
  return Parser(input).parse_ddl();
}

}  // namespace copilot::sql
