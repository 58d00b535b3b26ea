#include <algorithm>

#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

std::string canonical_decimal(std::string_view literal) {
  bool negative = false;
  if (!literal.empty() && (literal[0] == '-' || literal[0] == '+')) {
    negative = literal[0] == '-';
    literal.remove_prefix(1);
  }
  const auto dot = literal.find('.');
  std::string_view int_part = literal.substr(0, dot);
  std::string_view frac_part =
      dot == std::string_view::npos ? std::string_view() : literal.substr(dot + 1);
  while (!int_part.empty() && int_part.front() == '0') int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
  std::string out = int_part.empty() ? "0" : std::string(int_part);
  if (!frac_part.empty()) out += "." + std::string(frac_part);
  if (negative && out != "0") out = "-" + out;
  return out;
}

namespace {

std::string mirror(const std::string& op) {
  if (op == "<") return ">";
  if (op == ">") return "<";
  if (op == "<=") return ">=";
  if (op == ">=") return "<=";
  return op;
}

class Normalizer {
 public:
  explicit Normalizer(bool lenient) : lenient_(lenient) {}

  SqlAst stmt(const SqlAst& in) {
    SqlAst out = in;
    for (auto& item : out.items) {
      item.expr = expr(item.expr);
      item.alias = text::to_lower(item.alias);
      item.as_keyword = false;
    }
    table(out.from);
    for (auto& j : out.joins) {
      table(j.table);
      j.explicit_inner = false;
      j.explicit_outer = false;
      if (j.on) j.on = expr(*j.on);
    }
    if (out.where) out.where = expr(*out.where);
    for (auto& g : out.group_by) g = expr(g);
    if (out.having) out.having = expr(*out.having);
    for (auto& k : out.order_by) {
      k.expr = expr(k.expr);
      if (k.dir == SortDir::Unspecified) k.dir = SortDir::Asc;
    }
    return out;
  }

  Expr expr(const Expr& in) {
    Expr out = in;
    for (auto& a : out.args) a = expr(a);
    for (auto& q : out.subquery) q = stmt(q);

    switch (out.kind) {
      case ExprKind::Column:
      case ExprKind::Star:
        out.text = text::to_lower(out.text);
        out.qualifier = text::to_lower(out.qualifier);
        break;
      case ExprKind::Number:
        out.text = canonical_decimal(out.text);
        break;
      case ExprKind::String:
        out.quote = '\'';
        break;
      case ExprKind::Aggregate:
        out.text = text::to_lower(out.text);
        break;
      case ExprKind::Compare:
        if (out.op == "<>") out.op = "!=";
        if (lenient_) orient(out);
        break;
      case ExprKind::Like:
        out.op = "LIKE";
        break;
      case ExprKind::Paren: {
        Expr inner = std::move(out.args.front());
        if (is_atom(inner)) return inner;
        if (inner.kind == ExprKind::Paren) return inner;
        if (lenient_ && inner.kind == ExprKind::And) return inner;  // re-flattened by parent
        out.args.front() = std::move(inner);
        break;
      }
      case ExprKind::And:
        if (lenient_) sort_conjuncts(out);
        break;
      default:
        break;
    }
    return out;
  }

 private:
  static void table(TableRef& t) {
    t.name = text::to_lower(t.name);
    t.alias = text::to_lower(t.alias);
    t.as_keyword = false;
  }

  static void orient(Expr& cmp) {
    Expr& lhs = cmp.args[0];
    Expr& rhs = cmp.args[1];
    const bool lhs_lit = is_literal(lhs);
    const bool rhs_lit = is_literal(rhs);
    bool swap = false;
    if (lhs_lit != rhs_lit) {
      swap = lhs_lit;
    } else {
      swap = render_expr(rhs) < render_expr(lhs);
    }
    if (swap) {
      std::swap(lhs, rhs);
      cmp.op = mirror(cmp.op);
    }
  }

  static void sort_conjuncts(Expr& conj) {
    std::vector<Expr> flat;
    for (auto& a : conj.args) {
      if (a.kind == ExprKind::And) {
        for (auto& b : a.args) flat.push_back(std::move(b));
      } else {
        flat.push_back(std::move(a));
      }
    }
    std::vector<std::pair<std::string, Expr>> keyed;
    keyed.reserve(flat.size());
    for (auto& e : flat) keyed.emplace_back(render_expr(e), std::move(e));
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    conj.args.clear();
    for (auto& [_, e] : keyed) conj.args.push_back(std::move(e));
  }

  bool lenient_;
};

}  // namespace

SqlAst normalize_ast(const SqlAst& ast, bool lenient) { return Normalizer(lenient).stmt(ast); }

}  // namespace copilot::sql
