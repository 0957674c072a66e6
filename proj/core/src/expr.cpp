#include "mmcert/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

namespace mmcert::expr {

Eigen::VectorXd Point::joint() const {
  Eigen::VectorXd z(dim());
  z.head(n()) = x;
  z.tail(m()) = y;
  return z;
}

Point Point::from_joint(const Eigen::VectorXd& z, int n) {
  if (n < 0 || n > z.size()) throw DimensionError("from_joint: block size out of range");
  Point p;
  p.x = z.head(n);
  p.y = z.tail(z.size() - n);
  return p;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// construction

namespace {

Expr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

}  // namespace

Expr make_constant(double v) {
  if (!std::isfinite(v)) throw NonFiniteValue("constant literal is not finite");
  if (v == 0.0) v = 0.0;  // normalize -0.0
  ExprNode n;
  n.kind = NodeKind::Constant;
  n.value = v;
  return node(std::move(n));
}

Expr make_variable(Axis axis, int index) {
  if (index < 1) throw DimensionError("variable index must be >= 1");
  ExprNode n;
  n.kind = NodeKind::Variable;
  n.axis = axis;
  n.index = index;
  return node(std::move(n));
}

Expr make_neg(Expr a) {
  ExprNode n;
  n.kind = NodeKind::Neg;
  n.a = std::move(a);
  return node(std::move(n));
}

Expr make_add(Expr a, Expr b) {
  ExprNode n;
  n.kind = NodeKind::Add;
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

Expr make_sub(Expr a, Expr b) {
  ExprNode n;
  n.kind = NodeKind::Sub;
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

Expr make_mul(Expr a, Expr b) {
  ExprNode n;
  n.kind = NodeKind::Mul;
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

Expr make_pow(Expr base, int exponent) {
  if (exponent < 1) throw SyntaxError("power exponent must be a positive integer", 0);
  if (exponent > 4096) throw SyntaxError("power exponent too large (max 4096)", 0);
  ExprNode n;
  n.kind = NodeKind::Pow;
  n.exponent = exponent;
  n.a = std::move(base);
  return node(std::move(n));
}

Expr make_abs(Expr a) {
  ExprNode n;
  n.kind = NodeKind::Abs;
  n.a = std::move(a);
  return node(std::move(n));
}

// ---------------------------------------------------------------------------
// parser

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int n, m;

  explicit Parser(const std::string& t, int n, int m) : text(t), n(n), m(m) {}

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                 text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos); }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (consume('+')) {
        lhs = make_add(std::move(lhs), parse_product());
      } else if (consume('-')) {
        lhs = make_sub(std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    while (consume('*')) lhs = make_mul(std::move(lhs), parse_unary());
    return lhs;
  }

  Expr parse_unary() {
    if (consume('-')) return make_neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (consume('^')) {
      skip_ws();
      std::size_t at = pos;
      long long k = parse_plain_int();
      if (k < 1) throw SyntaxError("power exponent must be a positive integer", at);
      if (k > 4096) throw SyntaxError("power exponent too large (max 4096)", at);
      return make_pow(std::move(base), static_cast<int>(k));
    }
    return base;
  }

  long long parse_plain_int() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected an integer literal");
    // a trailing '.' or exponent means this was a real literal, not an integer
    if (pos < text.size() && (text[pos] == '.' || text[pos] == 'e' || text[pos] == 'E'))
      throw SyntaxError("power exponent must be a positive integer", start);
    long long v = 0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, v);
    if (res.ec != std::errc()) throw SyntaxError("integer literal out of range", start);
    return v;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos;
      Expr e = parse_sum();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    if (pos == start || (pos == start + 1 && text[start] == '.'))
      throw SyntaxError("malformed number", start);
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      } else {
        pos = mark;  // 'e' belongs to something else; not part of the literal
      }
    }
    double v = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, v);
    if (res.ec != std::errc() || res.ptr != text.data() + pos)
      throw SyntaxError("malformed number", start);
    return make_constant(v);
  }

  Expr parse_ident() {
    std::size_t start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    std::string name = text.substr(start, pos - start);
    if (name == "abs") {
      if (!consume('(')) fail("expected '(' after abs");
      Expr e = parse_sum();
      if (!consume(')')) fail("expected ')'");
      return make_abs(std::move(e));
    }
    if (name == "x" || name == "y") {
      std::size_t istart = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos == istart) throw SyntaxError("variable needs an index, e.g. x1", istart);
      long long idx = 0;
      std::from_chars(text.data() + istart, text.data() + pos, idx);
      if (idx < 1) throw SyntaxError("variable index must be >= 1", istart);
      Axis axis = name == "x" ? Axis::X : Axis::Y;
      int limit = axis == Axis::X ? n : m;
      if (idx > limit)
        throw DimensionError("variable " + name + std::to_string(idx) + " exceeds declared " +
                             (axis == Axis::X ? "n=" : "m=") + std::to_string(limit));
      return make_variable(axis, static_cast<int>(idx));
    }
    throw SyntaxError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

Expr parse_expression(const std::string& text, int n, int m) {
  if (n < 0 || m < 0) throw DimensionError("negative dimension");
  Parser p(text, n, m);
  Expr e = p.parse_sum();
  if (!p.at_end()) p.fail("trailing input after expression");
  return e;
}

// ---------------------------------------------------------------------------
// serializer

namespace {

// precedence: sum 1, product 2, unary minus 3, power 4, atom 5
int precedence(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    case NodeKind::Constant:
      return e->value < 0 ? 3 : 5;  // negative literal prints like a negation
    default:
      return 5;
  }
}

void emit(const Expr& e, int min_prec, std::string& out) {
  bool wrap = precedence(e) < min_prec;
  if (wrap) out += '(';
  switch (e->kind) {
    case NodeKind::Constant:
      out += format_double(e->value);
      break;
    case NodeKind::Variable:
      out += e->axis == Axis::X ? 'x' : 'y';
      out += std::to_string(e->index);
      break;
    case NodeKind::Neg:
      out += '-';
      emit(e->a, 3, out);
      break;
    case NodeKind::Add:
      emit(e->a, 1, out);
      out += " + ";
      emit(e->b, 2, out);
      break;
    case NodeKind::Sub:
      emit(e->a, 1, out);
      out += " - ";
      emit(e->b, 2, out);
      break;
    case NodeKind::Mul:
      emit(e->a, 2, out);
      out += '*';
      emit(e->b, 3, out);
      break;
    case NodeKind::Pow:
      emit(e->a, 5, out);
      out += '^';
      out += std::to_string(e->exponent);
      break;
    case NodeKind::Abs:
      out += "abs(";
      emit(e->a, 1, out);
      out += ')';
      break;
  }
  if (wrap) out += ')';
}

}  // namespace

std::string serialize(const Expr& e) {
  std::string out;
  emit(e, 1, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Constant:
      return a->value == b->value;
    case NodeKind::Variable:
      return a->axis == b->axis && a->index == b->index;
    case NodeKind::Neg:
    case NodeKind::Abs:
      return structurally_equal(a->a, b->a);
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
      return structurally_equal(a->a, b->a) && structurally_equal(a->b, b->b);
    case NodeKind::Pow:
      return a->exponent == b->exponent && structurally_equal(a->a, b->a);
  }
  return false;
}

void max_indices(const Expr& e, int& max_x, int& max_y) {
  if (!e) return;
  if (e->kind == NodeKind::Variable) {
    int& target = e->axis == Axis::X ? max_x : max_y;
    target = std::max(target, e->index);
  }
  if (e->a) max_indices(e->a, max_x, max_y);
  if (e->b) max_indices(e->b, max_x, max_y);
}

bool pure_block(const Expr& e, Axis axis) {
  if (!e) return true;
  if (e->kind == NodeKind::Variable && e->axis != axis) return false;
  return pure_block(e->a, axis) && (!e->b || pure_block(e->b, axis));
}

namespace {

// degree of the polynomial, or -1 when the subtree is not a polynomial
// (abs of a non-constant argument)
int poly_degree(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Constant:
      return 0;
    case NodeKind::Variable:
      return 1;
    case NodeKind::Neg:
      return poly_degree(e->a);
    case NodeKind::Add:
    case NodeKind::Sub: {
      int da = poly_degree(e->a), db = poly_degree(e->b);
      if (da < 0 || db < 0) return -1;
      return std::max(da, db);
    }
    case NodeKind::Mul: {
      int da = poly_degree(e->a), db = poly_degree(e->b);
      if (da < 0 || db < 0) return -1;
      return da + db;
    }
    case NodeKind::Pow: {
      int da = poly_degree(e->a);
      if (da < 0) return -1;
      return da * e->exponent;
    }
    case NodeKind::Abs: {
      int da = poly_degree(e->a);
      return da == 0 ? 0 : -1;
    }
  }
  return -1;
}

}  // namespace

bool is_affine(const Expr& e) {
  int d = poly_degree(e);
  return d >= 0 && d <= 1;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

double var_value(const ExprNode& n, const Point& p) {
  const Eigen::VectorXd& block = n.axis == Axis::X ? p.x : p.y;
  if (n.index > block.size())
    throw DimensionError("variable index " + std::to_string(n.index) +
                         " exceeds point block size " + std::to_string(block.size()));
  return block[n.index - 1];
}

// n-th power by repeated squaring; v^0 == 1 by convention
double int_pow(double v, int k) {
  double result = 1.0, base = v;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

double eval_rec(const Expr& e, const Point& p) {
  double v = 0.0;
  switch (e->kind) {
    case NodeKind::Constant: v = e->value; break;
    case NodeKind::Variable: v = var_value(*e, p); break;
    case NodeKind::Neg: v = -eval_rec(e->a, p); break;
    case NodeKind::Add: v = eval_rec(e->a, p) + eval_rec(e->b, p); break;
    case NodeKind::Sub: v = eval_rec(e->a, p) - eval_rec(e->b, p); break;
    case NodeKind::Mul: v = eval_rec(e->a, p) * eval_rec(e->b, p); break;
    case NodeKind::Pow: v = int_pow(eval_rec(e->a, p), e->exponent); break;
    case NodeKind::Abs: v = std::abs(eval_rec(e->a, p)); break;
  }
  if (!std::isfinite(v)) throw NonFiniteValue("evaluation produced a non-finite value");
  return v;
}

}  // namespace

double evaluate(const Expr& e, const Point& p) { return eval_rec(e, p); }

namespace {

void collect_kinks(const Expr& e, const Point& p, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == NodeKind::Abs && eval_rec(e->a, p) == 0.0) {
    std::string s = serialize(e);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  if (e->a) collect_kinks(e->a, p, out);
  if (e->b) collect_kinks(e->b, p, out);
}

}  // namespace

std::vector<std::string> active_kinks(const Expr& e, const Point& p) {
  std::vector<std::string> out;
  collect_kinks(e, p, out);
  return out;
}

bool is_smooth_at(const Expr& e, const Point& p) { return active_kinks(e, p).empty(); }

// ---------------------------------------------------------------------------
// forward-mode derivatives

namespace {

struct Jet1 {
  double v;
  Eigen::VectorXd g;
};

Jet1 jet1(const Expr& e, const Point& p, int dim, int n) {
  switch (e->kind) {
    case NodeKind::Constant:
      return {e->value, Eigen::VectorXd::Zero(dim)};
    case NodeKind::Variable: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
      int slot = e->axis == Axis::X ? e->index - 1 : n + e->index - 1;
      g[slot] = 1.0;
      return {var_value(*e, p), std::move(g)};
    }
    case NodeKind::Neg: {
      Jet1 a = jet1(e->a, p, dim, n);
      return {-a.v, -a.g};
    }
    case NodeKind::Add: {
      Jet1 a = jet1(e->a, p, dim, n), b = jet1(e->b, p, dim, n);
      return {a.v + b.v, a.g + b.g};
    }
    case NodeKind::Sub: {
      Jet1 a = jet1(e->a, p, dim, n), b = jet1(e->b, p, dim, n);
      return {a.v - b.v, a.g - b.g};
    }
    case NodeKind::Mul: {
      Jet1 a = jet1(e->a, p, dim, n), b = jet1(e->b, p, dim, n);
      return {a.v * b.v, a.v * b.g + b.v * a.g};
    }
    case NodeKind::Pow: {
      Jet1 a = jet1(e->a, p, dim, n);
      int k = e->exponent;
      return {int_pow(a.v, k), k * int_pow(a.v, k - 1) * a.g};
    }
    case NodeKind::Abs: {
      Jet1 a = jet1(e->a, p, dim, n);
      double s = a.v > 0 ? 1.0 : -1.0;  // a.v != 0 guaranteed by the kink scan
      return {std::abs(a.v), s * a.g};
    }
  }
  throw Error("unreachable");
}

struct Jet2 {
  double v;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
};

Jet2 jet2(const Expr& e, const Point& p, int dim, int n) {
  switch (e->kind) {
    case NodeKind::Constant:
      return {e->value, Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
    case NodeKind::Variable: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
      int slot = e->axis == Axis::X ? e->index - 1 : n + e->index - 1;
      g[slot] = 1.0;
      return {var_value(*e, p), std::move(g), Eigen::MatrixXd::Zero(dim, dim)};
    }
    case NodeKind::Neg: {
      Jet2 a = jet2(e->a, p, dim, n);
      return {-a.v, -a.g, -a.H};
    }
    case NodeKind::Add: {
      Jet2 a = jet2(e->a, p, dim, n), b = jet2(e->b, p, dim, n);
      return {a.v + b.v, a.g + b.g, a.H + b.H};
    }
    case NodeKind::Sub: {
      Jet2 a = jet2(e->a, p, dim, n), b = jet2(e->b, p, dim, n);
      return {a.v - b.v, a.g - b.g, a.H - b.H};
    }
    case NodeKind::Mul: {
      Jet2 a = jet2(e->a, p, dim, n), b = jet2(e->b, p, dim, n);
      Eigen::MatrixXd H = a.v * b.H + b.v * a.H + a.g * b.g.transpose() + b.g * a.g.transpose();
      return {a.v * b.v, a.v * b.g + b.v * a.g, std::move(H)};
    }
    case NodeKind::Pow: {
      Jet2 a = jet2(e->a, p, dim, n);
      int k = e->exponent;
      if (k == 1) return a;
      double vk1 = int_pow(a.v, k - 1), vk2 = int_pow(a.v, k - 2);
      Eigen::MatrixXd H =
          k * (k - 1) * vk2 * (a.g * a.g.transpose()) + k * vk1 * a.H;
      return {int_pow(a.v, k), k * vk1 * a.g, std::move(H)};
    }
    case NodeKind::Abs: {
      Jet2 a = jet2(e->a, p, dim, n);
      double s = a.v > 0 ? 1.0 : -1.0;
      return {std::abs(a.v), s * a.g, s * a.H};
    }
  }
  throw Error("unreachable");
}

void require_smooth(const Expr& e, const Point& p, const char* what) {
  auto kinks = active_kinks(e, p);
  if (!kinks.empty())
    throw NonsmoothAtPoint(std::string(what) + " undefined: abs argument vanishes at the point",
                           std::move(kinks));
}

}  // namespace

Eigen::VectorXd gradient(const Expr& e, const Point& p) {
  require_smooth(e, p, "gradient");
  Jet1 j = jet1(e, p, p.dim(), p.n());
  if (!std::isfinite(j.v) || !j.g.allFinite())
    throw NonFiniteValue("gradient produced a non-finite value");
  return j.g;
}

Eigen::MatrixXd hessian(const Expr& e, const Point& p) {
  require_smooth(e, p, "hessian");
  Jet2 j = jet2(e, p, p.dim(), p.n());
  if (!std::isfinite(j.v) || !j.g.allFinite() || !j.H.allFinite())
    throw NonFiniteValue("hessian produced a non-finite value");
  return j.H;
}

// ---------------------------------------------------------------------------
// exact one-sided expansion in t
//
// Substituting z -> p + t w turns every node into a univariate polynomial in
// t valid on an interval (0, eps): an abs node resolves to +/- its argument
// according to the sign of the argument's lowest-order nonzero coefficient
// (a polynomial has constant sign just right of 0). Coefficient zero tests
// are exact; inputs with exactly representable arithmetic stay exact.

namespace {

using TPoly = std::vector<double>;  // coefficient i multiplies t^i

void trim(TPoly& p) {
  while (!p.empty() && p.back() == 0.0) p.pop_back();
}

TPoly tp_add(const TPoly& a, const TPoly& b, double sb) {
  TPoly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
  trim(r);
  return r;
}

TPoly tp_mul(const TPoly& a, const TPoly& b) {
  if (a.empty() || b.empty()) return {};
  TPoly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim(r);
  return r;
}

TPoly tp_pow(const TPoly& a, int k) {
  TPoly result{1.0};
  TPoly base = a;
  while (k > 0) {
    if (k & 1) result = tp_mul(result, base);
    base = tp_mul(base, base);
    k >>= 1;
  }
  return result;
}

void tp_check_finite(const TPoly& p) {
  for (double c : p)
    if (!std::isfinite(c)) throw NonFiniteValue("expansion produced a non-finite coefficient");
}

TPoly expand(const Expr& e, const Point& p, const Eigen::VectorXd& w, int n) {
  TPoly r;
  switch (e->kind) {
    case NodeKind::Constant:
      r = e->value == 0.0 ? TPoly{} : TPoly{e->value};
      break;
    case NodeKind::Variable: {
      int slot = e->axis == Axis::X ? e->index - 1 : n + e->index - 1;
      r = {var_value(*e, p), w[slot]};
      trim(r);
      break;
    }
    case NodeKind::Neg: {
      r = expand(e->a, p, w, n);
      for (double& c : r) c = -c;
      break;
    }
    case NodeKind::Add:
      r = tp_add(expand(e->a, p, w, n), expand(e->b, p, w, n), 1.0);
      break;
    case NodeKind::Sub:
      r = tp_add(expand(e->a, p, w, n), expand(e->b, p, w, n), -1.0);
      break;
    case NodeKind::Mul:
      r = tp_mul(expand(e->a, p, w, n), expand(e->b, p, w, n));
      break;
    case NodeKind::Pow:
      r = tp_pow(expand(e->a, p, w, n), e->exponent);
      break;
    case NodeKind::Abs: {
      r = expand(e->a, p, w, n);
      double sign = 0.0;
      for (double c : r) {
        if (c != 0.0) {
          sign = c > 0 ? 1.0 : -1.0;
          break;
        }
      }
      if (sign < 0)
        for (double& c : r) c = -c;
      break;
    }
  }
  tp_check_finite(r);
  return r;
}

double coeff(const TPoly& p, std::size_t i) { return i < p.size() ? p[i] : 0.0; }

void check_direction(const Point& p, const Eigen::VectorXd& w) {
  if (w.size() != p.dim())
    throw DimensionError("direction size " + std::to_string(w.size()) +
                         " does not match point dimension " + std::to_string(p.dim()));
}

Eigen::VectorXd pad_x(const Eigen::VectorXd& u, int m) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size() + m);
  w.head(u.size()) = u;
  return w;
}

Eigen::VectorXd pad_y(const Eigen::VectorXd& h, int n) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + h.size());
  w.tail(h.size()) = h;
  return w;
}

}  // namespace

DerivativeResult subderivative(const Expr& e, const Point& p, const Eigen::VectorXd& w) {
  check_direction(p, w);
  TPoly phi = expand(e, p, w, p.n());
  return {coeff(phi, 1), Exactness::Analytic, 0.0};
}

DerivativeResult second_subderivative(const Expr& e, const Point& p, const Eigen::VectorXd& w) {
  check_direction(p, w);
  TPoly phi = expand(e, p, w, p.n());
  return {2.0 * coeff(phi, 2), Exactness::Analytic, 0.0};
}

DerivativeResult subderivative_x(const Expr& e, const Point& p, const Eigen::VectorXd& u) {
  if (u.size() != p.n()) throw DimensionError("x-direction size mismatch");
  return subderivative(e, p, pad_x(u, p.m()));
}

DerivativeResult subderivative_y(const Expr& e, const Point& p, const Eigen::VectorXd& h) {
  if (h.size() != p.m()) throw DimensionError("y-direction size mismatch");
  return subderivative(e, p, pad_y(h, p.n()));
}

DerivativeResult second_subderivative_x(const Expr& e, const Point& p, const Eigen::VectorXd& u) {
  if (u.size() != p.n()) throw DimensionError("x-direction size mismatch");
  return second_subderivative(e, p, pad_x(u, p.m()));
}

DerivativeResult second_subderivative_y(const Expr& e, const Point& p, const Eigen::VectorXd& h) {
  if (h.size() != p.m()) throw DimensionError("y-direction size mismatch");
  return second_subderivative(e, p, pad_y(h, p.n()));
}

double separation_defect(const Expr& e, const Point& p, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& h) {
  Eigen::VectorXd w(p.dim());
  w.head(p.n()) = u;
  w.tail(p.m()) = h;
  double joint = subderivative(e, p, w).value;
  double dx = subderivative_x(e, p, u).value;
  double dy = subderivative_y(e, p, h).value;
  return std::abs(joint - dx - dy);
}

// ---------------------------------------------------------------------------
// numeric fallback (Richardson extrapolation on the one-sided difference)

namespace {

Point shifted(const Point& p, const Eigen::VectorXd& w, double t) {
  Point q;
  q.x = p.x + t * w.head(p.n());
  q.y = p.y + t * w.tail(p.m());
  return q;
}

// Richardson table for a quantity with expansion L + a1 t + a2 t^2 + ...
// sampled at t0, t0/2, t0/4, ... Returns the deepest diagonal entry.
double richardson(const std::vector<double>& samples, double& err) {
  std::size_t k = samples.size();
  std::vector<std::vector<double>> table(k);
  table[0] = samples;
  for (std::size_t j = 1; j < k; ++j) {
    double factor = std::pow(2.0, static_cast<double>(j));
    table[j].resize(k - j);
    for (std::size_t i = 0; i + j < k; ++i)
      table[j][i] = (factor * table[j - 1][i + 1] - table[j - 1][i]) / (factor - 1.0);
  }
  double best = table[k - 1][0];
  double prev = table[k - 2][1];  // one column earlier, same smallest steps
  err = std::abs(best - prev);
  return best;
}

}  // namespace

DerivativeResult subderivative_numeric(const Expr& e, const Point& p,
                                       const Eigen::VectorXd& w, double t0) {
  check_direction(p, w);
  double f0 = evaluate(e, p);
  std::vector<double> d;
  double t = t0;
  for (int k = 0; k < 7; ++k, t /= 2) d.push_back((evaluate(e, shifted(p, w, t)) - f0) / t);
  double err = 0.0;
  double v = richardson(d, err);
  // Cancellation noise in (phi(t) - f0) is ~eps*|phi| regardless of t, so the
  // quotient carries a floor of eps*scale/t at the smallest step.
  double t_min = t0 / 64.0;
  double eps = std::numeric_limits<double>::epsilon();
  double floor = 16 * eps * (1 + std::abs(f0)) / t_min;
  return {v, Exactness::Numeric, err + floor};
}

DerivativeResult second_subderivative_numeric(const Expr& e, const Point& p,
                                              const Eigen::VectorXd& w, double t0) {
  check_direction(p, w);
  double f0 = evaluate(e, p);
  DerivativeResult d1 = subderivative_numeric(e, p, w, t0);
  std::vector<double> d;
  double t = t0;
  for (int k = 0; k < 7; ++k, t /= 2)
    d.push_back(2.0 * (evaluate(e, shifted(p, w, t)) - f0 - d1.value * t) / (t * t));
  double err = 0.0;
  double v = richardson(d, err);
  // Two noise sources survive extrapolation: cancellation in the numerator
  // (~eps*scale, divided by t^2) and the first-derivative error (divided by t),
  // both worst at the smallest step.
  double t_min = t0 / 64.0;
  double eps = std::numeric_limits<double>::epsilon();
  double floor = 16 * eps * (1 + std::abs(f0)) / (t_min * t_min);
  return {v, Exactness::Numeric, err + 2 * d1.error_bound / t_min + floor};
}

}  // namespace mmcert::expr
