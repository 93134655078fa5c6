#pragma once

// Coefficient expressions over the exponential coordinates: a small
// recursive-descent parser, complex evaluation, exact symbolic partial
// derivatives and interval range bounds.
//
// Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := number | ident | func '(' expr ')' | '(' expr ')' | '-' factor
//   func   := sin | cos | exp | tanh
// Identifiers are the coordinate names, the imaginary unit `i` and `pi`.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"

namespace hypo {

/// Closed real interval; endpoints may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double x) { return {x, x}; }
  static Interval whole() { return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool is_zero() const { return lo == 0.0 && hi == 0.0; }
  double magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

  friend Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
  friend Interval operator-(Interval a, Interval b) { return a + (-b); }
  friend Interval operator*(Interval a, Interval b) {
    // 0 * inf is taken as 0: the zero factor is exact.
    auto m = [](double x, double y) { return (x == 0.0 || y == 0.0) ? 0.0 : x * y; };
    const double p[] = {m(a.lo, b.lo), m(a.lo, b.hi), m(a.hi, b.lo), m(a.hi, b.hi)};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
  }
};

/// Rectangle re x im in the complex plane.
struct ComplexInterval {
  Interval re;
  Interval im;

  static ComplexInterval whole() { return {Interval::whole(), Interval::whole()}; }
  bool bounded() const { return re.bounded() && im.bounded(); }
  /// Upper bound on |z| over the rectangle.
  double magnitude() const { return std::hypot(re.magnitude(), im.magnitude()); }
};

namespace expr_detail {

enum class Op { Const, Var, Add, Mul, Div, Neg, Sin, Cos, Exp, Tanh };

struct Node;
using Ptr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  cplx value{};  // Const
  int var = -1;  // Var
  Ptr a, b;
};

inline Ptr make_const(cplx v) { return std::make_shared<const Node>(Node{Op::Const, v, -1, nullptr, nullptr}); }
inline Ptr make_var(int k) { return std::make_shared<const Node>(Node{Op::Var, {}, k, nullptr, nullptr}); }

inline bool is_const(const Ptr& p) { return p->op == Op::Const; }
inline bool is_const(const Ptr& p, double v) { return p->op == Op::Const && p->value == cplx(v); }

inline cplx apply_func(Op op, cplx x) {
  switch (op) {
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Exp: return std::exp(x);
    case Op::Tanh: return std::tanh(x);
    default: return x;
  }
}

inline Ptr neg(const Ptr& a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->op == Op::Neg) return a->a;
  return std::make_shared<const Node>(Node{Op::Neg, {}, -1, a, nullptr});
}

inline Ptr add(const Ptr& a, const Ptr& b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return std::make_shared<const Node>(Node{Op::Add, {}, -1, a, b});
}

inline Ptr sub(const Ptr& a, const Ptr& b) { return add(a, neg(b)); }

inline Ptr mul(const Ptr& a, const Ptr& b) {
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return neg(b);
  if (is_const(b, -1.0)) return neg(a);
  if (a->op == Op::Neg && b->op == Op::Neg) return mul(a->a, b->a);
  if (a->op == Op::Neg) return neg(mul(a->a, b));
  if (b->op == Op::Neg) return neg(mul(a, b->a));
  // Keep constants on the left so that c1*(c2*x) folds.
  if (is_const(b)) return mul(b, a);
  if (is_const(a) && b->op == Op::Mul && is_const(b->a)) return mul(make_const(a->value * b->a->value), b->b);
  return std::make_shared<const Node>(Node{Op::Mul, {}, -1, a, b});
}

inline Ptr div(const Ptr& a, const Ptr& b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a) && is_const(b) && b->value != cplx(0.0)) return make_const(a->value / b->value);
  return std::make_shared<const Node>(Node{Op::Div, {}, -1, a, b});
}

inline Ptr func(Op op, const Ptr& a) {
  if (is_const(a)) return make_const(apply_func(op, a->value));
  return std::make_shared<const Node>(Node{op, {}, -1, a, nullptr});
}

inline cplx eval(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x[n.var];
    case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: {
      const cplx den = eval(*n.b, x);
      if (den == cplx(0.0)) throw DomainError("division by zero in coefficient expression");
      return eval(*n.a, x) / den;
    }
    case Op::Neg: return -eval(*n.a, x);
    default: return apply_func(n.op, eval(*n.a, x));
  }
}

inline Ptr derivative(const Ptr& p, int k) {
  const Node& n = *p;
  switch (n.op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n.var == k ? 1.0 : 0.0);
    case Op::Add: return add(derivative(n.a, k), derivative(n.b, k));
    case Op::Mul: return add(mul(derivative(n.a, k), n.b), mul(n.a, derivative(n.b, k)));
    case Op::Div: {
      auto da = derivative(n.a, k), db = derivative(n.b, k);
      if (is_const(db, 0.0)) return div(da, n.b);
      return div(sub(mul(da, n.b), mul(n.a, db)), mul(n.b, n.b));
    }
    case Op::Neg: return neg(derivative(n.a, k));
    case Op::Sin: return mul(func(Op::Cos, n.a), derivative(n.a, k));
    case Op::Cos: return neg(mul(func(Op::Sin, n.a), derivative(n.a, k)));
    case Op::Exp: return mul(p, derivative(n.a, k));
    case Op::Tanh: return mul(sub(make_const(1.0), mul(p, p)), derivative(n.a, k));
  }
  return make_const(0.0);
}

// Coordinates are real and every function has real Taylor coefficients, so
// conjugation only touches constants.
inline Ptr conj(const Ptr& p) {
  const Node& n = *p;
  switch (n.op) {
    case Op::Const: return make_const(std::conj(n.value));
    case Op::Var: return p;
    case Op::Add: return add(conj(n.a), conj(n.b));
    case Op::Mul: return mul(conj(n.a), conj(n.b));
    case Op::Div: return div(conj(n.a), conj(n.b));
    case Op::Neg: return neg(conj(n.a));
    default: return func(n.op, conj(n.a));
  }
}

inline bool has_var(const Node& n) {
  if (n.op == Op::Var) return true;
  return (n.a && has_var(*n.a)) || (n.b && has_var(*n.b));
}

inline bool has_imaginary(const Node& n) {
  if (n.op == Op::Const) return n.value.imag() != 0.0;
  return (n.a && has_imaginary(*n.a)) || (n.b && has_imaginary(*n.b));
}

inline std::size_t node_count(const Node& n) {
  return 1 + (n.a ? node_count(*n.a) : 0) + (n.b ? node_count(*n.b) : 0);
}

using PolyMap = std::map<std::vector<int>, cplx>;

// Exact expansion when the tree only uses constants, variables, +, -, *, and
// division by a nonzero constant.
inline std::optional<PolyMap> expand(const Node& n, std::size_t d) {
  auto prune = [](PolyMap m) {
    for (auto it = m.begin(); it != m.end();) it = it->second == cplx(0.0) ? m.erase(it) : std::next(it);
    return m;
  };
  switch (n.op) {
    case Op::Const: {
      PolyMap m;
      if (n.value != cplx(0.0)) m[std::vector<int>(d, 0)] = n.value;
      return m;
    }
    case Op::Var: {
      std::vector<int> e(d, 0);
      e[n.var] = 1;
      return PolyMap{{e, 1.0}};
    }
    case Op::Neg: {
      auto a = expand(*n.a, d);
      if (!a) return std::nullopt;
      for (auto& [e, c] : *a) c = -c;
      return a;
    }
    case Op::Add: {
      auto a = expand(*n.a, d), b = expand(*n.b, d);
      if (!a || !b) return std::nullopt;
      for (const auto& [e, c] : *b) (*a)[e] += c;
      return prune(std::move(*a));
    }
    case Op::Mul: {
      auto a = expand(*n.a, d), b = expand(*n.b, d);
      if (!a || !b) return std::nullopt;
      PolyMap out;
      for (const auto& [ea, ca] : *a)
        for (const auto& [eb, cb] : *b) {
          auto e = ea;
          for (std::size_t i = 0; i < d; ++i) e[i] += eb[i];
          out[e] += ca * cb;
        }
      return prune(std::move(out));
    }
    case Op::Div: {
      if (n.b->op != Op::Const || n.b->value == cplx(0.0)) return std::nullopt;
      auto a = expand(*n.a, d);
      if (!a) return std::nullopt;
      for (auto& [e, c] : *a) c /= n.b->value;
      return a;
    }
    default: return std::nullopt;
  }
}

// sin over [lo, hi]: extrema are attained at endpoints or at pi/2 + k pi.
inline Interval sin_range(Interval x) {
  if (!x.bounded() || x.hi - x.lo >= 2 * std::numbers::pi) return {-1.0, 1.0};
  double lo = std::min(std::sin(x.lo), std::sin(x.hi));
  double hi = std::max(std::sin(x.lo), std::sin(x.hi));
  const double kmin = std::ceil((x.lo - std::numbers::pi / 2) / std::numbers::pi);
  for (double k = kmin; std::numbers::pi / 2 + k * std::numbers::pi <= x.hi; k += 1.0) {
    const double v = std::sin(std::numbers::pi / 2 + k * std::numbers::pi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

inline ComplexInterval range(const Node& n, std::span<const Interval> box) {
  const Interval zero = Interval::point(0.0);
  switch (n.op) {
    case Op::Const: return {Interval::point(n.value.real()), Interval::point(n.value.imag())};
    case Op::Var: return {box[n.var], zero};
    case Op::Add: {
      auto a = range(*n.a, box), b = range(*n.b, box);
      return {a.re + b.re, a.im + b.im};
    }
    case Op::Neg: {
      auto a = range(*n.a, box);
      return {-a.re, -a.im};
    }
    case Op::Mul: {
      auto a = range(*n.a, box), b = range(*n.b, box);
      return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    case Op::Div: {
      auto a = range(*n.a, box), b = range(*n.b, box);
      if (!b.im.is_zero() || b.re.contains(0.0)) return ComplexInterval::whole();
      const Interval inv = b.re.lo > 0 || b.re.hi < 0 ? Interval{1.0 / b.re.hi, 1.0 / b.re.lo} : Interval::whole();
      return {a.re * inv, a.im * inv};
    }
    default: {
      auto a = range(*n.a, box);
      if (!a.im.is_zero()) return ComplexInterval::whole();
      const Interval x = a.re;
      switch (n.op) {
        case Op::Sin: return {sin_range(x), zero};
        case Op::Cos: return {sin_range({x.lo + std::numbers::pi / 2, x.hi + std::numbers::pi / 2}), zero};
        case Op::Exp: return {{std::exp(x.lo), std::exp(x.hi)}, zero};
        case Op::Tanh: return {{std::tanh(x.lo), std::tanh(x.hi)}, zero};
        default: return ComplexInterval::whole();
      }
    }
  }
}

inline std::string format_number(cplx v) {
  char buf[80];
  if (v.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", v.real());
    std::string s = buf;
    return v.real() < 0 ? "(" + s + ")" : s;
  }
  if (v.real() == 0.0) {
    std::snprintf(buf, sizeof buf, "(%.17g*i)", v.imag());
    return buf;
  }
  std::snprintf(buf, sizeof buf, "(%.17g+%.17g*i)", v.real(), v.imag());
  return buf;
}

inline std::string to_string(const Node& n, const std::vector<std::string>& names) {
  switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: return names[n.var];
    case Op::Add:
      if (n.b->op == Op::Neg) return "(" + to_string(*n.a, names) + " - " + to_string(*n.b->a, names) + ")";
      return "(" + to_string(*n.a, names) + " + " + to_string(*n.b, names) + ")";
    case Op::Mul: return to_string(*n.a, names) + "*" + to_string(*n.b, names);
    case Op::Div: return to_string(*n.a, names) + "/(" + to_string(*n.b, names) + ")";
    case Op::Neg: return "(-" + to_string(*n.a, names) + ")";
    case Op::Sin: return "sin(" + to_string(*n.a, names) + ")";
    case Op::Cos: return "cos(" + to_string(*n.a, names) + ")";
    case Op::Exp: return "exp(" + to_string(*n.a, names) + ")";
    case Op::Tanh: return "tanh(" + to_string(*n.a, names) + ")";
  }
  return "?";
}

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& names) : src_(src), names_(names) {}

  Ptr parse() {
    auto e = expr();
    skip();
    if (pos_ != src_.size()) throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Ptr expr() {
    auto left = term();
    while (true) {
      if (accept('+')) left = add(left, term());
      else if (accept('-')) left = sub(left, term());
      else return left;
    }
  }

  Ptr term() {
    auto left = factor();
    while (true) {
      if (accept('*')) left = mul(left, factor());
      else if (accept('/')) left = div(left, factor());
      else return left;
    }
  }

  Ptr factor() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return neg(factor());
    }
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string id = src_.substr(start, pos_ - start);
      for (std::size_t k = 0; k < names_.size(); ++k)
        if (names_[k] == id) return make_var(static_cast<int>(k));
      static const std::pair<const char*, Op> funcs[] = {
          {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"tanh", Op::Tanh}};
      for (const auto& [name, op] : funcs)
        if (id == name) {
          expect('(');
          auto arg = expr();
          expect(')');
          return func(op, arg);
        }
      if (id == "i") return make_const(cplx(0.0, 1.0));
      if (id == "pi") return make_const(std::numbers::pi);
      throw ParseError("unknown identifier '" + id + "'", start);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  const std::string& src_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace expr_detail

/// Coordinate names used in coefficient expressions: the lowercased basis
/// labels (x, y, t on the Heisenberg algebra).
inline std::vector<std::string> coordinate_names(const GradedLieAlgebra& alg) {
  std::vector<std::string> out;
  for (const auto& l : alg.labels()) {
    std::string s = l;
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out.push_back(s);
  }
  return out;
}

/// Immutable complex-valued expression in the coordinates x_0..x_{d-1}.
class CoeffExpr {
 public:
  CoeffExpr() : CoeffExpr(expr_detail::make_const(0.0), {}) {}
  CoeffExpr(expr_detail::Ptr root, std::vector<std::string> names) : root_(std::move(root)), names_(std::move(names)) {}

  static CoeffExpr constant(cplx c, std::vector<std::string> names) {
    return CoeffExpr(expr_detail::make_const(c), std::move(names));
  }
  static CoeffExpr variable(int k, std::vector<std::string> names) {
    return CoeffExpr(expr_detail::make_var(k), std::move(names));
  }

  cplx operator()(std::span<const double> x) const { return expr_detail::eval(*root_, x); }
  cplx eval(std::span<const double> x) const { return (*this)(x); }

  /// Exact partial derivative with respect to coordinate k.
  CoeffExpr partial(int k) const { return {expr_detail::derivative(root_, k), names_}; }
  CoeffExpr conj() const { return {expr_detail::conj(root_), names_}; }

  bool is_constant() const { return !expr_detail::has_var(*root_); }
  bool is_zero() const { return expr_detail::is_const(root_, 0.0); }
  bool is_real() const { return !expr_detail::has_imaginary(*root_); }
  std::size_t node_count() const { return expr_detail::node_count(*root_); }
  /// Exact polynomial expansion, if the expression is a polynomial.
  std::optional<expr_detail::PolyMap> as_polynomial() const { return expr_detail::expand(*root_, names_.size()); }
  /// True when the expression is a polynomial of positive degree, hence
  /// unbounded on R^d.
  bool provably_unbounded() const {
    auto p = as_polynomial();
    if (!p) return false;
    for (const auto& [e, c] : *p)
      for (int k : e)
        if (k > 0) return true;
    return false;
  }

  /// Enclosure of the values over a coordinate box (entries may be infinite).
  ComplexInterval range(std::span<const Interval> box) const { return expr_detail::range(*root_, box); }
  /// Enclosure over all of R^d.
  ComplexInterval global_range() const {
    std::vector<Interval> box(names_.size(), Interval::whole());
    return range(box);
  }

  std::string to_string() const { return expr_detail::to_string(*root_, names_); }

  const expr_detail::Ptr& root() const { return root_; }
  const std::vector<std::string>& names() const { return names_; }

  friend CoeffExpr operator+(const CoeffExpr& a, const CoeffExpr& b) { return {expr_detail::add(a.root_, b.root_), a.names_}; }
  friend CoeffExpr operator-(const CoeffExpr& a, const CoeffExpr& b) { return {expr_detail::sub(a.root_, b.root_), a.names_}; }
  friend CoeffExpr operator*(const CoeffExpr& a, const CoeffExpr& b) { return {expr_detail::mul(a.root_, b.root_), a.names_}; }
  friend CoeffExpr operator/(const CoeffExpr& a, const CoeffExpr& b) { return {expr_detail::div(a.root_, b.root_), a.names_}; }
  CoeffExpr operator-() const { return {expr_detail::neg(root_), names_}; }

 private:
  expr_detail::Ptr root_;
  std::vector<std::string> names_;
};

inline CoeffExpr parse_expr(const std::string& src, std::vector<std::string> names) {
  expr_detail::Parser p(src, names);
  auto root = p.parse();
  return CoeffExpr(std::move(root), std::move(names));
}

/// Parses a coefficient over the coordinates of `alg`.
inline CoeffExpr parse_coeff(const std::string& src, const GradedLieAlgebra& alg) {
  return parse_expr(src, coordinate_names(alg));
}

}  // namespace hypo
