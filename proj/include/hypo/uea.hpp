#pragma once

// Universal enveloping algebra U(g) in PBW normal form.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"

namespace hypo {

/// Exponent vector (k_1..k_d) of the PBW monomial e_1^{k_1} ... e_d^{k_d}.
using Exponents = std::vector<int>;

/// Coefficients smaller than this are dropped after every operation.
inline constexpr double kPruneTolerance = 1e-14;

/// A word over basis letters (0-based basis indices), read left to right as
/// the product e_{w_0} e_{w_1} ... .
struct Word {
  std::vector<int> letters;

  bool empty() const { return letters.empty(); }
  std::size_t size() const { return letters.size(); }

  /// sum of the degrees of the letters.
  int weighted_length(const GradedLieAlgebra& alg) const {
    int s = 0;
    for (int l : letters) s += alg.degree(l);
    return s;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

/// Parses a word such as "XY", "X1 X2 X1" or "YXT" by greedy longest match
/// against the basis labels (whitespace is ignored between letters).
inline Word parse_word(const GradedLieAlgebra& alg, const std::string& text) {
  Word w;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ' || text[pos] == '*' || text[pos] == '.') {
      ++pos;
      continue;
    }
    int best = -1;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < alg.dim(); ++i) {
      const auto& l = alg.label(i);
      if (l.size() > best_len && text.compare(pos, l.size(), l) == 0) {
        best = static_cast<int>(i);
        best_len = l.size();
      }
    }
    if (best < 0) throw ParseError("unknown letter in word '" + text + "'", pos);
    w.letters.push_back(best);
    pos += best_len;
  }
  return w;
}

inline std::string to_string(const GradedLieAlgebra& alg, const Word& w) {
  std::string s;
  for (int l : w.letters) {
    if (!s.empty() && alg.label(l).size() > 1) s += ' ';
    s += alg.label(l);
  }
  return s;
}

class UEAElement;
UEAElement normal_order(const AlgebraHandle& alg, const Word& word);

/// Sparse element of U(g): map from PBW exponent vector to complex
/// coefficient. Always kept in normal form and pruned.
class UEAElement {
 public:
  using Terms = std::map<Exponents, cplx>;

  UEAElement() = default;
  explicit UEAElement(AlgebraHandle alg) : alg_(std::move(alg)) {}
  UEAElement(AlgebraHandle alg, Terms terms) : alg_(std::move(alg)), terms_(std::move(terms)) { prune(); }

  static UEAElement zero(const AlgebraHandle& alg) { return UEAElement(alg); }
  static UEAElement scalar(const AlgebraHandle& alg, cplx c) {
    return UEAElement(alg, Terms{{Exponents(alg->dim(), 0), c}});
  }
  static UEAElement one(const AlgebraHandle& alg) { return scalar(alg, 1.0); }
  /// The basis vector e_i.
  static UEAElement basis(const AlgebraHandle& alg, std::size_t i, cplx c = 1.0) {
    Exponents e(alg->dim(), 0);
    e.at(i) = 1;
    return UEAElement(alg, Terms{{e, c}});
  }
  static UEAElement monomial(const AlgebraHandle& alg, Exponents e, cplx c = 1.0) {
    return UEAElement(alg, Terms{{std::move(e), c}});
  }

  const AlgebraHandle& algebra() const { return alg_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  cplx coeff(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? cplx{} : it->second;
  }

  /// Weighted degree of a monomial: sum_i k_i deg(e_i).
  int monomial_degree(const Exponents& e) const {
    int s = 0;
    for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * alg_->degree(i);
    return s;
  }

  /// Maximum weighted degree over the terms; -1 for the zero element.
  int degree() const {
    int m = -1;
    for (const auto& [e, c] : terms_) m = std::max(m, monomial_degree(e));
    return m;
  }

  /// Membership in U_m: every term has weighted degree <= m.
  bool in_U(int m) const { return degree() <= m; }

  UEAElement& operator+=(const UEAElement& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) terms_[e] += c;
    prune();
    return *this;
  }
  UEAElement& operator-=(const UEAElement& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) terms_[e] -= c;
    prune();
    return *this;
  }
  UEAElement& operator*=(cplx s) {
    for (auto& [e, c] : terms_) c *= s;
    prune();
    return *this;
  }
  friend UEAElement operator+(UEAElement a, const UEAElement& b) { return a += b; }
  friend UEAElement operator-(UEAElement a, const UEAElement& b) { return a -= b; }
  friend UEAElement operator*(UEAElement a, cplx s) { return a *= s; }
  friend UEAElement operator*(cplx s, UEAElement a) { return a *= s; }
  UEAElement operator-() const { return *this * cplx(-1.0); }

  friend UEAElement operator*(const UEAElement& a, const UEAElement& b);

  /// Largest coefficient distance |a_e - b_e| over all monomials.
  double distance(const UEAElement& o) const {
    check_same(o);
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c - o.coeff(e)));
    for (const auto& [e, c] : o.terms_)
      if (!terms_.count(e)) m = std::max(m, std::abs(c));
    return m;
  }
  bool approx_equal(const UEAElement& o, double tol = 1e-10) const { return distance(o) <= tol; }

  void check_same(const UEAElement& o) const {
    if (alg_ && o.alg_ && alg_ != o.alg_ && alg_->labels() != o.alg_->labels())
      throw DomainError("UEA elements belong to different algebras");
  }

  /// Round-trippable rendering "(re+imi)*L^k*... + ...", or "0".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    char buf[96];
    for (const auto& [e, c] : terms_) {
      if (!out.empty()) out += " + ";
      std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real(), c.imag());
      out += buf;
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) out += "*" + alg_->label(i) + "^" + std::to_string(e[i]);
    }
    return out;
  }

  /// Human-oriented rendering such as "X^2 + 2i T - Y".
  std::string pretty() const {
    if (terms_.empty()) return "0";
    // Highest degree first, then reverse PBW order.
    std::vector<std::pair<Exponents, cplx>> sorted(terms_.begin(), terms_.end());
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
      const int da = monomial_degree(a.first), db = monomial_degree(b.first);
      return da != db ? da > db : a.first > b.first;
    });
    std::string out;
    for (const auto& [e, c] : sorted) {
      std::string mono;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += ' ';
        mono += alg_->label(i);
        if (e[i] > 1) mono += "^" + std::to_string(e[i]);
      }
      std::string coef = format_coeff(c, mono.empty());
      bool negative = false;
      if (!coef.empty() && coef[0] == '-') {
        negative = true;
        coef.erase(0, 1);
      }
      if (out.empty()) out += negative ? "-" : "";
      else out += negative ? " - " : " + ";
      out += coef;
      if (!mono.empty()) out += (coef.empty() ? "" : " ") + mono;
    }
    return out;
  }

 private:
  static std::string format_coeff(cplx c, bool bare) {
    char buf[64];
    auto num = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.12g", x);
      return std::string(buf);
    };
    if (c.imag() == 0.0) {
      if (!bare && c.real() == 1.0) return "";
      if (!bare && c.real() == -1.0) return "-";
      return num(c.real());
    }
    if (c.real() == 0.0) {
      if (c.imag() == 1.0) return "i";
      if (c.imag() == -1.0) return "-i";
      return num(c.imag()) + "i";
    }
    return "(" + num(c.real()) + (c.imag() < 0 ? "-" : "+") + num(std::abs(c.imag())) + "i)";
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = std::abs(it->second) < kPruneTolerance ? terms_.erase(it) : std::next(it);
  }

  AlgebraHandle alg_;
  Terms terms_;
};

namespace detail {

using TermList = std::vector<std::pair<Exponents, cplx>>;

inline void accumulate(std::map<Exponents, cplx>& acc, const TermList& t, cplx scale) {
  for (const auto& [e, c] : t) acc[e] += scale * c;
}

// Normal form of (PBW monomial) * e_k, memoized per algebra.
inline TermList times_letter(const GradedLieAlgebra& alg, const Exponents& mono, int k) {
  const int d = static_cast<int>(alg.dim());
  int last = -1;
  for (int i = d - 1; i > k; --i)
    if (mono[i] > 0) {
      last = i;
      break;
    }
  if (last < 0) {
    Exponents e = mono;
    ++e[k];
    return {{std::move(e), 1.0}};
  }
  auto& cache = alg.straighten_cache();
  const auto key = std::make_pair(mono, k);
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    auto it = cache.table.find(key);
    if (it != cache.table.end()) return it->second;
  }
  // mono = rest * e_last with last > k:
  // rest e_last e_k = (rest e_k) e_last + rest [e_last, e_k].
  Exponents rest = mono;
  --rest[last];
  std::map<Exponents, cplx> acc;
  for (const auto& [e, c] : times_letter(alg, rest, k)) accumulate(acc, times_letter(alg, e, last), c);
  for (const auto& [m, c] : alg.bracket(last, k)) accumulate(acc, times_letter(alg, rest, m), c);
  TermList out;
  for (auto& [e, c] : acc)
    if (std::abs(c) >= kPruneTolerance) out.emplace_back(e, c);
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    cache.table.emplace(key, out);
  }
  return out;
}

}  // namespace detail

/// Product in U(g), straightened into PBW normal form.
inline UEAElement operator*(const UEAElement& a, const UEAElement& b) {
  a.check_same(b);
  const auto& alg = a.algebra() ? a.algebra() : b.algebra();
  if (!alg) return UEAElement();
  std::map<Exponents, cplx> acc;
  for (const auto& [eb, cb] : b.terms()) {
    // a * e_0^{k_0} ... e_{d-1}^{k_{d-1}}, one letter at a time.
    std::map<Exponents, cplx> cur;
    for (const auto& [ea, ca] : a.terms()) cur[ea] += ca * cb;
    for (std::size_t i = 0; i < eb.size(); ++i)
      for (int r = 0; r < eb[i]; ++r) {
        std::map<Exponents, cplx> next;
        for (const auto& [e, c] : cur) detail::accumulate(next, detail::times_letter(*alg, e, static_cast<int>(i)), c);
        cur = std::move(next);
      }
    for (const auto& [e, c] : cur) acc[e] += c;
  }
  return UEAElement(alg, std::move(acc));
}

inline UEAElement multiply(const UEAElement& a, const UEAElement& b) { return a * b; }

/// PBW normal form of the word product e_{w_0} e_{w_1} ... .
inline UEAElement normal_order(const AlgebraHandle& alg, const Word& word) {
  std::map<Exponents, cplx> cur{{Exponents(alg->dim(), 0), 1.0}};
  for (int l : word.letters) {
    if (l < 0 || static_cast<std::size_t>(l) >= alg->dim()) throw DomainError("word letter out of range");
    std::map<Exponents, cplx> next;
    for (const auto& [e, c] : cur) detail::accumulate(next, detail::times_letter(*alg, e, l), c);
    cur = std::move(next);
  }
  return UEAElement(alg, std::move(cur));
}

/// Order in which out-of-order adjacent pairs are rewritten by
/// normal_order_rewriting().
enum class StraightenOrder { Leftmost, Rightmost, Random };

/// Reference straightening by repeated adjacent rewriting
/// x_j x_i -> x_i x_j + [x_j, x_i], without memoization. Used to check that
/// the normal form does not depend on the rewriting order.
inline UEAElement normal_order_rewriting(const AlgebraHandle& alg, const Word& word, StraightenOrder order,
                                         unsigned seed = 0) {
  std::mt19937 rng(seed);
  std::map<Exponents, cplx> out;
  std::vector<std::pair<std::vector<int>, cplx>> work{{word.letters, 1.0}};
  while (!work.empty()) {
    auto [w, c] = std::move(work.back());
    work.pop_back();
    std::vector<std::size_t> descents;
    for (std::size_t p = 0; p + 1 < w.size(); ++p)
      if (w[p] > w[p + 1]) descents.push_back(p);
    if (descents.empty()) {
      Exponents e(alg->dim(), 0);
      for (int l : w) ++e[l];
      out[e] += c;
      continue;
    }
    std::size_t p = descents.front();
    if (order == StraightenOrder::Rightmost) p = descents.back();
    if (order == StraightenOrder::Random) p = descents[std::uniform_int_distribution<std::size_t>(0, descents.size() - 1)(rng)];
    auto swapped = w;
    std::swap(swapped[p], swapped[p + 1]);
    for (const auto& [k, ck] : alg->bracket(w[p], w[p + 1])) {
      std::vector<int> shorter(w.begin(), w.begin() + p);
      shorter.push_back(k);
      shorter.insert(shorter.end(), w.begin() + p + 2, w.end());
      work.emplace_back(std::move(shorter), c * ck);
    }
    work.emplace_back(std::move(swapped), c);
  }
  return UEAElement(alg, std::move(out));
}

/// Conjugate-linear anti-automorphism with e_i -> -e_i:
/// (c e_{a_1}...e_{a_k})^dagger = conj(c) (-1)^k e_{a_k}...e_{a_1}.
inline UEAElement adjoint_const(const UEAElement& a) {
  const auto& alg = a.algebra();
  UEAElement out(alg);
  for (const auto& [e, c] : a.terms()) {
    Word rev;
    int k = 0;
    for (std::size_t i = e.size(); i-- > 0;)
      for (int r = 0; r < e[i]; ++r) {
        rev.letters.push_back(static_cast<int>(i));
        ++k;
      }
    out += normal_order(alg, rev) * (std::conj(c) * (k % 2 ? -1.0 : 1.0));
  }
  return out;
}

/// Homogeneous component of weighted degree exactly m.
inline UEAElement top_part(const UEAElement& a, int m) {
  UEAElement::Terms t;
  for (const auto& [e, c] : a.terms())
    if (a.monomial_degree(e) == m) t.emplace(e, c);
  return UEAElement(a.algebra(), std::move(t));
}

/// Dilation extended multiplicatively: a degree-m monomial picks up t^m.
inline UEAElement dilate_uea(const UEAElement& a, double t) {
  if (!(t > 0.0)) throw DomainError("dilation parameter must be positive");
  UEAElement::Terms out;
  for (const auto& [e, c] : a.terms()) out.emplace(e, c * std::pow(t, a.monomial_degree(e)));
  return UEAElement(a.algebra(), std::move(out));
}

/// Delta_G = -sum_j (-1)^{v/v_j} X_j^{2v/v_j}, v = lcm of generator degrees.
inline UEAElement rockland_laplacian(const AlgebraHandle& alg) {
  if (alg->generators().empty()) throw DomainError("algebra has no generators");
  const int v = alg->generator_lcm();
  UEAElement out(alg);
  for (int g : alg->generators()) {
    const int q = v / alg->degree(g);
    Exponents e(alg->dim(), 0);
    e[g] = 2 * q;
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    out -= UEAElement::monomial(alg, e, sign);
  }
  return out;
}

/// Parses the output of UEAElement::to_string().
inline UEAElement parse_uea(const AlgebraHandle& alg, const std::string& text) {
  UEAElement out(alg);
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  };
  auto number = [&]() -> double {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("expected number", pos);
    pos += static_cast<std::size_t>(end - begin);
    return v;
  };
  skip();
  if (text.substr(pos) == "0") return out;
  while (true) {
    skip();
    if (pos >= text.size() || text[pos] != '(') throw ParseError("expected '(' starting a coefficient", pos);
    ++pos;
    const double re = number();
    const double im = number();
    if (pos + 1 >= text.size() || text[pos] != 'i' || text[pos + 1] != ')')
      throw ParseError("expected 'i)' closing a coefficient", pos);
    pos += 2;
    Exponents e(alg->dim(), 0);
    while (pos < text.size() && text[pos] == '*') {
      ++pos;
      const std::size_t caret = text.find('^', pos);
      if (caret == std::string::npos) throw ParseError("expected '^' after basis label", pos);
      const int idx = alg->index_of(text.substr(pos, caret - pos));
      if (idx < 0) throw ParseError("unknown basis label", pos);
      pos = caret + 1;
      const double k = number();
      e[idx] += static_cast<int>(k);
    }
    out += UEAElement::monomial(alg, e, cplx(re, im));
    skip();
    if (pos >= text.size()) break;
    if (text[pos] != '+') throw ParseError("expected '+' between terms", pos);
    ++pos;
  }
  return out;
}

}  // namespace hypo
