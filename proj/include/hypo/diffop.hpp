#pragma once

// Left-invariant differential operators with variable coefficients,
// P = sum_alpha M_{a_alpha} X^alpha.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/expr.hpp"
#include "hypo/lie_core.hpp"
#include "hypo/uea.hpp"

namespace hypo {

namespace diffop_detail {

inline CoeffExpr polynomial_expr(const Polynomial& p, const std::vector<std::string>& names) {
  CoeffExpr out = CoeffExpr::constant(0.0, names);
  for (const auto& [e, c] : p.terms) {
    CoeffExpr m = CoeffExpr::constant(c, names);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int r = 0; r < e[i]; ++r) m = m * CoeffExpr::variable(static_cast<int>(i), names);
    out = out + m;
  }
  return out;
}

}  // namespace diffop_detail

/// Components of the vector field X_j in exponential coordinates, as
/// expressions: X_j = sum_k V[k] d/dx_k.
inline std::vector<CoeffExpr> vector_field_components(const GradedLieAlgebra& alg, std::size_t j) {
  if (j >= alg.dim()) throw DomainError("basis index out of range");
  const auto names = coordinate_names(alg);
  std::vector<CoeffExpr> out;
  for (const auto& p : left_flow_velocity(alg, j)) out.push_back(diffop_detail::polynomial_expr(p, names));
  return out;
}

/// X_j a, with X u(g) = d/ds u(exp(-s X) g) at s = 0.
inline CoeffExpr vector_field_apply(const GradedLieAlgebra& alg, std::size_t j, const CoeffExpr& a) {
  const auto v = vector_field_components(alg, j);
  CoeffExpr out = CoeffExpr::constant(0.0, a.names());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].is_zero()) continue;
    auto dk = a.partial(static_cast<int>(k));
    if (dk.is_zero()) continue;
    out = out + v[k] * dk;
  }
  return out;
}

/// X^w a = X_{w_1}(X_{w_2}(... X_{w_n} a)).
inline CoeffExpr word_apply(const GradedLieAlgebra& alg, std::span<const int> letters, const CoeffExpr& a) {
  CoeffExpr out = a;
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) out = vector_field_apply(alg, *it, out);
  return out;
}

struct DiffTerm {
  CoeffExpr coeff;
  Word word;
  /// Optional user-declared bound on sup_{len(beta)<=k} |X^beta coeff|.
  std::optional<double> declared_bound;
};

class DiffOp {
 public:
  explicit DiffOp(AlgebraHandle alg, int declared_order = -1) : alg_(std::move(alg)), declared_order_(declared_order) {}

  static DiffOp identity(const AlgebraHandle& alg) { return word(alg, Word{}); }
  static DiffOp multiplier(const AlgebraHandle& alg, const CoeffExpr& a) {
    DiffOp p(alg);
    p.add_term(a, Word{});
    return p;
  }
  static DiffOp word(const AlgebraHandle& alg, const Word& w, cplx c = 1.0) {
    DiffOp p(alg);
    p.add_term(CoeffExpr::constant(c, coordinate_names(*alg)), w);
    return p;
  }
  /// Constant-coefficient operator from a PBW element.
  static DiffOp from_uea(const UEAElement& a) {
    DiffOp p(a.algebra());
    for (const auto& [e, c] : a.terms()) {
      Word w;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int r = 0; r < e[i]; ++r) w.letters.push_back(static_cast<int>(i));
      p.add_term(CoeffExpr::constant(c, coordinate_names(*a.algebra())), w);
    }
    return p;
  }

  const AlgebraHandle& algebra() const { return alg_; }
  const std::vector<DiffTerm>& terms() const { return terms_; }
  std::vector<DiffTerm>& mutable_terms() { return terms_; }

  /// Adds a term, merging it into an existing term with the same word.
  void add_term(const CoeffExpr& a, const Word& w, std::optional<double> declared = std::nullopt) {
    if (a.is_zero()) return;
    for (auto it = terms_.begin(); it != terms_.end(); ++it)
      if (it->word.letters == w.letters) {
        it->coeff = it->coeff + a;
        it->declared_bound.reset();
        if (it->coeff.is_zero()) terms_.erase(it);
        return;
      }
    terms_.push_back({a, w, declared});
  }

  /// Maximum weighted length over the terms.
  int computed_order() const {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.word.weighted_length(*alg_));
    return m;
  }
  /// Nominal order m: the declared order if it exceeds the computed one.
  int order() const { return std::max(computed_order(), declared_order_); }
  int declared_order() const { return declared_order_; }
  void set_declared_order(int m) { declared_order_ = m; }

  /// Symbolic application to a function.
  CoeffExpr apply(const CoeffExpr& u) const {
    CoeffExpr out = CoeffExpr::constant(0.0, u.names());
    for (const auto& t : terms_) out = out + t.coeff * word_apply(*alg_, t.word.letters, u);
    return out;
  }

  void check_same(const DiffOp& o) const {
    if (alg_ != o.alg_ && alg_->name() != o.alg_->name())
      throw DomainError("operators act on different groups");
  }

  friend DiffOp operator+(DiffOp a, const DiffOp& b) {
    a.check_same(b);
    for (const auto& t : b.terms_) a.add_term(t.coeff, t.word);
    a.declared_order_ = std::max(a.declared_order_, b.declared_order_);
    return a;
  }
  friend DiffOp operator*(cplx s, DiffOp a) {
    const auto c = CoeffExpr::constant(s, coordinate_names(*a.alg_));
    DiffOp out(a.alg_, a.declared_order_);
    for (const auto& t : a.terms_) out.add_term(c * t.coeff, t.word);
    return out;
  }
  friend DiffOp operator-(const DiffOp& a, const DiffOp& b) { return a + cplx(-1.0) * b; }

  std::string to_string() const {
    std::string out;
    for (const auto& t : terms_) {
      if (!out.empty()) out += " + ";
      out += "M[" + t.coeff.to_string() + "]";
      if (!t.word.empty()) out += " " + hypo::to_string(*alg_, t.word);
    }
    return out.empty() ? "0" : out;
  }

 private:
  AlgebraHandle alg_;
  std::vector<DiffTerm> terms_;
  int declared_order_ = -1;
};

namespace diffop_detail {

// Leibniz expansion X^w M_f = sum over ordered sub-words S of w of
// M_{X^{w_S} f} X^{w minus S}. Each entry is (X^{w_S} f, remaining word);
// `skip_identity` drops S = empty.
inline std::vector<std::pair<CoeffExpr, Word>> leibniz(const GradedLieAlgebra& alg, const Word& w, const CoeffExpr& f,
                                                       bool skip_identity = false) {
  std::map<std::vector<int>, CoeffExpr> derivs;  // X^{sub} f keyed by sub-word
  auto deriv = [&](auto&& self, const std::vector<int>& sub) -> CoeffExpr {
    if (sub.empty()) return f;
    if (auto it = derivs.find(sub); it != derivs.end()) return it->second;
    auto inner = self(self, std::vector<int>(sub.begin() + 1, sub.end()));
    return derivs.emplace(sub, vector_field_apply(alg, sub[0], inner)).first->second;
  };
  std::vector<std::pair<CoeffExpr, Word>> out;
  const std::size_t n = w.letters.size();
  for (std::uint64_t mask = skip_identity ? 1 : 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> sub;
    Word rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) sub.push_back(w.letters[i]);
      else rest.letters.push_back(w.letters[i]);
    }
    auto d = deriv(deriv, sub);
    if (!d.is_zero()) out.emplace_back(d, std::move(rest));
  }
  return out;
}

}  // namespace diffop_detail

/// P_g = sum a_alpha(g) X^alpha in PBW normal form.
inline UEAElement freeze(const DiffOp& p, const GroupElement& g) {
  UEAElement out(p.algebra());
  for (const auto& t : p.terms()) {
    const cplx a = t.coeff(g.coords);
    if (a == cplx(0.0)) continue;
    out += normal_order(p.algebra(), t.word) * a;
  }
  return out;
}

/// Principal part at g: the weighted-degree-m component of P_g.
inline UEAElement top_at(const DiffOp& p, const GroupElement& g) { return top_part(freeze(p, g), p.order()); }

/// P^dagger = sum (X^alpha)^dagger M_{conj a_alpha}, rewritten in the form
/// sum M_b X^beta.
inline DiffOp formal_adjoint(const DiffOp& p) {
  const auto& alg = *p.algebra();
  DiffOp out(p.algebra(), p.declared_order());
  for (const auto& t : p.terms()) {
    Word rev{std::vector<int>(t.word.letters.rbegin(), t.word.letters.rend())};
    const double sign = t.word.letters.size() % 2 == 0 ? 1.0 : -1.0;
    const auto sgn = CoeffExpr::constant(sign, t.coeff.names());
    for (auto& [b, w] : diffop_detail::leibniz(alg, rev, t.coeff.conj())) out.add_term(sgn * b, w);
  }
  return out;
}

/// P Q, expanded with the Leibniz rule.
inline DiffOp compose(const DiffOp& p, const DiffOp& q) {
  p.check_same(q);
  const auto& alg = *p.algebra();
  DiffOp out(p.algebra(), p.order() + q.order());
  for (const auto& tp : p.terms())
    for (const auto& tq : q.terms())
      for (auto& [b, w] : diffop_detail::leibniz(alg, tp.word, tq.coeff)) {
        Word full = w;
        full.letters.insert(full.letters.end(), tq.word.letters.begin(), tq.word.letters.end());
        out.add_term(tp.coeff * b, full);
      }
  return out;
}

/// [P, M_psi] = P M_psi - M_psi P.
inline DiffOp commutator_with_mult(const DiffOp& p, const CoeffExpr& psi) {
  const auto& alg = *p.algebra();
  DiffOp out(p.algebra());
  for (const auto& t : p.terms())
    for (auto& [b, w] : diffop_detail::leibniz(alg, t.word, psi, true)) out.add_term(t.coeff * b, w);
  return out;
}

/// Bound metadata for one coefficient a_alpha: sup over words beta in the
/// generators with weighted length <= k of |X^beta a_alpha|.
struct CoefficientBound {
  Word alpha;
  int k = 0;
  double sampled_sup = 0.0;                // over the sampling box
  std::optional<double> certified_bound;  // interval enclosure over all of R^d
  bool provably_unbounded = false;        // some X^beta a is a nonconstant polynomial
  std::optional<double> declared_bound;
};

/// All words in the generators with weighted length <= k.
inline std::vector<Word> generator_words(const GradedLieAlgebra& alg, int k) {
  std::vector<Word> out{Word{}};
  for (std::size_t start = 0; start < out.size(); ++start)
    for (int g : alg.generators()) {
      Word w = out[start];
      w.letters.push_back(g);
      if (w.weighted_length(alg) <= k) out.push_back(std::move(w));
    }
  return out;
}

inline std::vector<CoefficientBound> coefficient_bounds(const DiffOp& p, int k, std::span<const Interval> box,
                                                        int samples = 2000, std::uint64_t seed = 0) {
  const auto& alg = *p.algebra();
  if (box.size() != alg.dim()) throw DomainError("sampling box has the wrong dimension");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> points(static_cast<std::size_t>(samples), std::vector<double>(alg.dim()));
  for (auto& x : points)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(box[i].lo, box[i].hi)(rng);

  const auto betas = generator_words(alg, k);
  std::vector<CoefficientBound> out;
  for (const auto& t : p.terms()) {
    CoefficientBound b{t.word, k, 0.0, 0.0, false, t.declared_bound};
    double cert = 0.0;
    bool certified = true;
    for (const auto& beta : betas) {
      const auto d = word_apply(alg, beta.letters, t.coeff);
      for (const auto& x : points) b.sampled_sup = std::max(b.sampled_sup, std::abs(d(x)));
      const auto r = d.global_range();
      if (r.bounded()) cert = std::max(cert, r.magnitude());
      else certified = false;
      if (d.provably_unbounded()) b.provably_unbounded = true;
    }
    if (certified) b.certified_bound = cert;
    else b.certified_bound.reset();
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace hypo
