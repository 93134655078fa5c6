#pragma once

// Graded nilpotent Lie algebras, dilations, and exponential-coordinate
// group arithmetic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypo/error.hpp"

namespace hypo {

using cplx = std::complex<double>;

/// Multivariate real polynomial in the exponential coordinates x_0..x_{d-1}.
/// Keys are exponent vectors.
struct Polynomial {
  std::map<std::vector<int>, double> terms;

  static Polynomial constant(std::size_t d, double c) {
    Polynomial p;
    if (c != 0.0) p.terms[std::vector<int>(d, 0)] = c;
    return p;
  }

  bool is_zero() const { return terms.empty(); }

  Polynomial& add(const Polynomial& o, double scale = 1.0) {
    for (const auto& [e, c] : o.terms) {
      double& v = terms[e];
      v += scale * c;
      if (v == 0.0) terms.erase(e);
    }
    return *this;
  }

  Polynomial times_variable(std::size_t i) const {
    Polynomial r;
    for (const auto& [e, c] : terms) {
      auto key = e;
      ++key[i];
      r.terms[key] = c;
    }
    return r;
  }

  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms) {
      double m = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) m *= x[i];
      s += m;
    }
    return s;
  }
};

/// Exponential coordinates of exp(sum_i coords[i] e_i).
struct GroupElement {
  std::vector<double> coords;

  GroupElement() = default;
  explicit GroupElement(std::vector<double> c) : coords(std::move(c)) {}
  static GroupElement identity(std::size_t d) { return GroupElement(std::vector<double>(d, 0.0)); }

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }

  /// Group inverse: exp(-xi) = exp(xi)^{-1}.
  GroupElement inverse() const {
    GroupElement r = *this;
    for (auto& c : r.coords) c = -c;
    return r;
  }
};

namespace detail {

/// Memo table for PBW straightening, keyed by (monomial exponents, letter).
/// Owned by the algebra and shared between its copies; guarded by a mutex.
struct StraightenCache {
  std::mutex mu;
  std::map<std::pair<std::vector<int>, int>, std::vector<std::pair<std::vector<int>, cplx>>> table;
};

}  // namespace detail

/// A finite-dimensional graded Lie algebra with a fixed ordered basis,
/// structure constants c_{ij}^k ([e_i, e_j] = sum_k c_{ij}^k e_k) and a set
/// of preferred generators.
///
/// The basis is stably reordered on construction so that degrees are
/// nondecreasing; labels, structure constants and generators follow.
class GradedLieAlgebra {
 public:
  /// One user-supplied bracket [e_i, e_j] = sum coeffs.
  struct Bracket {
    int i = 0;
    int j = 0;
    std::vector<std::pair<int, cplx>> coeffs;
  };

  /// Builds the algebra from an explicit structure tensor, stored verbatim
  /// (no antisymmetrization) so that validate() can report bad input.
  /// `structure[(i*d + j)*d + k]` = c_{ij}^k.
  GradedLieAlgebra(std::string name, std::vector<std::string> labels, std::vector<int> degrees,
                   std::vector<cplx> structure, std::vector<int> generators)
      : name_(std::move(name)),
        labels_(std::move(labels)),
        degrees_(std::move(degrees)),
        structure_(std::move(structure)),
        generators_(std::move(generators)) {
    const std::size_t d = labels_.size();
    if (d == 0) throw DomainError("Lie algebra must have positive dimension");
    if (degrees_.size() != d) throw DomainError("degree list length differs from basis length");
    if (structure_.size() != d * d * d) throw DomainError("structure tensor has wrong size");
    for (int deg : degrees_)
      if (deg < 1) throw DomainError("basis degrees must be positive integers");
    for (int g : generators_)
      if (g < 0 || static_cast<std::size_t>(g) >= d)
        throw DomainError("generator index " + std::to_string(g) + " out of range");
    normalize_order();
    build_sparse();
    build_dynkin_terms();
  }

  /// Convenience constructor from a bracket list. Each listed [e_i,e_j] also
  /// defines [e_j,e_i] = -[e_i,e_j].
  static GradedLieAlgebra from_brackets(std::string name, std::vector<std::string> labels,
                                        std::vector<int> degrees, const std::vector<Bracket>& brackets,
                                        std::vector<int> generators) {
    const std::size_t d = labels.size();
    std::vector<cplx> s(d * d * d, 0.0);
    for (const auto& b : brackets) {
      if (b.i < 0 || b.j < 0 || static_cast<std::size_t>(b.i) >= d || static_cast<std::size_t>(b.j) >= d)
        throw DomainError("bracket index out of range");
      for (const auto& [k, c] : b.coeffs) {
        if (k < 0 || static_cast<std::size_t>(k) >= d) throw DomainError("bracket result index out of range");
        s[(b.i * d + b.j) * d + k] += c;
        if (b.i != b.j) s[(b.j * d + b.i) * d + k] -= c;
      }
    }
    return GradedLieAlgebra(std::move(name), std::move(labels), std::move(degrees), std::move(s),
                            std::move(generators));
  }

  const std::string& name() const { return name_; }
  std::size_t dim() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  int degree(std::size_t i) const { return degrees_[i]; }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<int>& generators() const { return generators_; }

  /// Smallest s with V_{>s} = 0, i.e. the largest basis degree.
  int step() const { return *std::max_element(degrees_.begin(), degrees_.end()); }

  cplx structure(std::size_t i, std::size_t j, std::size_t k) const {
    const std::size_t d = dim();
    return structure_[(i * d + j) * d + k];
  }

  /// Nonzero entries of [e_i, e_j] as (k, c_{ij}^k).
  const std::vector<std::pair<int, cplx>>& bracket(std::size_t i, std::size_t j) const {
    return sparse_[i * dim() + j];
  }

  /// Index of the basis element with the given label, or -1.
  int index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
  }

  /// Least common multiple of the generator degrees.
  int generator_lcm() const {
    int v = 1;
    for (int g : generators_) v = std::lcm(v, degrees_[g]);
    return v;
  }

  /// True when every structure constant is real.
  bool has_real_structure() const {
    return std::all_of(structure_.begin(), structure_.end(), [](cplx c) { return c.imag() == 0.0; });
  }

  /// [u, v] for coordinate vectors (real or complex).
  template <class T>
  std::vector<T> lie_bracket(std::span<const T> u, std::span<const T> v) const {
    const std::size_t d = dim();
    std::vector<T> r(d, T{});
    for (std::size_t i = 0; i < d; ++i) {
      if (u[i] == T{}) continue;
      for (std::size_t j = 0; j < d; ++j) {
        if (v[j] == T{}) continue;
        for (const auto& [k, c] : sparse_[i * d + j]) r[k] += u[i] * v[j] * coeff_as<T>(c);
      }
    }
    return r;
  }

  /// A term of the truncated Dynkin series: coeff * [w_0,[w_1,...,w_{n-1}]],
  /// letters are 0 (first argument) or 1 (second argument).
  struct DynkinTerm {
    double coeff;
    std::vector<int> word;
  };
  const std::vector<DynkinTerm>& dynkin_terms() const { return dynkin_; }

  detail::StraightenCache& straighten_cache() const { return *cache_; }

 private:
  template <class T>
  static T coeff_as(cplx c) {
    if constexpr (std::is_same_v<T, double>) return c.real();
    else return T(c);
  }

  void normalize_order() {
    const std::size_t d = dim();
    std::vector<std::size_t> perm(d);  // perm[new] = old
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return degrees_[a] < degrees_[b]; });
    if (std::is_sorted(perm.begin(), perm.end())) return;
    std::vector<std::size_t> inv(d);
    for (std::size_t n = 0; n < d; ++n) inv[perm[n]] = n;
    std::vector<std::string> labels(d);
    std::vector<int> degrees(d);
    std::vector<cplx> s(d * d * d);
    for (std::size_t n = 0; n < d; ++n) {
      labels[n] = labels_[perm[n]];
      degrees[n] = degrees_[perm[n]];
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
          s[(inv[i] * d + inv[j]) * d + inv[k]] = structure_[(i * d + j) * d + k];
    for (int& g : generators_) g = static_cast<int>(inv[g]);
    labels_ = std::move(labels);
    degrees_ = std::move(degrees);
    structure_ = std::move(s);
  }

  void build_sparse() {
    const std::size_t d = dim();
    sparse_.assign(d * d, {});
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
          if (structure(i, j, k) != 0.0) sparse_[i * d + j].emplace_back(static_cast<int>(k), structure(i, j, k));
  }

  // Dynkin's formula for log(e^X e^Y), keeping words of total length <= step.
  // Brackets of longer words vanish because they land in degree > step.
  void build_dynkin_terms() {
    const int s = step();
    std::map<std::vector<int>, double> acc;
    std::vector<double> fact(s + 1, 1.0);
    for (int i = 1; i <= s; ++i) fact[i] = fact[i - 1] * i;
    // Enumerate sequences of (r_i, s_i) pairs with r_i + s_i >= 1.
    std::vector<std::pair<int, int>> seq;
    auto rec = [&](auto&& self, int used) -> void {
      if (!seq.empty()) {
        const int n = static_cast<int>(seq.size());
        double denom = used;
        std::vector<int> word;
        for (auto [r, q] : seq) {
          denom *= fact[r] * fact[q];
          word.insert(word.end(), r, 0);
          word.insert(word.end(), q, 1);
        }
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        const bool vanishes = word.size() >= 2 && word[word.size() - 1] == word[word.size() - 2];
        if (!vanishes) acc[word] += sign / (n * denom);
      }
      for (int r = 0; used + r <= s; ++r)
        for (int q = 0; used + r + q <= s; ++q) {
          if (r + q == 0) continue;
          seq.emplace_back(r, q);
          self(self, used + r + q);
          seq.pop_back();
        }
    };
    rec(rec, 0);
    dynkin_.clear();
    for (auto& [w, c] : acc)
      if (std::abs(c) > 1e-15) dynkin_.push_back({c, w});
  }

  std::string name_;
  std::vector<std::string> labels_;
  std::vector<int> degrees_;
  std::vector<cplx> structure_;
  std::vector<int> generators_;
  std::vector<std::vector<std::pair<int, cplx>>> sparse_;
  std::vector<DynkinTerm> dynkin_;
  std::shared_ptr<detail::StraightenCache> cache_ = std::make_shared<detail::StraightenCache>();
};

using AlgebraHandle = std::shared_ptr<const GradedLieAlgebra>;

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { Antisymmetry, Jacobi, Grading, Generators };
  Kind kind;
  int i = -1, j = -1, k = -1;  // 0-based basis indices, -1 when unused
  std::string message;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Antisymmetry: return "antisymmetry";
    case Violation::Kind::Jacobi: return "jacobi";
    case Violation::Kind::Grading: return "grading";
    case Violation::Kind::Generators: return "generators";
  }
  return "?";
}

using ValidationReport = std::vector<Violation>;

namespace detail {

// Rank of a set of complex vectors.
inline int span_rank(const std::vector<std::vector<cplx>>& vs, std::size_t d) {
  if (vs.empty()) return 0;
  Eigen::MatrixXcd m(d, vs.size());
  for (std::size_t c = 0; c < vs.size(); ++c)
    for (std::size_t r = 0; r < d; ++r) m(r, c) = vs[c][r];
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

}  // namespace detail

/// Checks antisymmetry, Jacobi, grading compatibility and the generator
/// conditions. An empty report means the algebra is valid.
inline ValidationReport validate(const GradedLieAlgebra& alg, double tol = 1e-10) {
  ValidationReport out;
  const std::size_t d = alg.dim();
  auto idx = [](std::size_t v) { return static_cast<int>(v); };
  auto label3 = [&](std::size_t i, std::size_t j, std::size_t k) {
    return "(" + alg.label(i) + "," + alg.label(j) + "," + alg.label(k) + ")";
  };

  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        if (std::abs(alg.structure(i, j, k) + alg.structure(j, i, k)) > tol)
          out.push_back({Violation::Kind::Antisymmetry, idx(i), idx(j), idx(k),
                         "c_ij^k != -c_ji^k at " + label3(i, j, k)});

  // Jacobi: [e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]] = 0.
  auto nested = [&](std::size_t a, std::size_t b, std::size_t c, std::vector<cplx>& acc) {
    for (const auto& [m, cm] : alg.bracket(b, c))
      for (const auto& [k, ck] : alg.bracket(a, m)) acc[k] += cm * ck;
  };
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      for (std::size_t l = j + 1; l < d; ++l) {
        std::vector<cplx> acc(d, 0.0);
        nested(i, j, l, acc);
        nested(j, l, i, acc);
        nested(l, i, j, acc);
        double worst = 0.0;
        for (auto c : acc) worst = std::max(worst, std::abs(c));
        if (worst > tol)
          out.push_back({Violation::Kind::Jacobi, idx(i), idx(j), idx(l), "Jacobi identity fails for " + label3(i, j, l)});
      }

  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        if (std::abs(alg.structure(i, j, k)) > tol && alg.degree(k) != alg.degree(i) + alg.degree(j))
          out.push_back({Violation::Kind::Grading, idx(i), idx(j), idx(k),
                         "[V_" + std::to_string(alg.degree(i)) + ",V_" + std::to_string(alg.degree(j)) +
                             "] has a component in V_" + std::to_string(alg.degree(k)) + " at " + label3(i, j, k)});

  // Generators: distinct indices (hence independent and homogeneous), and
  // iterated brackets span the whole algebra.
  const auto& gens = alg.generators();
  std::vector<int> sorted = gens;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    out.push_back({Violation::Kind::Generators, -1, -1, -1, "generator list has repeated entries"});
  if (gens.empty()) {
    out.push_back({Violation::Kind::Generators, -1, -1, -1, "no generators declared"});
  } else {
    std::vector<std::vector<cplx>> span;
    for (int g : sorted) {
      std::vector<cplx> e(d, 0.0);
      e[g] = 1.0;
      span.push_back(e);
    }
    int rank = detail::span_rank(span, d);
    std::vector<std::vector<cplx>> layer = span;
    for (int depth = 1; depth < alg.step() + 1 && rank < static_cast<int>(d); ++depth) {
      std::vector<std::vector<cplx>> next;
      for (int g : sorted)
        for (const auto& w : layer) {
          std::vector<cplx> e(d, 0.0);
          e[g] = 1.0;
          auto b = alg.lie_bracket<cplx>(e, w);
          if (std::any_of(b.begin(), b.end(), [&](cplx c) { return std::abs(c) > tol; })) {
            std::vector<std::vector<cplx>> trial = span;
            trial.push_back(b);
            const int r = detail::span_rank(trial, d);
            if (r > rank) {
              span = std::move(trial);
              rank = r;
            }
            next.push_back(b);
          }
        }
      layer = std::move(next);
      if (layer.empty()) break;
    }
    if (rank < static_cast<int>(d))
      out.push_back({Violation::Kind::Generators, -1, -1, -1,
                     "generators span only a " + std::to_string(rank) + "-dimensional subalgebra of a " +
                         std::to_string(d) + "-dimensional algebra"});
  }
  return out;
}

/// d_hom = sum_k k * dim(V_k).
inline int homogeneous_dimension(const GradedLieAlgebra& alg) {
  return std::accumulate(alg.degrees().begin(), alg.degrees().end(), 0);
}

/// delta_t: scales the V_j component by t^j.
template <class T>
std::vector<T> dilate(const GradedLieAlgebra& alg, double t, std::span<const T> v) {
  if (!(t > 0.0)) throw DomainError("dilation parameter must be positive");
  std::vector<T> r(v.begin(), v.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= std::pow(t, alg.degree(i));
  return r;
}

inline GroupElement dilate(const GradedLieAlgebra& alg, double t, const GroupElement& g) {
  return GroupElement(dilate<double>(alg, t, g.coords));
}

/// Group product in exponential coordinates via the Dynkin series,
/// truncated at the step (exact by nilpotency).
inline GroupElement bch_multiply(const GradedLieAlgebra& alg, const GroupElement& g1, const GroupElement& g2) {
  const std::size_t d = alg.dim();
  std::vector<double> z(d, 0.0);
  std::vector<double> cur(d);
  for (const auto& term : alg.dynkin_terms()) {
    const auto& w = term.word;
    const auto& last = w.back() == 0 ? g1.coords : g2.coords;
    cur.assign(last.begin(), last.end());
    bool zero = false;
    for (std::size_t p = w.size() - 1; p-- > 0;) {
      const auto& a = w[p] == 0 ? g1.coords : g2.coords;
      cur = alg.lie_bracket<double>(a, cur);
      if (std::all_of(cur.begin(), cur.end(), [](double x) { return x == 0.0; })) {
        zero = true;
        break;
      }
    }
    if (zero) continue;
    for (std::size_t k = 0; k < d; ++k) z[k] += term.coeff * cur[k];
  }
  return GroupElement(std::move(z));
}

/// Velocity of the flow s -> exp(-s e_j) g at s = 0, as polynomials in the
/// coordinates of g:  -sum_n (B_n / n!) ad_g^n(e_j)  (B_1 = -1/2),
/// the first-order term of the group law in its left argument.
inline std::vector<Polynomial> left_flow_velocity(const GradedLieAlgebra& alg, std::size_t j) {
  static constexpr double kBernoulli[] = {1.0, -0.5, 1.0 / 6, 0.0, -1.0 / 30, 0.0, 1.0 / 42, 0.0, -1.0 / 30, 0.0};
  const std::size_t d = alg.dim();
  const int s = alg.step();
  if (s > 9) throw DomainError("flow velocity supports step <= 9");
  std::vector<Polynomial> term(d), out(d);
  term[j] = Polynomial::constant(d, 1.0);
  double fact = 1.0;
  for (int n = 0; n < s; ++n) {
    if (n > 0) {
      // term <- [g, term], g = sum_i x_i e_i
      std::vector<Polynomial> next(d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t l = 0; l < d; ++l) {
          if (term[l].is_zero()) continue;
          for (const auto& [k, c] : alg.bracket(i, l)) next[k].add(term[l].times_variable(i), c.real());
        }
      term = std::move(next);
      fact *= n;
    }
    const double b = kBernoulli[n] / fact;
    if (b == 0.0) continue;
    for (std::size_t k = 0; k < d; ++k) out[k].add(term[k], -b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builtin algebras

/// Recognised names: "heisenberg1", "engel", "anisotropic_plane",
/// "abelian(d)" and "abelian(d,(v1,...,vd))".
inline GradedLieAlgebra builtin(const std::string& raw) {
  std::string name;
  for (char c : raw)
    if (c != ' ') name += c;
  using B = GradedLieAlgebra::Bracket;
  if (name == "heisenberg1")
    return GradedLieAlgebra::from_brackets("heisenberg1", {"X", "Y", "T"}, {1, 1, 2}, {B{0, 1, {{2, 1.0}}}}, {0, 1});
  if (name == "engel")
    return GradedLieAlgebra::from_brackets("engel", {"X1", "X2", "X3", "X4"}, {1, 1, 2, 3},
                                           {B{0, 1, {{2, 1.0}}}, B{0, 2, {{3, 1.0}}}}, {0, 1});
  if (name == "anisotropic_plane")
    return GradedLieAlgebra::from_brackets("anisotropic_plane", {"X1", "X2"}, {1, 2}, {}, {0, 1});
  static const std::regex abelian(R"(abelian\((\d+)(?:,\(([\d,]*)\))?\))");
  std::smatch m;
  if (std::regex_match(name, m, abelian)) {
    const int d = std::stoi(m[1]);
    if (d < 1) throw DomainError("abelian dimension must be positive");
    std::vector<int> degrees(d, 1);
    if (m[2].matched) {
      degrees.clear();
      std::stringstream ss(m[2]);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) degrees.push_back(std::stoi(tok));
      if (static_cast<int>(degrees.size()) != d) throw DomainError("abelian degree list length must equal d");
    }
    std::vector<std::string> labels;
    std::vector<int> gens;
    for (int i = 0; i < d; ++i) {
      labels.push_back("X" + std::to_string(i + 1));
      gens.push_back(i);
    }
    return GradedLieAlgebra::from_brackets(name, labels, degrees, {}, gens);
  }
  throw DomainError("unknown builtin algebra '" + raw + "'");
}

inline AlgebraHandle make_builtin(const std::string& name) {
  return std::make_shared<const GradedLieAlgebra>(builtin(name));
}

}  // namespace hypo
