#pragma once

// Unitary representations of the Heisenberg group: the Schroedinger pair
// pi_+ / pi_- in a truncated Hermite basis and the one-dimensional
// characters, plus the Rockland constant built from them.
//
// Only pi_+ and pi_- are used among the infinite-dimensional
// representations. For a homogeneous top part D of degree m the remaining
// ones pi_lambda are unitarily equivalent to pi_{sign lambda} composed with the
// dilation by |lambda|^{1/2}, which multiplies both pi(D) and
// pi((-Delta)^{m/2}) by the same power of |lambda|. The ratio defining the
// constant is therefore unchanged.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypo/diffop.hpp"
#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"
#include "hypo/uea.hpp"

namespace hypo {

enum class RepSign { Plus, Minus };

inline const char* to_string(RepSign s) { return s == RepSign::Plus ? "pi+" : "pi-"; }

/// N x N block of pi(D) in the harmonic oscillator eigenbasis.
struct HermiteOperator {
  int size = 0;
  int pad = 0;
  Eigen::MatrixXcd entries;

  bool is_hermitian(double tol = 1e-10) const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol; }
};

/// Throws unless the basis is X, Y, T with [X, Y] = T and no other brackets.
inline void require_heisenberg(const GradedLieAlgebra& alg) {
  bool ok = alg.dim() == 3 && alg.degrees() == std::vector<int>{1, 1, 2};
  for (std::size_t i = 0; ok && i < 3; ++i)
    for (std::size_t j = 0; ok && j < 3; ++j)
      for (std::size_t k = 0; ok && k < 3; ++k) {
        cplx expect = 0.0;
        if (i == 0 && j == 1 && k == 2) expect = 1.0;
        if (i == 1 && j == 0 && k == 2) expect = -1.0;
        ok = std::abs(alg.structure(i, j, k) - expect) < 1e-14;
      }
  if (!ok) throw DomainError("representation requires the Heisenberg algebra with [X, Y] = T");
}

namespace repr_detail {

// q = (a + a^dagger)/sqrt2 and p = (a - a^dagger)/(i sqrt2), so that
// [q, p] = i and p^2 + q^2 = 2 a^dagger a + 1.
inline void ladder_pq(int K, Eigen::MatrixXcd& p, Eigen::MatrixXcd& q) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(K, K);
  for (int n = 1; n < K; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd ad = a.adjoint();
  q = (a + ad) / std::numbers::sqrt2;
  p = (a - ad) / (cplx(0, 1) * std::numbers::sqrt2);
}

inline Eigen::MatrixXcd power(const Eigen::MatrixXcd& m, int k) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

}  // namespace repr_detail

/// Monomial matrices pi(X^a Y^b T^c) at a fixed working size, cached.
class MonomialTable {
 public:
  MonomialTable(RepSign sign, int size) : sign_(sign), size_(size) {
    Eigen::MatrixXcd p, q;
    repr_detail::ladder_pq(size, p, q);
    const cplx i(0, 1);
    const double s = sign == RepSign::Plus ? 1.0 : -1.0;
    px_ = i * p;
    py_ = s * i * q;
    pt_ = s * i;
  }

  int size() const { return size_; }
  RepSign sign() const { return sign_; }

  const Eigen::MatrixXcd& get(const Exponents& e) {
    auto it = cache_.find(e);
    if (it != cache_.end()) return it->second;
    // PBW order X^a Y^b T^c.
    Eigen::MatrixXcd m = repr_detail::power(px_, e[0]) * repr_detail::power(py_, e[1]);
    m *= std::pow(pt_, e[2]);
    return cache_.emplace(e, std::move(m)).first->second;
  }

  /// Full working-size matrix of pi(D).
  Eigen::MatrixXcd apply(const UEAElement& d) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(size_, size_);
    for (const auto& [e, c] : d.terms()) out += c * get(e);
    return out;
  }

 private:
  RepSign sign_;
  int size_;
  Eigen::MatrixXcd px_, py_;
  cplx pt_;
  std::map<Exponents, Eigen::MatrixXcd> cache_;
};

inline int ladder_length(const UEAElement& d) {
  int max_len = 0;
  for (const auto& [e, c] : d.terms()) max_len = std::max(max_len, e[0] + e[1]);
  return max_len;
}

/// Matrix of pi_+(D) or pi_-(D): pi(X) = ip, pi(Y) = +-iq, pi(T) = +-i.
/// Built at size N + pad and cropped to N, so the returned block is exact.
inline HermiteOperator rep_matrix(const UEAElement& d, RepSign sign, int N, int pad = -1) {
  require_heisenberg(*d.algebra());
  if (N <= 0) throw DomainError("truncation size must be positive");
  if (pad < 0) pad = 2 * ladder_length(d);
  MonomialTable table(sign, N + pad);
  return {N, pad, table.apply(d).topLeftCorner(N, N)};
}

/// pi_{xi,eta}(D) for the character X -> i xi, Y -> i eta, T -> 0.
inline cplx character_value(const UEAElement& d, double xi, double eta) {
  require_heisenberg(*d.algebra());
  const cplx i(0, 1);
  cplx out = 0.0;
  for (const auto& [e, c] : d.terms()) {
    if (e[2] > 0) continue;
    out += c * std::pow(i * xi, e[0]) * std::pow(i * eta, e[1]);
  }
  return out;
}

struct RocklandWitness {
  std::string rep;   // "pi+", "pi-" or "char"
  int level = -1;    // Hermite level for pi+/pi-
  double xi = 0.0;   // character point
  double eta = 0.0;
  int point = -1;    // index of the frozen top part
  double ratio = 0.0;
};

struct RocklandReport {
  double c_P = 0.0;
  bool elliptic = false;
  double threshold = 0.0;
  /// Global minimizer first, then the minimizer of each representation type.
  std::vector<RocklandWitness> witnesses;
  bool tail_ok = true;
  /// True when every frozen top part was diagonal in the Hermite basis, so
  /// level ratios are exact; otherwise c_P is a truncated sigma_min.
  bool exact_levels = true;
  int n_max = 0;
  int order = 0;
};

struct RocklandOptions {
  int n_max = 200;
  double threshold = 1e-9;
  int character_samples = 64;
  /// Evaluate pi o delta_t instead of pi.
  double dilation = 1.0;
  double tail_tolerance = 0.05;
  /// Matrix size for non-diagonal tops; at least n_max + 1.
  int truncation = 0;
};

/// Rockland constant of a family of frozen top parts of order m:
/// inf over pi in {pi+, pi-, characters} of ||pi(D) v|| / ||pi((-Delta)^{m/2}) v||.
inline RocklandReport rockland_constant(const std::vector<UEAElement>& tops, int m, const RocklandOptions& opt = {}) {
  if (tops.empty()) throw DomainError("no frozen top parts supplied");
  if (opt.n_max < 1) throw DomainError("n_max must be positive");
  const auto& alg = tops.front().algebra();
  require_heisenberg(*alg);
  RocklandReport rep;
  rep.threshold = opt.threshold;
  rep.n_max = opt.n_max;
  rep.order = m;
  const int N = std::max(opt.n_max + 1, opt.truncation);
  const double t = opt.dilation;

  // pi((-Delta)^{m/2}) = diag((2n+1)^{m/2}) under pi+ and pi-; dilation by t
  // scales it by t^m.
  Eigen::VectorXd h(N);
  for (int n = 0; n < N; ++n) h[n] = std::pow(t, m) * std::pow(2.0 * n + 1.0, 0.5 * m);

  RocklandWitness best{"", -1, 0, 0, -1, std::numeric_limits<double>::infinity()};
  RocklandWitness best_plus = best, best_minus = best, best_char = best;
  auto consider = [&](const RocklandWitness& w) {
    if (w.ratio < best.ratio) best = w;
    auto& slot = w.rep == "pi+" ? best_plus : w.rep == "pi-" ? best_minus : best_char;
    if (w.ratio < slot.ratio) slot = w;
  };

  int pad = 0;
  for (const auto& d : tops) pad = std::max(pad, 2 * ladder_length(d));
  MonomialTable plus(RepSign::Plus, N + pad), minus(RepSign::Minus, N + pad);

  for (std::size_t ip = 0; ip < tops.size(); ++ip) {
    const UEAElement d = t == 1.0 ? tops[ip] : dilate_uea(tops[ip], t);
    for (RepSign sign : {RepSign::Plus, RepSign::Minus}) {
      auto& table = sign == RepSign::Plus ? plus : minus;
      const Eigen::MatrixXcd a = table.apply(d).topLeftCorner(N, N);
      Eigen::MatrixXcd b = a * h.cwiseInverse().asDiagonal();
      const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
      Eigen::MatrixXcd off = b;
      off.diagonal().setZero();
      if (off.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        Eigen::VectorXd r = b.diagonal().cwiseAbs();
        for (int n = 0; n < N; ++n) consider({to_string(sign), n, 0, 0, static_cast<int>(ip), r[n]});
        const double last = r[N - 1];
        for (int n = opt.n_max / 2; n < N; ++n)
          if (std::abs(r[n] - last) > opt.tail_tolerance * last) rep.tail_ok = false;
      } else {
        rep.exact_levels = false;
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
        const double smin = svd.singularValues().minCoeff();
        consider({to_string(sign), -1, 0, 0, static_cast<int>(ip), smin});
        // Stability of the truncated value against halving the truncation.
        const int half = std::max(1, N / 2);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd_half(b.topLeftCorner(half, half));
        const double shalf = svd_half.singularValues().minCoeff();
        if (std::abs(shalf - smin) > opt.tail_tolerance * std::max(smin, 1e-300)) rep.tail_ok = false;
      }
    }
    // Characters are homogeneous in (xi, eta): the unit circle suffices.
    for (int k = 0; k < opt.character_samples; ++k) {
      const double th = 2 * std::numbers::pi * k / opt.character_samples;
      const double xi = std::cos(th), eta = std::sin(th);
      const double num = std::abs(character_value(d, xi, eta));
      const double den = std::pow(t, m);
      consider({"char", -1, xi, eta, static_cast<int>(ip), num / den});
    }
  }
  rep.c_P = std::min(best.ratio, 1.0e300);
  rep.elliptic = rep.c_P > opt.threshold;
  rep.witnesses.push_back(best);
  for (const auto& w : {best_plus, best_minus, best_char})
    if (w.point >= 0) rep.witnesses.push_back(w);
  return rep;
}

/// Rockland constant of P over sampled points g (frozen top parts P_g^top).
inline RocklandReport rockland_constant(const DiffOp& p, std::span<const GroupElement> points,
                                        const RocklandOptions& opt = {}) {
  std::vector<UEAElement> tops;
  for (const auto& g : points) tops.push_back(top_at(p, g));
  return rockland_constant(tops, p.order(), opt);
}

/// The family -X^2 - Y^2 + i f T at the given values of f.
inline RocklandReport rockland_constant_family(const AlgebraHandle& alg, std::span<const double> f_values,
                                               const RocklandOptions& opt = {}) {
  require_heisenberg(*alg);
  const auto X = UEAElement::basis(alg, 0), Y = UEAElement::basis(alg, 1), T = UEAElement::basis(alg, 2);
  std::vector<UEAElement> tops;
  for (double f : f_values) tops.push_back(-(X * X) - Y * Y + cplx(0, f) * T);
  return rockland_constant(tops, 2, opt);
}

struct EllipticityResult {
  bool elliptic = false;
  double margin = 0.0;
};

/// Distance from f to the odd integers 2Z + 1.
inline double distance_to_odd(double f) {
  const double nearest = 2.0 * std::round((f - 1.0) / 2.0) + 1.0;
  return std::abs(f - nearest);
}

/// -X^2 - Y^2 + i M_f T is uniformly Rockland iff inf dist(f, 2Z+1) > 0.
inline EllipticityResult heisenberg_ellipticity(std::span<const double> f_values) {
  if (f_values.empty()) throw DomainError("no samples of f supplied");
  double margin = std::numeric_limits<double>::infinity();
  for (double f : f_values) margin = std::min(margin, distance_to_odd(f));
  return {margin > 0.0, margin};
}

}  // namespace hypo
