#pragma once

// Finite-difference discretization on a coordinate box. Vector fields are
// central differences along the group flow s -> exp(-s X_j) g, with off-grid
// values obtained by multilinear interpolation.

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hypo/diffop.hpp"
#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"
#include "hypo/uea.hpp"

namespace hypo {

using GridFunction = Eigen::VectorXcd;
using SparseOp = Eigen::SparseMatrix<cplx>;

/// Uniform grid lo_i + k h_i, k = 0..n_i-1, h_i = (hi_i - lo_i)/n_i. The last
/// axis varies fastest in the linear index.
struct Grid {
  std::vector<double> lo, hi;
  std::vector<int> n;
  std::vector<bool> periodic;

  static Grid cube(std::size_t d, int points, double half_width, bool wrap = true) {
    return {std::vector<double>(d, -half_width), std::vector<double>(d, half_width), std::vector<int>(d, points),
            std::vector<bool>(d, wrap)};
  }

  std::size_t dim() const { return n.size(); }
  double spacing(std::size_t i) const { return (hi[i] - lo[i]) / n[i]; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int k : n) s *= static_cast<std::size_t>(k);
    return s;
  }
  double cell_volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= spacing(i);
    return v;
  }

  std::vector<int> multi_index(std::size_t idx) const {
    std::vector<int> m(dim());
    for (std::size_t i = dim(); i-- > 0;) {
      m[i] = static_cast<int>(idx % static_cast<std::size_t>(n[i]));
      idx /= static_cast<std::size_t>(n[i]);
    }
    return m;
  }
  std::size_t linear_index(const std::vector<int>& m) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim(); ++i) idx = idx * static_cast<std::size_t>(n[i]) + static_cast<std::size_t>(m[i]);
    return idx;
  }
  std::vector<double> point(std::size_t idx) const {
    const auto m = multi_index(idx);
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = lo[i] + m[i] * spacing(i);
    return x;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t i = 0; i < dim(); ++i) s += (i ? "x" : "") + std::to_string(n[i]);
    return s;
  }
};

/// Sparse matrix of a discretized operator with its weighted order.
struct DiscreteOp {
  SparseOp mat;
  int order = 0;

  /// ||A - A^*||_F / ||A||_F.
  double hermitian_defect() const {
    const double nrm = mat.norm();
    if (nrm == 0) return 0.0;
    SparseOp adj = mat.adjoint();
    return SparseOp(mat - adj).norm() / nrm;
  }
  DiscreteOp symmetrized() const {
    SparseOp adj = mat.adjoint();
    return {SparseOp(0.5 * (mat + adj)), order};
  }
};

/// Haar-weighted inner product <u, w> = sum u conj(w) |cell|.
inline cplx inner(const Grid& grid, const GridFunction& u, const GridFunction& w) {
  return w.dot(u) * grid.cell_volume();  // Eigen's dot conjugates the first argument
}

inline double l2_norm(const Grid& grid, const GridFunction& u) { return u.norm() * std::sqrt(grid.cell_volume()); }

inline GridFunction sample(const Grid& grid, const CoeffExpr& f) {
  GridFunction out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) out[static_cast<Eigen::Index>(k)] = f(grid.point(k));
  return out;
}

template <class F>
GridFunction sample_fn(const Grid& grid, F&& f) {
  GridFunction out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) out[static_cast<Eigen::Index>(k)] = f(grid.point(k));
  return out;
}

namespace lattice_detail {

// Multilinear interpolation stencil at coordinates y: (linear index, weight).
inline std::vector<std::pair<std::size_t, double>> stencil(const Grid& grid, const std::vector<double>& y) {
  std::vector<std::pair<std::size_t, double>> out{{0, 1.0}};
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    double pos = (y[i] - grid.lo[i]) / grid.spacing(i);
    const double r = std::round(pos);
    if (std::abs(pos - r) < 1e-9) pos = r;
    int k = static_cast<int>(std::floor(pos));
    const double frac = pos - k;
    int k1 = k + 1;
    if (grid.periodic[i]) {
      k = ((k % grid.n[i]) + grid.n[i]) % grid.n[i];
      k1 = ((k1 % grid.n[i]) + grid.n[i]) % grid.n[i];
    } else if (k < 0 || k >= grid.n[i] || (frac > 0 && k1 >= grid.n[i])) {
      throw DomainError("flow leaves the non-periodic grid box");
    }
    std::vector<std::pair<std::size_t, double>> next;
    for (const auto& [idx, wt] : out) {
      next.emplace_back(idx * grid.n[i] + k, wt * (1.0 - frac));
      if (frac > 0) next.emplace_back(idx * grid.n[i] + k1, wt * frac);
    }
    out.swap(next);
  }
  return out;
}

}  // namespace lattice_detail

/// X_j u(g) ~ (u(exp(-s X_j) g) - u(exp(s X_j) g)) / 2s with s the spacing
/// of axis j.
inline DiscreteOp vector_field_op(const GradedLieAlgebra& alg, const Grid& grid, std::size_t j) {
  if (grid.dim() != alg.dim()) throw DomainError("grid dimension does not match the algebra");
  if (j >= alg.dim()) throw DomainError("basis index out of range");
  const double s = grid.spacing(j);
  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<double> e(alg.dim(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    GroupElement g(grid.point(k));
    for (double sign : {1.0, -1.0}) {
      e[j] = -sign * s;
      const auto y = bch_multiply(alg, GroupElement(e), g);
      for (const auto& [idx, wt] : lattice_detail::stencil(grid, y.coords))
        if (wt > 1e-15)
          trip.emplace_back(static_cast<int>(k), static_cast<int>(idx), sign * wt / (2 * s));
    }
  }
  const auto N = static_cast<Eigen::Index>(grid.size());
  SparseOp m(N, N);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(cplx(0.0), 1e-15);
  return {m, alg.degree(j)};
}

/// Cache of the basis vector fields on one grid.
class FieldSet {
 public:
  FieldSet(AlgebraHandle alg, Grid grid) : alg_(std::move(alg)), grid_(std::move(grid)) {
    for (std::size_t j = 0; j < alg_->dim(); ++j) fields_.push_back(vector_field_op(*alg_, grid_, j).mat);
  }
  const SparseOp& operator[](std::size_t j) const { return fields_[j]; }
  const Grid& grid() const { return grid_; }
  const AlgebraHandle& algebra() const { return alg_; }

  /// X_{w_1} ... X_{w_n}.
  SparseOp word(const std::vector<int>& letters) const {
    const auto N = static_cast<Eigen::Index>(grid_.size());
    SparseOp out(N, N);
    out.setIdentity();
    for (int l : letters) out = SparseOp(out * fields_[l]);
    return out;
  }

 private:
  AlgebraHandle alg_;
  Grid grid_;
  std::vector<SparseOp> fields_;
};

inline SparseOp diagonal(const GridFunction& a) {
  const auto N = a.size();
  SparseOp d(N, N);
  d.reserve(Eigen::VectorXi::Constant(N, 1));
  for (Eigen::Index k = 0; k < N; ++k)
    if (a[k] != cplx(0.0)) d.insert(k, k) = a[k];
  d.makeCompressed();
  return d;
}

/// Constant-coefficient operator: PBW monomials as products of fields.
inline DiscreteOp build_operator(const UEAElement& a, const FieldSet& fields) {
  const auto N = static_cast<Eigen::Index>(fields.grid().size());
  SparseOp out(N, N);
  for (const auto& [e, c] : a.terms()) {
    std::vector<int> letters;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int r = 0; r < e[i]; ++r) letters.push_back(static_cast<int>(i));
    out += c * fields.word(letters);
  }
  return {out, std::max(0, a.degree())};
}

/// sum_alpha M_{a_alpha} X^alpha with coefficients sampled on the grid.
inline DiscreteOp build_operator(const DiffOp& p, const FieldSet& fields) {
  const auto N = static_cast<Eigen::Index>(fields.grid().size());
  SparseOp out(N, N);
  for (const auto& t : p.terms()) {
    const SparseOp w = fields.word(t.word.letters);
    if (t.coeff.is_constant()) out += t.coeff(std::vector<double>(fields.grid().dim(), 0.0)) * w;
    else out += diagonal(sample(fields.grid(), t.coeff)) * w;
  }
  return {out, p.order()};
}

inline DiscreteOp identity_op(const Grid& grid) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  SparseOp m(N, N);
  m.setIdentity();
  return {m, 0};
}

/// -Delta_h for the Rockland operator of the algebra.
inline DiscreteOp minus_laplacian(const FieldSet& fields) {
  auto lap = build_operator(rockland_laplacian(fields.algebra()), fields);
  return {SparseOp(-lap.mat), lap.order};
}

}  // namespace hypo
