#pragma once

// Functional calculus for L = -Delta_h (Hermitian, nonnegative). When L
// commutes with cyclic shifts along the last axis it is block-diagonalized by
// a DFT along that axis and each block is diagonalized densely; otherwise the
// whole matrix is diagonalized.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <vector>

#include "hypo/lattice.hpp"

namespace hypo {

struct SpectralOptions {
  bool force_dense = false;
  /// Largest matrix diagonalized without the block structure.
  std::size_t dense_limit = 6000;
};

namespace spectral_detail {

// Cyclic shift by one step along the last axis: (S u)(.., k) = u(.., k - 1).
inline SparseOp last_axis_shift(const Grid& grid) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  const int nt = grid.n.back();
  SparseOp s(N, N);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Eigen::Index k = 0; k < N; ++k) {
    const Eigen::Index base = k - k % nt;
    trip.emplace_back(static_cast<int>(k), static_cast<int>(base + (k % nt + nt - 1) % nt), 1.0);
  }
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

}  // namespace spectral_detail

/// True when A commutes with the cyclic shift along the last axis.
inline bool shift_invariant(const Grid& grid, const SparseOp& a, double tol = 1e-12) {
  if (!grid.periodic.back()) return false;
  const SparseOp s = spectral_detail::last_axis_shift(grid);
  const double nrm = a.norm();
  return SparseOp(a * s - s * a).norm() <= tol * (1.0 + nrm);
}

class SpectralCalculus {
 public:
  /// `minus_lap` is -Delta_h; `v` is the lcm of the generator degrees.
  SpectralCalculus(const Grid& grid, const SparseOp& minus_lap, int v, SpectralOptions opt = {})
      : grid_(grid), v_(v) {
    const auto N = static_cast<Eigen::Index>(grid.size());
    if (minus_lap.rows() != N || minus_lap.cols() != N) throw DomainError("operator does not match the grid");
    blocked_ = !opt.force_dense && grid.dim() > 0 && shift_invariant(grid, minus_lap);
    nt_ = blocked_ ? grid.n.back() : 1;
    m_ = N / nt_;
    if (!blocked_ && grid.size() > opt.dense_limit) throw DomainError("grid too large for the dense spectral fallback");
    const auto blocks = blocks_of(minus_lap);
    for (const auto& b : blocks) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (b + b.adjoint()));
      if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
      lam_.push_back(es.eigenvalues().cwiseMax(0.0));
      vec_.push_back(es.eigenvectors());
    }
  }

  const Grid& grid() const { return grid_; }
  bool blocked() const { return blocked_; }
  int v() const { return v_; }
  std::size_t block_count() const { return lam_.size(); }
  const Eigen::VectorXd& block_eigenvalues(std::size_t k) const { return lam_[k]; }

  /// All eigenvalues of -Delta_h.
  std::vector<double> spectrum() const {
    std::vector<double> out;
    for (const auto& l : lam_) out.insert(out.end(), l.data(), l.data() + l.size());
    return out;
  }

  /// Grid function of the i-th eigenvector of block k.
  GridFunction eigenvector(std::size_t k, Eigen::Index i) const {
    std::vector<Eigen::VectorXcd> coeff(lam_.size(), Eigen::VectorXcd::Zero(m_));
    coeff[k][i] = 1.0;
    GridFunction u = synthesize(coeff);
    return u / u.norm();
  }

  /// Coordinates of u in the eigenbasis, block by block, scaled so that
  /// sum_k |c_k|^2 = |u|^2.
  std::vector<Eigen::VectorXcd> analyze(const GridFunction& u) const {
    const auto w = dft(u, -1.0);
    std::vector<Eigen::VectorXcd> out;
    const double scale = 1.0 / std::sqrt(static_cast<double>(nt_));
    for (std::size_t k = 0; k < lam_.size(); ++k) out.push_back(scale * (vec_[k].adjoint() * w[k]));
    return out;
  }

  GridFunction synthesize(const std::vector<Eigen::VectorXcd>& coeff) const {
    std::vector<Eigen::VectorXcd> w;
    const double scale = 1.0 / std::sqrt(static_cast<double>(nt_));
    for (std::size_t k = 0; k < lam_.size(); ++k) w.push_back(scale * (vec_[k] * coeff[k]));
    return idft(w);
  }

  /// f(-Delta_h) u for f evaluated on eigenvalues mu.
  template <class F>
  GridFunction apply(const GridFunction& u, F&& f) const {
    auto c = analyze(u);
    for (std::size_t k = 0; k < c.size(); ++k)
      for (Eigen::Index i = 0; i < c[k].size(); ++i) c[k][i] *= f(lam_[k][i]);
    return synthesize(c);
  }

  /// (1 - Delta_h)^a u.
  GridFunction power(const GridFunction& u, double a) const {
    return apply(u, [a](double mu) { return std::pow(1.0 + mu, a); });
  }

  /// ||(1 - Delta_h)^{s/2v} u|| with the Haar weight.
  double sobolev_norm(const GridFunction& u, double s) const {
    const auto c = analyze(u);
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      for (Eigen::Index i = 0; i < c[k].size(); ++i)
        acc += std::pow(1.0 + lam_[k][i], s / v_) * std::norm(c[k][i]);
    return std::sqrt(acc * grid_.cell_volume());
  }

  /// min over blocks of sigma_min((1-Delta)^{a/2v} (P + i c) (1-Delta)^{-b/2v});
  /// requires P to share the block structure.
  double sigma_min(const SparseOp& p, double c, double a, double b) const {
    if (blocked_ && !shift_invariant(grid_, p)) throw DomainError("operator is not invariant along the block axis");
    const auto blocks = blocks_of(p);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Eigen::VectorXd l = lam_[k].array() + 1.0;
      Eigen::MatrixXcd m = vec_[k].adjoint() * blocks[k] * vec_[k];
      m.diagonal().array() += cplx(0.0, c);
      for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) *= std::pow(l[i], a / (2.0 * v_));
      for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) *= std::pow(l[j], -b / (2.0 * v_));
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
      best = std::min(best, svd.singularValues().minCoeff());
    }
    return best;
  }

 private:
  // Dense blocks B_k[i, j] = sum_r A[(i, r), (j, 0)] e^{-2 pi i k r / nt}.
  std::vector<Eigen::MatrixXcd> blocks_of(const SparseOp& a) const {
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(nt_), Eigen::MatrixXcd::Zero(m_, m_));
    if (!blocked_) {
      out[0] = Eigen::MatrixXcd(a);
      return out;
    }
    for (Eigen::Index j = 0; j < m_; ++j) {
      for (SparseOp::InnerIterator it(a, j * nt_); it; ++it) {
        const Eigen::Index i = it.row() / nt_, r = it.row() % nt_;
        for (int k = 0; k < nt_; ++k)
          out[static_cast<std::size_t>(k)](i, j) += it.value() * phase(-1.0, k, r);
      }
    }
    return out;
  }

  cplx phase(double sign, Eigen::Index k, Eigen::Index r) const {
    const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>((k * r) % nt_) / nt_;
    return {std::cos(ang), std::sin(ang)};
  }

  // w_k(i) = sum_r u(i, r) e^{sign 2 pi i k r / nt}.
  std::vector<Eigen::VectorXcd> dft(const GridFunction& u, double sign) const {
    std::vector<Eigen::VectorXcd> w(static_cast<std::size_t>(nt_), Eigen::VectorXcd::Zero(m_));
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index r = 0; r < nt_; ++r) {
        const cplx x = u[i * nt_ + r];
        if (x == cplx(0.0)) continue;
        for (Eigen::Index k = 0; k < nt_; ++k) w[static_cast<std::size_t>(k)][i] += x * phase(sign, k, r);
      }
    return w;
  }

  GridFunction idft(const std::vector<Eigen::VectorXcd>& w) const {
    GridFunction u = GridFunction::Zero(m_ * nt_);
    for (Eigen::Index k = 0; k < nt_; ++k)
      for (Eigen::Index i = 0; i < m_; ++i) {
        const cplx x = w[static_cast<std::size_t>(k)][i];
        if (x == cplx(0.0)) continue;
        for (Eigen::Index r = 0; r < nt_; ++r) u[i * nt_ + r] += x * phase(1.0, k, r);
      }
    return u;
  }

  Grid grid_;
  int v_;
  bool blocked_ = false;
  Eigen::Index nt_ = 1, m_ = 0;
  std::vector<Eigen::VectorXd> lam_;
  std::vector<Eigen::MatrixXcd> vec_;
};

}  // namespace hypo
