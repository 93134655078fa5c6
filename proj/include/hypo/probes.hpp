#pragma once

// Empirical estimates on a grid: forward and backward Sobolev bounds for
// P + ic, localization through a partition of unity, interpolation, resolvent
// solves and the group/representation positivity comparison.

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hypo/covering.hpp"
#include "hypo/lattice.hpp"
#include "hypo/repr.hpp"
#include "hypo/spectral.hpp"

namespace hypo {

/// Grid, fields, -Delta_h and its spectral calculus, built once.
class LatticeContext {
 public:
  LatticeContext(AlgebraHandle alg, Grid grid, SpectralOptions opt = {})
      : fields_(std::move(alg), std::move(grid)),
        lap_(minus_laplacian(fields_)),
        spec_(fields_.grid(), lap_.mat, fields_.algebra()->generator_lcm(), opt) {}

  const AlgebraHandle& algebra() const { return fields_.algebra(); }
  const Grid& grid() const { return fields_.grid(); }
  const FieldSet& fields() const { return fields_; }
  const DiscreteOp& minus_lap() const { return lap_; }
  const SpectralCalculus& spectral() const { return spec_; }

  DiscreteOp discretize(const DiffOp& p) const { return build_operator(p, fields_); }
  DiscreteOp discretize(const UEAElement& a) const { return build_operator(a, fields_); }

  /// (sum of ||X^w u||^2 over generator words of weighted length <= s)^{1/2};
  /// s must be a nonnegative multiple of 2v.
  double integer_sobolev_norm(const GridFunction& u, double s) const {
    const auto& alg = *algebra();
    const int step = 2 * alg.generator_lcm();
    if (s < 0 || s != std::floor(s) || static_cast<int>(s) % step != 0)
      throw DomainError("integer Sobolev norm needs s in 2v Z_+");
    const int order = static_cast<int>(s);
    // Words grouped by weighted length.
    std::vector<std::vector<GridFunction>> by_len(static_cast<std::size_t>(order) + 1);
    by_len[0].push_back(u);
    double acc = std::norm(l2_norm(grid(), u));
    for (int len = 0; len < order; ++len)
      for (const auto& w : by_len[static_cast<std::size_t>(len)])
        for (int g : alg.generators()) {
          const int next = len + alg.degree(static_cast<std::size_t>(g));
          if (next > order) continue;
          by_len[static_cast<std::size_t>(next)].push_back(fields_[static_cast<std::size_t>(g)] * w);
          acc += std::norm(l2_norm(grid(), by_len[static_cast<std::size_t>(next)].back()));
        }
    return std::sqrt(acc);
  }

 private:
  FieldSet fields_;
  DiscreteOp lap_;
  SpectralCalculus spec_;
};

/// Product of one-dimensional bumps exp(-1/(1 - z^2)), times amp and a phase
/// e^{i freq x_last}.
struct BumpSpec {
  std::vector<double> center, radius;
  cplx amp{1.0, 0.0};
  double freq = 0.0;

  cplx operator()(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < center.size(); ++i) {
      const double z = (x[i] - center[i]) / radius[i];
      if (std::abs(z) >= 1.0) return 0.0;
      v *= std::exp(1.0 - 1.0 / (1.0 - z * z));
    }
    return amp * v * std::polar(1.0, freq * x.back());
  }
};

struct TestFunction {
  std::vector<BumpSpec> parts;

  cplx operator()(std::span<const double> x) const {
    cplx s = 0.0;
    for (const auto& p : parts) s += p(x);
    return s;
  }
  GridFunction sample(const Grid& grid) const {
    return sample_fn(grid, [this](const std::vector<double>& x) { return (*this)(x); });
  }
};

struct TestSetOptions {
  std::size_t count = 24;
  std::uint64_t seed = 0;
  double min_radius = 1.5, max_radius = 2.5;
  int max_parts = 3;
  /// Modulation frequencies are drawn from {-max_freq, .., max_freq}.
  int max_freq = 0;
  bool complex_amplitudes = true;
};

/// Seeded bump combinations supported inside `region`.
inline std::vector<TestFunction> make_test_set(std::span<const Interval> region, const TestSetOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> parts(1, std::max(1, opt.max_parts));
  std::uniform_int_distribution<int> freq(-opt.max_freq, opt.max_freq);
  std::vector<TestFunction> out;
  for (std::size_t n = 0; n < opt.count; ++n) {
    TestFunction f;
    const int np = parts(rng);
    for (int p = 0; p < np; ++p) {
      BumpSpec b;
      for (const auto& iv : region) {
        const double half = 0.5 * (iv.hi - iv.lo);
        const double r = std::min(opt.min_radius + (opt.max_radius - opt.min_radius) * unit(rng), half);
        b.radius.push_back(r);
        b.center.push_back(iv.lo + r + (iv.hi - iv.lo - 2 * r) * unit(rng));
      }
      b.amp = opt.complex_amplitudes ? std::polar(0.5 + unit(rng), 2 * std::numbers::pi * unit(rng))
                                     : cplx(0.5 + unit(rng), 0.0);
      b.freq = freq(rng);
      f.parts.push_back(std::move(b));
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Box shrunk by `margin` on each side.
inline std::vector<Interval> interior_region(const Grid& grid, double margin) {
  std::vector<Interval> r;
  for (std::size_t i = 0; i < grid.dim(); ++i) r.push_back({grid.lo[i] + margin, grid.hi[i] - grid.spacing(i) - margin});
  return r;
}

enum class ProbeMode { Forward, Backward, Localization };

inline std::string to_string(ProbeMode m) {
  switch (m) {
    case ProbeMode::Forward: return "forward";
    case ProbeMode::Backward: return "backward";
    case ProbeMode::Localization: return "localization";
  }
  return "?";
}

struct ProbeRow {
  ProbeMode mode = ProbeMode::Forward;
  double s = 0.0, c = 0.0;
  std::string grid;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::size_t argmin = 0, argmax = 0;
  /// Grid-level sigma_min, when the operator shares the block structure.
  std::optional<double> sigma_min;
  /// ||P_h - P_h^*|| / ||P_h|| before symmetrization.
  double hermitian_defect = 0.0;

  void record(double r, std::size_t k) {
    if (r < min_ratio) min_ratio = r, argmin = k;
    if (r > max_ratio) max_ratio = r, argmax = k;
  }
  /// Two-sided equivalence constant.
  double constant() const { return std::max(max_ratio, 1.0 / min_ratio); }
};

namespace probes_detail {

inline double norm_s(const LatticeContext& ctx, const GridFunction& u, double s) {
  return s == 0.0 ? l2_norm(ctx.grid(), u) : ctx.spectral().sobolev_norm(u, s);
}

inline SparseOp shifted(const DiscreteOp& p, double c) {
  SparseOp id(p.mat.rows(), p.mat.cols());
  id.setIdentity();
  return SparseOp(p.mat + cplx(0.0, c) * id);
}

}  // namespace probes_detail

/// Forward: ||(P+ic)u||_{W^s} / ||u||_{W^{s+m}}.
/// Backward: ||(P+ic)u||_{W^{s-m}} / ||u||_{W^s}.
/// P_h is symmetrized first; the defect is recorded in the row.
inline ProbeRow estimate_probe(const LatticeContext& ctx, const DiscreteOp& p, ProbeMode mode, double s, double c,
                               std::span<const TestFunction> tests) {
  if (mode == ProbeMode::Localization) throw DomainError("use estimate_localization for the localization mode");
  ProbeRow row{mode, s, c, ctx.grid().describe()};
  row.hermitian_defect = p.hermitian_defect();
  const auto ps = p.symmetrized();
  const SparseOp a = probes_detail::shifted(ps, c);
  const double m = p.order;
  const double s_out = mode == ProbeMode::Forward ? s : s - m;
  const double s_in = mode == ProbeMode::Forward ? s + m : s;
  for (std::size_t k = 0; k < tests.size(); ++k) {
    const GridFunction u = tests[k].sample(ctx.grid());
    const double den = probes_detail::norm_s(ctx, u, s_in);
    if (den == 0.0) continue;
    row.record(probes_detail::norm_s(ctx, GridFunction(a * u), s_out) / den, k);
  }
  if (shift_invariant(ctx.grid(), ps.mat) && ctx.spectral().blocked())
    row.sigma_min = ctx.spectral().sigma_min(ps.mat, c, s_out, s_in);
  return row;
}

struct ThresholdScan {
  std::vector<double> c_values;
  std::vector<double> min_ratio;
  /// Smallest scanned c from which every larger scanned c has min_ratio >=
  /// floor; empty if none.
  std::optional<double> smallest_admissible;
};

/// Forward probes over c = c_min * ratio^k. The result is an empirical
/// threshold for this test set and grid only.
inline ThresholdScan scan_threshold(const LatticeContext& ctx, const DiscreteOp& p, double s,
                                    std::span<const TestFunction> tests, double c_min, double c_max, int steps,
                                    double floor) {
  if (!(c_min > 0) || !(c_max >= c_min) || steps < 1) throw DomainError("invalid scan range");
  ThresholdScan out;
  for (int k = 0; k <= steps; ++k) {
    const double c = c_min * std::pow(c_max / c_min, static_cast<double>(k) / steps);
    out.c_values.push_back(c);
    out.min_ratio.push_back(estimate_probe(ctx, p, ProbeMode::Forward, s, c, tests).min_ratio);
  }
  for (std::size_t k = out.c_values.size(); k-- > 0;) {
    if (out.min_ratio[k] < floor) break;
    out.smallest_admissible = out.c_values[k];
  }
  return out;
}

/// psi_n on the grid, stored per center as (grid index, value).
class GridPartition {
 public:
  GridPartition(const PartitionOfUnity& pou, const Grid& grid) : per_center_(pou.centers().size()) {
    at_point_.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const GroupElement g(grid.point(k));
      if (!pou.covered(g)) continue;
      covered_.push_back(k);
      for (const auto& [id, v] : pou.values(g)) {
        per_center_[static_cast<std::size_t>(id)].emplace_back(k, v);
        at_point_[k].push_back(id);
      }
    }
    is_covered_.assign(grid.size(), false);
    for (auto k : covered_) is_covered_[k] = true;
  }

  std::size_t centers() const { return per_center_.size(); }
  const std::vector<std::pair<std::size_t, double>>& psi(std::size_t n) const { return per_center_[n]; }
  bool covered(std::size_t k) const { return is_covered_[k]; }

  /// Centers whose psi_n is nonzero somewhere on the support of u.
  std::vector<int> touching(const GridFunction& u) const {
    std::vector<char> hit(per_center_.size(), 0);
    for (std::size_t k = 0; k < at_point_.size(); ++k)
      if (u[static_cast<Eigen::Index>(k)] != cplx(0.0)) {
        if (!is_covered_[k]) throw DomainError("test function is supported outside the covered region");
        for (int id : at_point_[k]) hit[static_cast<std::size_t>(id)] = 1;
      }
    std::vector<int> out;
    for (std::size_t n = 0; n < hit.size(); ++n)
      if (hit[n]) out.push_back(static_cast<int>(n));
    return out;
  }

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> per_center_;
  std::vector<std::vector<int>> at_point_;
  std::vector<std::size_t> covered_;
  std::vector<bool> is_covered_;
};

/// Net over the grid box with every grid point offered as a candidate, so the
/// whole grid is covered.
inline PartitionOfUnity grid_partition(const LatticeContext& ctx, double eps, int N = 2, std::uint64_t seed = 0) {
  const auto& grid = ctx.grid();
  std::vector<Interval> box;
  for (std::size_t i = 0; i < grid.dim(); ++i) box.push_back({grid.lo[i], grid.hi[i] - grid.spacing(i)});
  NetOptions opt;
  opt.seed = seed;
  for (std::size_t k = 0; k < grid.size(); ++k) opt.extra_candidates.emplace_back(grid.point(k));
  return build_partition(greedy_net(ctx.algebra(), box, eps, opt), N);
}

/// (sum_n ||psi_n u||_{W^s}^2)^{1/2} / ||u||_{W^s}.
inline ProbeRow estimate_localization(const LatticeContext& ctx, const GridPartition& part, double s,
                                      std::span<const TestFunction> tests) {
  ProbeRow row{ProbeMode::Localization, s, 0.0, ctx.grid().describe()};
  for (std::size_t k = 0; k < tests.size(); ++k) {
    const GridFunction u = tests[k].sample(ctx.grid());
    const double den = probes_detail::norm_s(ctx, u, s);
    if (den == 0.0) continue;
    double acc = 0.0;
    for (int n : part.touching(u)) {
      GridFunction piece = GridFunction::Zero(u.size());
      for (const auto& [idx, v] : part.psi(static_cast<std::size_t>(n))) {
        const auto i = static_cast<Eigen::Index>(idx);
        piece[i] = v * u[i];
      }
      acc += std::pow(probes_detail::norm_s(ctx, piece, s), 2);
    }
    row.record(std::sqrt(acc) / den, k);
  }
  return row;
}

struct InterpolationResult {
  double lhs = 0.0, rhs = 0.0;
  bool holds = false;
};

/// ||u||_{W^{(1-t)s0 + t s1}} <= ||u||_{W^{s0}}^{1-t} ||u||_{W^{s1}}^t.
inline InterpolationResult interpolation_check(const SpectralCalculus& sc, const GridFunction& u, double s0,
                                               double s1, double t) {
  if (t < 0.0 || t > 1.0) throw DomainError("interpolation parameter must lie in [0, 1]");
  InterpolationResult r;
  r.lhs = sc.sobolev_norm(u, (1 - t) * s0 + t * s1);
  r.rhs = std::pow(sc.sobolev_norm(u, s0), 1 - t) * std::pow(sc.sobolev_norm(u, s1), t);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

struct ResolventResult {
  GridFunction x;
  /// ||x||_{W^m} / ||b||_{L2}.
  double ratio = 0.0;
  double residual = 0.0;
};

/// Solves (P_h + ic) x = b.
inline ResolventResult resolvent_probe(const LatticeContext& ctx, const DiscreteOp& p, double c, const GridFunction& b) {
  ResolventResult r;
  const double nb = l2_norm(ctx.grid(), b);
  if (nb == 0.0) {
    r.x = GridFunction::Zero(b.size());
    return r;
  }
  SparseOp a = probes_detail::shifted(p, c);
  a.makeCompressed();
  Eigen::SparseLU<SparseOp> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw DomainError("resolvent factorization failed");
  r.x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw DomainError("resolvent solve failed");
  r.residual = (a * r.x - b).norm() / b.norm();
  r.ratio = probes_detail::norm_s(ctx, r.x, p.order) / nb;
  return r;
}

/// |<P_h u, w> - <u, (P^dagger)_h w>| for the formal adjoint.
inline double adjoint_consistency(const FieldSet& fields, const DiffOp& p, const GridFunction& u,
                                  const GridFunction& w) {
  const auto ph = build_operator(p, fields), qh = build_operator(formal_adjoint(p), fields);
  const auto& g = fields.grid();
  return std::abs(inner(g, GridFunction(ph.mat * u), w) - inner(g, u, GridFunction(qh.mat * w)));
}

struct PositivityReport {
  double group_side_min = 0.0;
  double rep_side_min = 0.0;
  bool group_side_positive = false, rep_side_positive = false;
  /// False only when the group side looks positive but a representation has a
  /// negative eigenvalue.
  bool consistent = true;
  std::size_t test_functions = 0;
  int level_cutoff = 0;
};

/// Compares min Re<u, D_h u>/||u||^2 over test functions with the smallest
/// eigenvalue of the Hermitian part of pi_pm(D) on the first N levels.
inline PositivityReport positivity_transfer_check(const UEAElement& d, int N, const LatticeContext& ctx,
                                                  std::span<const TestFunction> tests, double tol = 1e-8) {
  if (!d.approx_equal(adjoint_const(d), 1e-12)) throw DomainError("operator is not formally symmetric");
  require_heisenberg(*d.algebra());
  PositivityReport r;
  r.test_functions = tests.size();
  r.level_cutoff = N;
  const auto dh = ctx.discretize(d);
  r.group_side_min = std::numeric_limits<double>::infinity();
  for (const auto& f : tests) {
    const GridFunction u = f.sample(ctx.grid());
    const double nu = std::norm(l2_norm(ctx.grid(), u));
    if (nu == 0.0) continue;
    r.group_side_min = std::min(r.group_side_min, inner(ctx.grid(), GridFunction(dh.mat * u), u).real() / nu);
  }
  r.rep_side_min = std::numeric_limits<double>::infinity();
  for (auto sign : {RepSign::Plus, RepSign::Minus}) {
    const Eigen::MatrixXcd a = rep_matrix(d, sign, N).entries;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    r.rep_side_min = std::min(r.rep_side_min, es.eigenvalues().minCoeff());
  }
  r.group_side_positive = r.group_side_min >= -tol;
  r.rep_side_positive = r.rep_side_min >= -tol;
  r.consistent = !(r.group_side_positive && !r.rep_side_positive);
  return r;
}

}  // namespace hypo
