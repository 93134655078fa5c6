#pragma once

// Homogeneous norm, right-invariant distance, greedy epsilon-nets and the
// partition of unity psi_n(g) = psi(g g_n^{-1}) / theta(g)^{1/2} with
// theta = sum_k psi(g g_k^{-1})^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/expr.hpp"
#include "hypo/lie_core.hpp"

namespace hypo {

/// M = 2 lcm(1..s); every M/j is even so |g|^M is a polynomial.
inline int norm_exponent(const GradedLieAlgebra& alg) {
  int l = 1;
  for (int j = 1; j <= alg.step(); ++j) l = std::lcm(l, j);
  return 2 * l;
}

/// |g|^M = sum_j ||g_j||^{M/j} over the degree-j coordinate blocks.
inline double homogeneous_norm_power(const GradedLieAlgebra& alg, std::span<const double> g) {
  const int M = norm_exponent(alg);
  std::vector<double> block(static_cast<std::size_t>(alg.step()) + 1, 0.0);
  for (std::size_t i = 0; i < alg.dim(); ++i) block[alg.degree(i)] += g[i] * g[i];
  double s = 0.0;
  for (int j = 1; j <= alg.step(); ++j) {
    // ||g_j||^{M/j} = (||g_j||^2)^{M/(2j)}, an integer power.
    const int k = M / (2 * j);
    double p = 1.0;
    for (int r = 0; r < k; ++r) p *= block[j];
    s += p;
  }
  return s;
}

inline double homogeneous_norm(const GradedLieAlgebra& alg, std::span<const double> g) {
  return std::pow(homogeneous_norm_power(alg, g), 1.0 / norm_exponent(alg));
}

inline double homogeneous_norm(const GradedLieAlgebra& alg, const GroupElement& g) {
  return homogeneous_norm(alg, g.coords);
}

/// dist(g1, g2) = |g1 g2^{-1}|, invariant under right translations.
inline double distance(const GradedLieAlgebra& alg, const GroupElement& g1, const GroupElement& g2) {
  return homogeneous_norm(alg, bch_multiply(alg, g1, g2.inverse()));
}

namespace covering_detail {

// Buckets points by their degree-1 coordinates. The degree-1 block of
// g1 g2^{-1} is the difference of the blocks, so its Euclidean norm is a
// lower bound for dist(g1, g2).
class HorizontalIndex {
 public:
  HorizontalIndex(const GradedLieAlgebra& alg, double cell) : cell_(cell) {
    for (std::size_t i = 0; i < alg.dim(); ++i)
      if (alg.degree(i) == 1) axes_.push_back(i);
  }

  void insert(int id, const GroupElement& g) { cells_[key(g)].push_back(id); }

  /// Ids whose horizontal distance to g may be below r.
  template <class F>
  void for_each_near(const GroupElement& g, double r, F&& f) const {
    const auto base = key(g);
    const int reach = static_cast<int>(std::ceil(r / cell_));
    std::vector<int> offset(axes_.size(), -reach);
    while (true) {
      auto k = base;
      for (std::size_t a = 0; a < k.size(); ++a) k[a] += offset[a];
      if (auto it = cells_.find(k); it != cells_.end())
        for (int id : it->second) f(id);
      std::size_t a = 0;
      while (a < offset.size() && ++offset[a] > reach) offset[a++] = -reach;
      if (a == offset.size()) break;
    }
  }

 private:
  std::vector<int> key(const GroupElement& g) const {
    std::vector<int> k;
    for (std::size_t i : axes_) k.push_back(static_cast<int>(std::floor(g[i] / cell_)));
    return k;
  }

  double cell_;
  std::vector<std::size_t> axes_;
  std::map<std::vector<int>, std::vector<int>> cells_;
};

inline double horizontal_gap(const GradedLieAlgebra& alg, const GroupElement& a, const GroupElement& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < alg.dim(); ++i)
    if (alg.degree(i) == 1) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace covering_detail

struct NetOptions {
  std::uint64_t seed = 0;
  /// Refuse to build more lattice candidates than this.
  std::size_t candidate_budget = 2'000'000;
  /// Random completion: batches of this size are drawn until `clean_batches`
  /// consecutive batches contain no uncovered point.
  std::size_t completion_batch = 20'000;
  int clean_batches = 2;
  int max_completion_rounds = 200;
  /// Points that must be covered exactly (for example grid points).
  std::vector<GroupElement> extra_candidates;
};

/// A maximal epsilon-separated set: centers are pairwise at distance >= eps,
/// equivalently the balls B(g_n, eps/2) are disjoint.
class EpsilonNet {
 public:
  EpsilonNet(AlgebraHandle alg, double eps)
      : alg_(std::move(alg)), eps_(eps), index_(*alg_, eps) {
    if (!(eps > 0)) throw DomainError("epsilon must be positive");
  }

  const AlgebraHandle& algebra() const { return alg_; }
  double eps() const { return eps_; }
  const std::vector<GroupElement>& centers() const { return centers_; }
  std::size_t size() const { return centers_.size(); }

  /// Distance to the nearest center, or +inf when none is within `radius`.
  double nearest(const GroupElement& g, double radius) const {
    double best = std::numeric_limits<double>::infinity();
    index_.for_each_near(g, radius, [&](int id) {
      if (covering_detail::horizontal_gap(*alg_, g, centers_[id]) >= std::min(best, radius)) return;
      best = std::min(best, distance(*alg_, g, centers_[id]));
    });
    return best;
  }

  bool covers(const GroupElement& g) const { return nearest(g, eps_) < eps_; }

  /// Adds g when it is at distance >= eps from every center.
  bool offer(const GroupElement& g) {
    if (covers(g)) return false;
    index_.insert(static_cast<int>(centers_.size()), g);
    centers_.push_back(g);
    return true;
  }

  /// Centers at distance < r from g (including g itself if it is a center).
  std::vector<int> within(const GroupElement& g, double r) const {
    std::vector<int> out;
    index_.for_each_near(g, r, [&](int id) {
      if (covering_detail::horizontal_gap(*alg_, g, centers_[id]) >= r) return;
      if (distance(*alg_, g, centers_[id]) < r) out.push_back(id);
    });
    return out;
  }

  /// max over n of #{m : dist(g_n, g_m) < 2 N eps}, i.e. the number of balls
  /// B(g_m, N eps) meeting B(g_n, N eps), counting the ball itself.
  std::size_t max_overlap(int N) const {
    std::size_t best = 0;
    for (const auto& c : centers_) best = std::max(best, within(c, 2.0 * N * eps_).size());
    return best;
  }

  int completion_rounds = 0;
  std::size_t lattice_candidates = 0;

 private:
  AlgebraHandle alg_;
  double eps_;
  covering_detail::HorizontalIndex index_;
  std::vector<GroupElement> centers_;
};

inline GroupElement sample_box(std::span<const Interval> box, std::mt19937_64& rng) {
  std::vector<double> x(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) x[i] = std::uniform_real_distribution<double>(box[i].lo, box[i].hi)(rng);
  return GroupElement(std::move(x));
}

/// Greedy maximal eps-separated set over a shuffled homogeneous lattice
/// delta_{eps/4} Z^d inside the box, then the extra candidates, then random
/// completion batches.
inline EpsilonNet greedy_net(const AlgebraHandle& alg, std::span<const Interval> box, double eps,
                             const NetOptions& opt = {}) {
  if (box.size() != alg->dim()) throw DomainError("region has the wrong dimension");
  for (const auto& b : box)
    if (!(b.hi >= b.lo) || !b.bounded()) throw DomainError("region must be a bounded box");
  EpsilonNet net(alg, eps);

  std::vector<std::size_t> counts(alg->dim());
  std::vector<double> pitch(alg->dim());
  double total = 1.0;
  for (std::size_t i = 0; i < alg->dim(); ++i) {
    pitch[i] = std::pow(eps / 4.0, alg->degree(i));
    counts[i] = static_cast<std::size_t>(std::floor((box[i].hi - box[i].lo) / pitch[i] + 1e-9)) + 1;
    total *= static_cast<double>(counts[i]);
  }
  if (total > static_cast<double>(opt.candidate_budget))
    throw DomainError("epsilon too small: candidate lattice exceeds the budget");

  std::vector<GroupElement> cand;
  cand.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(alg->dim(), 0);
  while (true) {
    std::vector<double> x(alg->dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = box[i].lo + pitch[i] * static_cast<double>(idx[i]);
    cand.emplace_back(std::move(x));
    std::size_t a = 0;
    while (a < idx.size() && ++idx[a] >= counts[a]) idx[a++] = 0;
    if (a == idx.size()) break;
  }
  std::mt19937_64 rng(opt.seed);
  std::shuffle(cand.begin(), cand.end(), rng);
  net.lattice_candidates = cand.size();
  for (const auto& c : cand) net.offer(c);
  for (const auto& c : opt.extra_candidates) net.offer(c);

  int clean = 0;
  for (int round = 0; round < opt.max_completion_rounds && clean < opt.clean_batches; ++round) {
    bool added = false;
    for (std::size_t k = 0; k < opt.completion_batch; ++k) added |= net.offer(sample_box(box, rng));
    clean = added ? 0 : clean + 1;
    net.completion_rounds = round + 1;
  }
  return net;
}

/// psi(h) = 1 - S((|h|^M - eps^M) / ((N eps)^M - eps^M)) with the smooth step
/// S(x) = e(x) / (e(x) + e(1 - x)), e(x) = exp(-1/x) for x > 0.
struct Bump {
  double eps = 1.0;
  int N = 2;

  static double smooth_step(double x) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
  }

  double operator()(const GradedLieAlgebra& alg, std::span<const double> h) const {
    const int M = norm_exponent(alg);
    const double r = homogeneous_norm_power(alg, h);
    const double lo = std::pow(eps, M), hi = std::pow(N * eps, M);
    return 1.0 - smooth_step((r - lo) / (hi - lo));
  }
};

/// psi_n = psi(g g_n^{-1}) / sqrt(theta) over an epsilon-net.
class PartitionOfUnity {
 public:
  PartitionOfUnity(EpsilonNet net, int N = 2) : net_(std::move(net)), bump_{net_.eps(), N} {
    if (N < 2) throw DomainError("support radius factor N must be at least 2");
  }

  const EpsilonNet& net() const { return net_; }
  const AlgebraHandle& algebra() const { return net_.algebra(); }
  const std::vector<GroupElement>& centers() const { return net_.centers(); }
  double eps() const { return net_.eps(); }
  int N() const { return bump_.N; }
  const Bump& bump() const { return bump_; }

  bool covered(const GroupElement& g) const { return net_.covers(g); }

  /// (n, psi(g g_n^{-1})) for every center whose bump is nonzero at g.
  std::vector<std::pair<int, double>> raw(const GroupElement& g) const {
    std::vector<std::pair<int, double>> out;
    const auto& alg = *algebra();
    for (int id : net_.within(g, bump_.N * eps())) {
      const auto h = bch_multiply(alg, g, centers()[id].inverse());
      const double v = bump_(alg, h.coords);
      if (v > 0) out.emplace_back(id, v);
    }
    return out;
  }

  /// theta(g) = sum_k psi(g g_k^{-1})^2.
  double theta(const GroupElement& g) const {
    double s = 0.0;
    for (const auto& [id, v] : raw(g)) s += v * v;
    return s;
  }

  /// Nonzero values psi_n(g). Throws outside the covered region.
  std::vector<std::pair<int, double>> values(const GroupElement& g) const {
    if (!covered(g)) throw DomainError("partition evaluated outside the covered region");
    auto r = raw(g);
    double th = 0.0;
    for (const auto& [id, v] : r) th += v * v;
    const double inv = 1.0 / std::sqrt(th);
    for (auto& [id, v] : r) v *= inv;
    return r;
  }

  double psi(int n, const GroupElement& g) const {
    for (const auto& [id, v] : values(g))
      if (id == n) return v;
    return 0.0;
  }

 private:
  EpsilonNet net_;
  Bump bump_;
};

inline PartitionOfUnity build_partition(EpsilonNet net, int N = 2) { return PartitionOfUnity(std::move(net), N); }

struct PartitionStats {
  std::size_t samples = 0;
  std::size_t uncovered = 0;
  double max_identity_error = 0.0;  // max |sum psi_n^2 - 1|
  double theta_min = std::numeric_limits<double>::infinity();
  double theta_max = 0.0;
  double theta_bound = 0.0;  // (4N+1)^{d_hom}
  std::size_t max_overlap = 0;
  double overlap_bound = 0.0;
  std::size_t max_active = 0;  // most nonzero psi_n at one point
};

/// Checks coverage, sum psi_n^2 = 1 and 1 <= theta <= (4N+1)^{d_hom} on an
/// independent sample of the box.
inline PartitionStats verify_partition(const PartitionOfUnity& pou, std::span<const Interval> box,
                                       std::size_t samples, std::uint64_t seed) {
  PartitionStats st;
  const auto& alg = *pou.algebra();
  st.samples = samples;
  st.theta_bound = std::pow(4.0 * pou.N() + 1.0, homogeneous_dimension(alg));
  st.overlap_bound = st.theta_bound;
  st.max_overlap = pou.net().max_overlap(pou.N());
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const auto g = sample_box(box, rng);
    if (!pou.covered(g)) {
      ++st.uncovered;
      continue;
    }
    const auto r = pou.raw(g);
    double th = 0.0;
    for (const auto& [id, v] : r) th += v * v;
    st.theta_min = std::min(st.theta_min, th);
    st.theta_max = std::max(st.theta_max, th);
    st.max_active = std::max(st.max_active, r.size());
    double sum = 0.0;
    for (const auto& [id, v] : pou.values(g)) sum += v * v;
    st.max_identity_error = std::max(st.max_identity_error, std::abs(sum - 1.0));
  }
  return st;
}

/// Monte Carlo Haar (Lebesgue) measure of B(0, r). The ball lies in the box
/// |x_i| <= r^{deg i}.
inline double ball_volume(const GradedLieAlgebra& alg, double r, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Interval> box;
  double vol = 1.0;
  for (std::size_t i = 0; i < alg.dim(); ++i) {
    const double a = std::pow(r, alg.degree(i));
    box.push_back({-a, a});
    vol *= 2 * a;
  }
  std::size_t hit = 0;
  for (std::size_t k = 0; k < samples; ++k)
    if (homogeneous_norm(alg, sample_box(box, rng)) < r) ++hit;
  return vol * static_cast<double>(hit) / static_cast<double>(samples);
}

/// For each generator word of length <= 2, the sampled sup over g of
/// sum_n |X^alpha psi_n(g)|^2, by central differences along the flows
/// s -> exp(-s X_j) g. Points whose stencil leaves the covered region are
/// skipped.
struct DerivativeCheck {
  std::vector<std::vector<int>> words;
  std::vector<double> sup_sum_sq;
  std::size_t points_used = 0;
};

inline DerivativeCheck derivative_spot_check(const PartitionOfUnity& pou, std::span<const GroupElement> points,
                                             double h = 1e-3) {
  const auto& alg = *pou.algebra();
  DerivativeCheck out;
  out.words.push_back({});
  for (int a : alg.generators()) out.words.push_back({a});
  for (int a : alg.generators())
    for (int b : alg.generators()) out.words.push_back({a, b});
  out.sup_sum_sq.assign(out.words.size(), 0.0);

  auto shift = [&](const GroupElement& g, int j, double s) {
    std::vector<double> e(alg.dim(), 0.0);
    e[j] = -s;
    return bch_multiply(alg, GroupElement(e), g);
  };
  auto values = [&](const GroupElement& g) {
    std::map<int, double> m;
    for (const auto& [id, v] : pou.values(g)) m[id] = v;
    return m;
  };
  for (const auto& g : points) {
    try {
      std::vector<std::map<int, double>> acc(out.words.size());
      for (std::size_t w = 0; w < out.words.size(); ++w) {
        const auto& word = out.words[w];
        if (word.empty()) {
          acc[w] = values(g);
        } else if (word.size() == 1) {
          for (auto [id, v] : values(shift(g, word[0], h))) acc[w][id] += v / (2 * h);
          for (auto [id, v] : values(shift(g, word[0], -h))) acc[w][id] -= v / (2 * h);
        } else {
          // X_a X_b u: outer difference along a of the inner difference along b.
          for (double sa : {h, -h})
            for (double sb : {h, -h}) {
              const auto p = shift(shift(g, word[0], sa), word[1], sb);
              const double wgt = (sa > 0 ? 1.0 : -1.0) * (sb > 0 ? 1.0 : -1.0) / (4 * h * h);
              for (auto [id, v] : values(p)) acc[w][id] += wgt * v;
            }
        }
      }
      for (std::size_t w = 0; w < acc.size(); ++w) {
        double s = 0.0;
        for (const auto& [id, v] : acc[w]) s += v * v;
        out.sup_sum_sq[w] = std::max(out.sup_sum_sq[w], s);
      }
      ++out.points_used;
    } catch (const DomainError&) {
      // stencil left the covered region
    }
  }
  return out;
}

}  // namespace hypo
