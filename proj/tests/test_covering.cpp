#include <gtest/gtest.h>

#include <random>

#include "hypo/covering.hpp"

using namespace hypo;

namespace {

std::vector<double> random_coords(std::mt19937_64& rng, std::size_t d, double scale = 3.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> x(d);
  for (auto& v : x) v = u(rng);
  return x;
}

std::vector<Interval> cube(std::size_t d, double lo, double hi) { return std::vector<Interval>(d, Interval{lo, hi}); }

}  // namespace

TEST(HomogeneousNorm, HeisenbergFormula) {
  auto h = builtin("heisenberg1");
  EXPECT_EQ(norm_exponent(h), 4);
  EXPECT_EQ(norm_exponent(builtin("engel")), 12);
  EXPECT_DOUBLE_EQ(homogeneous_norm(h, std::vector<double>{1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(homogeneous_norm(h, std::vector<double>{0, 0, 0}), 0.0);
  std::vector<double> g{0.5, -1.5, 2.0};
  const double expect = std::pow(std::pow(0.25 + 2.25, 2) + 4.0, 0.25);
  EXPECT_NEAR(homogeneous_norm(h, g), expect, 1e-15);
}

TEST(HomogeneousNorm, HomogeneityInverseAndRightInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.1, 5.0);
  for (const char* name : {"heisenberg1", "engel", "anisotropic_plane", "abelian(2,(1,1))"}) {
    auto alg = builtin(name);
    for (int n = 0; n < 1000; ++n) {
      GroupElement g(random_coords(rng, alg.dim())), g2(random_coords(rng, alg.dim())), h(random_coords(rng, alg.dim()));
      const double t = ut(rng);
      const double ng = homogeneous_norm(alg, g);
      EXPECT_NEAR(homogeneous_norm(alg, dilate(alg, t, g)), t * ng, 1e-10 * (1 + t * ng)) << name;
      EXPECT_NEAR(homogeneous_norm(alg, g.inverse()), ng, 1e-14);
      const double d = distance(alg, g, g2);
      const double dh = distance(alg, bch_multiply(alg, g, h), bch_multiply(alg, g2, h));
      EXPECT_NEAR(dh, d, 1e-10 * (1 + d)) << name;
    }
  }
}

TEST(GreedyNet, AbelianLineOverlap) {
  auto alg = make_builtin("abelian(1)");
  auto box = cube(1, 0.0, 10.0);
  auto net = greedy_net(alg, box, 2.0, {.seed = 3});
  // Separation.
  for (std::size_t a = 0; a < net.size(); ++a)
    for (std::size_t b = a + 1; b < net.size(); ++b)
      EXPECT_GE(std::abs(net.centers()[a][0] - net.centers()[b][0]), 2.0);
  EXPECT_LE(net.max_overlap(1), 5u);
  for (int k = 0; k <= 1000; ++k) EXPECT_TRUE(net.covers(GroupElement({0.01 * k})));
}

TEST(GreedyNet, SinglePointRegion) {
  auto alg = make_builtin("heisenberg1");
  std::vector<Interval> box{{1, 1}, {2, 2}, {-1, -1}};
  auto net = greedy_net(alg, box, 0.5);
  ASSERT_EQ(net.size(), 1u);
  EXPECT_EQ(net.centers()[0].coords, (std::vector<double>{1, 2, -1}));
  EXPECT_THROW(greedy_net(alg, cube(3, -4, 4), 1e-3), DomainError);
  EXPECT_THROW(greedy_net(alg, cube(3, -4, 4), 0.0), DomainError);
}

TEST(GreedyNet, HeisenbergBoxCoverageAndOverlap) {
  auto alg = make_builtin("heisenberg1");
  auto box = cube(3, -4, 4);
  auto net = greedy_net(alg, box, 1.0, {.seed = 1});
  // Pairwise separation: no other center within eps.
  for (const auto& c : net.centers()) EXPECT_EQ(net.within(c, 1.0).size(), 1u);
  std::mt19937_64 rng(99);
  std::size_t uncovered = 0;
  for (int k = 0; k < 10000; ++k) uncovered += !net.covers(sample_box(box, rng));
  EXPECT_EQ(uncovered, 0u);
  EXPECT_LE(net.max_overlap(1), 625u);
  EXPECT_LE(net.max_overlap(2), 6561u);
}

TEST(Partition, IdentityAndThetaBounds) {
  auto alg = make_builtin("heisenberg1");
  auto box = cube(3, -4, 4);
  auto pou = build_partition(greedy_net(alg, box, 1.0, {.seed = 1}), 2);
  auto st = verify_partition(pou, box, 10000, 5);
  EXPECT_EQ(st.uncovered, 0u);
  EXPECT_LT(st.max_identity_error, 1e-10);
  EXPECT_GE(st.theta_min, 1.0);
  EXPECT_LE(st.theta_max, st.theta_bound);
  EXPECT_DOUBLE_EQ(st.theta_bound, std::pow(9.0, 4));
}

TEST(Partition, SupportAndFlatTop) {
  auto alg = make_builtin("heisenberg1");
  auto box = cube(3, -2, 2);
  auto pou = build_partition(greedy_net(alg, box, 1.0, {.seed = 2}), 2);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 2000; ++k) {
    const auto g = sample_box(box, rng);
    for (std::size_t n = 0; n < pou.centers().size(); ++n) {
      const double d = distance(*alg, g, pou.centers()[n]);
      const auto h = bch_multiply(*alg, g, pou.centers()[n].inverse());
      const double b = pou.bump()(*alg, h.coords);
      if (d >= 2.0) EXPECT_EQ(b, 0.0);
      if (d <= 1.0) EXPECT_EQ(b, 1.0);
    }
  }
  EXPECT_THROW(pou.values(GroupElement({40, 0, 0})), DomainError);
  EXPECT_THROW(build_partition(greedy_net(alg, box, 1.0), 1), DomainError);
}

TEST(Partition, OneCenterIsIdentically1) {
  auto alg = make_builtin("heisenberg1");
  std::vector<Interval> box{{0, 0}, {0, 0}, {0, 0}};
  auto pou = build_partition(greedy_net(alg, box, 1.0), 2);
  ASSERT_EQ(pou.centers().size(), 1u);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    // Points in the eps-ball around the origin.
    auto g = sample_box(cube(3, -0.5, 0.5), rng);
    if (!pou.covered(g)) continue;
    EXPECT_DOUBLE_EQ(pou.psi(0, g), 1.0);
  }
}

TEST(Covering, BallVolumeScalesWithHomogeneousDimension) {
  for (const char* name : {"heisenberg1", "anisotropic_plane", "engel"}) {
    auto alg = builtin(name);
    const int q = homogeneous_dimension(alg);
    const double v1 = ball_volume(alg, 0.7, 200000, 1), v2 = ball_volume(alg, 1.4, 200000, 2);
    EXPECT_NEAR(v2 / v1 / std::pow(2.0, q), 1.0, 0.05) << name;
  }
}

TEST(Covering, DerivativesOfPartitionAreUniformlyBounded) {
  auto alg = make_builtin("heisenberg1");
  auto box = cube(3, -4, 4);
  auto pou = build_partition(greedy_net(alg, box, 1.0, {.seed = 1}), 2);
  std::mt19937_64 rng(8);
  // Two disjoint sub-regions of the box: the sup should be comparable.
  std::vector<GroupElement> left, right;
  for (int k = 0; k < 300; ++k) {
    left.push_back(sample_box(std::vector<Interval>{{-3, -1}, {-1, 1}, {-1, 1}}, rng));
    right.push_back(sample_box(std::vector<Interval>{{1, 3}, {-1, 1}, {-1, 1}}, rng));
  }
  auto a = derivative_spot_check(pou, left, 1e-3), b = derivative_spot_check(pou, right, 1e-3);
  EXPECT_GT(a.points_used, 250u);
  ASSERT_EQ(a.words.size(), 7u);
  EXPECT_NEAR(a.sup_sum_sq[0], 1.0, 1e-8);
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    EXPECT_TRUE(std::isfinite(a.sup_sum_sq[w]));
    EXPECT_LT(a.sup_sum_sq[w], 1e4);
    EXPECT_LT(b.sup_sum_sq[w], 1e4);
  }
}
