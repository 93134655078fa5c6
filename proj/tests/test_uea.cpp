#include <gtest/gtest.h>

#include <random>

#include "hypo/uea.hpp"

using namespace hypo;

namespace {

struct Heis {
  AlgebraHandle alg = make_builtin("heisenberg1");
  UEAElement X = UEAElement::basis(alg, 0);
  UEAElement Y = UEAElement::basis(alg, 1);
  UEAElement T = UEAElement::basis(alg, 2);
  UEAElement one = UEAElement::one(alg);
};

// Random element whose monomials have weighted degree <= max_degree and
// small integer coefficients, so products are exact in floating point.
UEAElement random_element(const AlgebraHandle& alg, std::mt19937_64& rng, int max_degree, int n_terms = 4) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> letter(0, static_cast<int>(alg->dim()) - 1);
  UEAElement out(alg);
  for (int t = 0; t < n_terms; ++t) {
    Exponents e(alg->dim(), 0);
    int deg = 0;
    std::uniform_int_distribution<int> target(0, max_degree);
    const int want = target(rng);
    for (int tries = 0; tries < 20 && deg < want; ++tries) {
      const int l = letter(rng);
      if (deg + alg->degree(l) > want) continue;
      ++e[l];
      deg += alg->degree(l);
    }
    out += UEAElement::monomial(alg, e, cplx(coef(rng), coef(rng)));
  }
  return out;
}

Word random_word(const AlgebraHandle& alg, std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> letter(0, static_cast<int>(alg->dim()) - 1);
  Word w;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) w.letters.push_back(letter(rng));
  return w;
}

}  // namespace

TEST(NormalOrder, HeisenbergExamples) {
  Heis h;
  EXPECT_TRUE(normal_order(h.alg, parse_word(*h.alg, "YX")).approx_equal(h.X * h.Y - h.T));
  EXPECT_TRUE(normal_order(h.alg, Word{}).approx_equal(h.one));
  auto xx = normal_order(h.alg, parse_word(*h.alg, "XX"));
  ASSERT_EQ(xx.size(), 1u);
  EXPECT_EQ(xx.coeff({2, 0, 0}), cplx(1.0));
}

TEST(NormalOrder, WordParsing) {
  auto engel = make_builtin("engel");
  auto w = parse_word(*engel, "X1X2 X1");
  EXPECT_EQ(w.letters, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(w.weighted_length(*engel), 3);
  EXPECT_THROW(parse_word(*engel, "X1Z"), ParseError);
}

TEST(NormalOrder, GradingPreserved) {
  std::mt19937_64 rng(1);
  for (const char* name : {"heisenberg1", "engel"}) {
    auto alg = make_builtin(name);
    for (int n = 0; n < 100; ++n) {
      auto w = random_word(alg, rng, 8);
      auto nf = normal_order(alg, w);
      for (const auto& [e, c] : nf.terms()) EXPECT_EQ(nf.monomial_degree(e), w.weighted_length(*alg));
    }
  }
}

TEST(NormalOrder, ConfluentAcrossRewritingOrders) {
  std::mt19937_64 rng(42);
  for (const char* name : {"heisenberg1", "engel"}) {
    auto alg = make_builtin(name);
    for (int n = 0; n < 50; ++n) {
      auto w = random_word(alg, rng, 8);
      auto memo = normal_order(alg, w);
      for (auto order : {StraightenOrder::Leftmost, StraightenOrder::Rightmost, StraightenOrder::Random}) {
        auto ref = normal_order_rewriting(alg, w, order, static_cast<unsigned>(n));
        EXPECT_LT(memo.distance(ref), 1e-10) << name << " " << to_string(*alg, w);
      }
    }
  }
}

TEST(NormalOrder, Idempotent) {
  std::mt19937_64 rng(9);
  auto alg = make_builtin("engel");
  for (int n = 0; n < 30; ++n) {
    auto a = random_element(alg, rng, 8);
    // Re-straighten every monomial as a word: must reproduce it.
    UEAElement again(alg);
    for (const auto& [e, c] : a.terms()) {
      Word w;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int r = 0; r < e[i]; ++r) w.letters.push_back(static_cast<int>(i));
      again += normal_order(alg, w) * c;
    }
    EXPECT_LT(a.distance(again), 1e-12);
  }
}

TEST(Multiply, HeisenbergExamples) {
  Heis h;
  auto xy = h.X * h.Y;
  EXPECT_EQ(xy.size(), 1u);
  EXPECT_EQ(xy.coeff({1, 1, 0}), cplx(1.0));
  EXPECT_TRUE((h.Y * h.X).approx_equal(xy - h.T));
  EXPECT_TRUE(((h.X * h.Y) * h.T).approx_equal(h.X * (h.Y * h.T)));
  EXPECT_TRUE((h.one * xy).approx_equal(xy));
  EXPECT_TRUE((xy * h.one).approx_equal(xy));
}

TEST(Multiply, RejectsMismatchedAlgebras) {
  Heis h;
  auto e = make_builtin("engel");
  EXPECT_THROW(h.X * UEAElement::basis(e, 0), DomainError);
}

TEST(Multiply, DegreeIsSubadditive) {
  std::mt19937_64 rng(5);
  auto alg = make_builtin("engel");
  for (int n = 0; n < 50; ++n) {
    auto a = random_element(alg, rng, 4);
    auto b = random_element(alg, rng, 4);
    auto ab = a * b;
    if (!a.is_zero() && !b.is_zero()) {
      EXPECT_LE(ab.degree(), a.degree() + b.degree());
      auto tops = top_part(a, a.degree()) * top_part(b, b.degree());
      EXPECT_TRUE(top_part(ab, a.degree() + b.degree()).approx_equal(tops, 1e-10));
    }
  }
}

TEST(Adjoint, Examples) {
  Heis h;
  EXPECT_TRUE(adjoint_const(h.X).approx_equal(-h.X));
  EXPECT_TRUE(adjoint_const(h.X * h.Y).approx_equal(h.X * h.Y - h.T));
  EXPECT_TRUE(adjoint_const(h.one).approx_equal(h.one));
  EXPECT_TRUE(adjoint_const(h.T * cplx(0, 1)).approx_equal(h.T * cplx(0, 1)));  // (iT)^dagger = iT
}

TEST(Adjoint, AntiHomomorphismAndInvolution) {
  std::mt19937_64 rng(13);
  for (const char* name : {"heisenberg1", "engel"}) {
    auto alg = make_builtin(name);
    for (int n = 0; n < 40; ++n) {
      auto a = random_element(alg, rng, 4);
      auto b = random_element(alg, rng, 4);
      EXPECT_LT(adjoint_const(a * b).distance(adjoint_const(b) * adjoint_const(a)), 1e-10);
      EXPECT_LT(adjoint_const(adjoint_const(a)).distance(a), 1e-10);
    }
  }
}

TEST(TopPart, Examples) {
  Heis h;
  const cplx i(0, 1);
  auto a = -(h.X * h.X) - h.Y * h.Y + i * h.T + h.X;
  auto expect = -(h.X * h.X) - h.Y * h.Y + i * h.T;
  EXPECT_TRUE(top_part(a, 2).approx_equal(expect));
  EXPECT_TRUE(top_part(expect, 2).approx_equal(expect));
  EXPECT_TRUE(top_part(a, 3).is_zero());
  // Characterized by homogeneity under dilations.
  EXPECT_TRUE(dilate_uea(top_part(a, 2), 3.0).approx_equal(top_part(a, 2) * 9.0));
}

TEST(Dilate, Examples) {
  Heis h;
  EXPECT_TRUE(dilate_uea(h.X * h.Y, 2.0).approx_equal(h.X * h.Y * 4.0));
  EXPECT_TRUE(dilate_uea(h.X * h.Y + h.T, 1.0).approx_equal(h.X * h.Y + h.T));
  EXPECT_THROW(dilate_uea(h.X, 0.0), DomainError);
}

TEST(Dilate, IsHomomorphism) {
  std::mt19937_64 rng(21);
  auto alg = make_builtin("engel");
  for (int n = 0; n < 30; ++n) {
    auto a = random_element(alg, rng, 4);
    auto b = random_element(alg, rng, 4);
    const double t = 0.5 + 0.05 * n;
    auto lhs = dilate_uea(a * b, t);
    auto rhs = dilate_uea(a, t) * dilate_uea(b, t);
    EXPECT_LT(lhs.distance(rhs), 1e-8 * (1 + std::pow(t, 8)));
  }
}

TEST(RocklandLaplacian, Examples) {
  Heis h;
  EXPECT_TRUE(rockland_laplacian(h.alg).approx_equal(h.X * h.X + h.Y * h.Y));

  auto an = make_builtin("anisotropic_plane");
  auto x1 = UEAElement::basis(an, 0), x2 = UEAElement::basis(an, 1);
  EXPECT_TRUE(rockland_laplacian(an).approx_equal(-(x1 * x1 * x1 * x1) + x2 * x2));

  auto ab = make_builtin("abelian(2,(1,1))");
  auto a1 = UEAElement::basis(ab, 0), a2 = UEAElement::basis(ab, 1);
  EXPECT_TRUE(rockland_laplacian(ab).approx_equal(a1 * a1 + a2 * a2));
}

TEST(RocklandLaplacian, SelfAdjointAndHomogeneous) {
  for (const char* name : {"heisenberg1", "engel", "anisotropic_plane", "abelian(3,(1,2,3))"}) {
    auto alg = make_builtin(name);
    auto lap = rockland_laplacian(alg);
    const int two_v = 2 * alg->generator_lcm();
    EXPECT_EQ(lap.degree(), two_v) << name;
    EXPECT_TRUE(adjoint_const(lap).approx_equal(lap)) << name;
    EXPECT_TRUE(top_part(lap, two_v).approx_equal(lap)) << name;
  }
}

TEST(TextFormat, RoundTrip) {
  std::mt19937_64 rng(17);
  for (const char* name : {"heisenberg1", "engel"}) {
    auto alg = make_builtin(name);
    for (int n = 0; n < 20; ++n) {
      auto a = random_element(alg, rng, 6) * cplx(0.1, -0.3);
      EXPECT_EQ(parse_uea(alg, a.to_string()).distance(a), 0.0);
    }
  }
  Heis h;
  EXPECT_EQ(parse_uea(h.alg, "0").size(), 0u);
  EXPECT_THROW(parse_uea(h.alg, "(1+0i)*Q^1"), ParseError);
  EXPECT_EQ((h.X * h.Y - h.T).pretty(), "X Y - T");
}
