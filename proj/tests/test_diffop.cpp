#include <gtest/gtest.h>

#include <random>

#include "hypo/diffop.hpp"

using namespace hypo;

namespace {

struct Heis {
  AlgebraHandle alg = make_builtin("heisenberg1");
  CoeffExpr c(const std::string& s) const { return parse_coeff(s, *alg); }
  Word w(const std::string& s) const { return parse_word(*alg, s); }
  UEAElement X = UEAElement::basis(alg, 0);
  UEAElement Y = UEAElement::basis(alg, 1);
  UEAElement T = UEAElement::basis(alg, 2);
};

std::vector<double> random_point(std::mt19937_64& rng, std::size_t d, double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> x(d);
  for (auto& v : x) v = u(rng);
  return x;
}

const std::vector<std::string> kHeisCoeffs = {"1", "2+sin(x)", "tanh(y)", "cos(x*t)", "i*exp(-x*x)", "y-2*i", "3/(2+cos(t))"};
const std::vector<std::string> kEngelCoeffs = {"1", "sin(x1)*x2", "exp(-x3*x3)", "2*i+tanh(x4)", "cos(x1+x2)"};

DiffOp random_op(const AlgebraHandle& alg, const std::vector<std::string>& pool, std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> nterms(1, 3), len(0, max_len), letter(0, static_cast<int>(alg->dim()) - 1);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  DiffOp p(alg);
  const int n = nterms(rng);
  for (int t = 0; t < n; ++t) {
    Word w;
    const int l = len(rng);
    for (int i = 0; i < l; ++i) w.letters.push_back(letter(rng));
    p.add_term(parse_coeff(pool[pick(rng)], *alg), w);
  }
  return p;
}

// X_j a at g by central differences of s -> a(exp(-s X_j) g) through the
// group law.
cplx flow_difference(const GradedLieAlgebra& alg, std::size_t j, const CoeffExpr& a, const std::vector<double>& g,
                     double h) {
  std::vector<double> e(alg.dim(), 0.0);
  e[j] = -h;
  auto plus = bch_multiply(alg, GroupElement(e), GroupElement(g));
  e[j] = h;
  auto minus = bch_multiply(alg, GroupElement(e), GroupElement(g));
  return (a(plus.coords) - a(minus.coords)) / (2 * h);
}

// Midpoint rule for int_{R^3} f over [-L, L]^3; exact to high order for
// rapidly decaying smooth integrands.
template <class F>
cplx integrate3(F f, double L = 6.0, int n = 40) {
  const double h = 2 * L / n;
  cplx s = 0.0;
  std::vector<double> x(3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        x = {-L + (i + 0.5) * h, -L + (j + 0.5) * h, -L + (k + 0.5) * h};
        s += f(x);
      }
  return s * h * h * h;
}

}  // namespace

TEST(ParseCoeff, Examples) {
  Heis h;
  std::vector<double> origin{0, 0, 0}, p{0.5, 2.0, -1.0};
  EXPECT_EQ(h.c("2")(origin), cplx(2.0));
  EXPECT_EQ(h.c("sin(x)*y")(origin), cplx(0.0));
  EXPECT_NEAR(std::abs(h.c("sin(x)*y")(p) - std::sin(0.5) * 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(h.c("-x - -y*2 + t/4")(p) - cplx(-0.5 + 4.0 - 0.25)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(h.c("2*i*pi")(p) - cplx(0, 2 * std::numbers::pi)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(h.c("1.5e-1*exp(tanh(cos(x)))")(p) - 0.15 * std::exp(std::tanh(std::cos(0.5)))), 0.0, 1e-15);

  auto r = h.c("2+sin(x)").global_range();
  EXPECT_DOUBLE_EQ(r.re.lo, 1.0);
  EXPECT_DOUBLE_EQ(r.re.hi, 3.0);
  EXPECT_TRUE(r.im.is_zero());
}

TEST(ParseCoeff, Errors) {
  Heis h;
  try {
    h.c("2 + z");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  try {
    h.c("sin(x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
  EXPECT_THROW(h.c("2 3"), ParseError);
  EXPECT_THROW(h.c(""), ParseError);
  EXPECT_THROW(h.c("x*"), ParseError);
  EXPECT_THROW(h.c("log(x)"), ParseError);
  EXPECT_THROW(h.c("1/(x-x)")(std::vector<double>{1, 0, 0}), DomainError);
}

TEST(ParseCoeff, TextRoundTrip) {
  Heis h;
  std::mt19937_64 rng(4);
  for (const auto& s : kHeisCoeffs) {
    auto a = h.c(s);
    auto b = h.c(a.to_string());
    auto da = vector_field_apply(*h.alg, 0, a);
    auto db = h.c(da.to_string());
    for (int n = 0; n < 10; ++n) {
      auto x = random_point(rng, 3);
      EXPECT_NEAR(std::abs(a(x) - b(x)), 0.0, 1e-14) << s;
      EXPECT_NEAR(std::abs(da(x) - db(x)), 0.0, 1e-12) << s;
    }
  }
}

TEST(VectorField, HeisenbergExamples) {
  Heis h;
  std::vector<double> g{0.3, -1.7, 2.0};
  EXPECT_EQ(vector_field_apply(*h.alg, 0, h.c("x"))(g), cplx(-1.0));
  EXPECT_EQ(vector_field_apply(*h.alg, 0, h.c("t"))(g), cplx(1.7 / 2));  // -y/2
  EXPECT_EQ(vector_field_apply(*h.alg, 1, h.c("t"))(g), cplx(0.3 / 2));  // x/2
  EXPECT_EQ(vector_field_apply(*h.alg, 2, h.c("t"))(g), cplx(-1.0));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(vector_field_apply(*h.alg, j, h.c("7-2*i")).is_zero());
}

TEST(VectorField, MatchesGroupFlowDifferences) {
  std::mt19937_64 rng(77);
  for (const auto& [name, pool] : {std::pair{"heisenberg1", kHeisCoeffs}, std::pair{"engel", kEngelCoeffs}}) {
    auto alg = make_builtin(name);
    for (const auto& s : pool) {
      auto a = parse_coeff(s, *alg);
      for (std::size_t j = 0; j < alg->dim(); ++j) {
        auto xa = vector_field_apply(*alg, j, a);
        for (int n = 0; n < 5; ++n) {
          auto g = random_point(rng, alg->dim());
          // O(h^2) error: halving h divides the error by about 4.
          const cplx exact = xa(g);
          const double e1 = std::abs(flow_difference(*alg, j, a, g, 1e-2) - exact);
          const double e2 = std::abs(flow_difference(*alg, j, a, g, 5e-3) - exact);
          EXPECT_LT(e2, 1e-4) << name << " " << s << " j=" << j;
          if (e1 > 1e-7) {
            EXPECT_GT(e1 / e2, 3.5);
            EXPECT_LT(e1 / e2, 4.5);
          }
        }
      }
    }
  }
}

TEST(Freeze, Examples) {
  Heis h;
  const cplx i(0, 1);
  // P = -X^2 - Y^2 + i M_f T with f = 2.
  DiffOp p(h.alg);
  p.add_term(h.c("-1"), h.w("XX"));
  p.add_term(h.c("-1"), h.w("YY"));
  p.add_term(h.c("i*2"), h.w("T"));
  auto expect = -(h.X * h.X) - h.Y * h.Y + 2.0 * i * h.T;
  for (auto g : {GroupElement({0, 0, 0}), GroupElement({1, -2, 3})}) {
    EXPECT_TRUE(freeze(p, g).approx_equal(expect));
    EXPECT_TRUE(top_at(p, g).approx_equal(expect));
  }

  DiffOp q(h.alg);
  q.add_term(h.c("x"), h.w("YX"));
  EXPECT_TRUE(freeze(q, GroupElement({3, 0, 0})).approx_equal(3.0 * (h.X * h.Y - h.T)));
  EXPECT_TRUE(top_at(q, GroupElement({3, 0, 0})).approx_equal(3.0 * (h.X * h.Y - h.T)));
}

TEST(Freeze, VariableTopPartAndLowerOrderDropped) {
  Heis h;
  const cplx i(0, 1);
  DiffOp p(h.alg);
  p.add_term(h.c("-1"), h.w("XX"));
  p.add_term(h.c("-1"), h.w("YY"));
  p.add_term(h.c("i*(2+sin(x))"), h.w("T"));
  p.add_term(h.c("cos(y)"), Word{});  // order-0 term, not principal
  p.add_term(h.c("tanh(t)"), h.w("X"));
  EXPECT_EQ(p.order(), 2);
  GroupElement g({0.4, 0.1, -0.3});
  const double f = 2 + std::sin(0.4);
  EXPECT_TRUE(top_at(p, g).approx_equal(-(h.X * h.X) - h.Y * h.Y + i * f * h.T));
  EXPECT_FALSE(freeze(p, g).approx_equal(top_at(p, g)));
}

TEST(Freeze, ZeroOperatorWithCancellingTermsChangesNothing) {
  Heis h;
  std::mt19937_64 rng(8);
  auto a = h.c("2+sin(x)*tanh(t)");
  for (int n = 0; n < 20; ++n) {
    auto p = random_op(h.alg, kHeisCoeffs, rng, 3);
    // a (XXY - 2XYX + YXX) vanishes in U(g) because [X,[X,Y]] = 0.
    DiffOp q = p;
    q.add_term(a, h.w("XXY"));
    q.add_term(h.c("-2") * a, h.w("XYX"));
    q.add_term(a, h.w("YXX"));
    // and XY - YX - T = 0.
    q.add_term(h.c("cos(y)"), h.w("XY"));
    q.add_term(-h.c("cos(y)"), h.w("YX"));
    q.add_term(-h.c("cos(y)"), h.w("T"));
    for (int k = 0; k < 5; ++k) {
      GroupElement g(random_point(rng, 3));
      EXPECT_LT(freeze(p, g).distance(freeze(q, g)), 1e-12);
    }
  }
}

TEST(FormalAdjoint, Examples) {
  Heis h;
  std::mt19937_64 rng(3);
  auto u = h.c("exp(-x*x-y*y)*cos(t)");

  auto x_adj = formal_adjoint(DiffOp::word(h.alg, h.w("X")));
  ASSERT_EQ(x_adj.terms().size(), 1u);
  EXPECT_EQ(x_adj.terms()[0].word.letters, h.w("X").letters);
  EXPECT_EQ(x_adj.terms()[0].coeff(std::vector<double>{0, 0, 0}), cplx(-1.0));

  auto a = h.c("i*sin(x)+y");
  auto m_adj = formal_adjoint(DiffOp::multiplier(h.alg, a));
  // M_a X -> -M_{conj a} X - M_{X(conj a)}.
  DiffOp max(h.alg);
  max.add_term(a, h.w("X"));
  auto ad = formal_adjoint(max);
  auto abar = a.conj();
  for (int n = 0; n < 10; ++n) {
    auto x = random_point(rng, 3);
    EXPECT_NEAR(std::abs(m_adj.apply(u)(x) - std::conj(a(x)) * u(x)), 0.0, 1e-13);
    const cplx expect = -abar(x) * vector_field_apply(*h.alg, 0, u)(x) - vector_field_apply(*h.alg, 0, abar)(x) * u(x);
    EXPECT_NEAR(std::abs(ad.apply(u)(x) - expect), 0.0, 1e-12);
  }
}

TEST(FormalAdjoint, InvolutionByApplication) {
  std::mt19937_64 rng(12);
  for (const auto& [name, pool] : {std::pair{"heisenberg1", kHeisCoeffs}, std::pair{"engel", kEngelCoeffs}}) {
    auto alg = make_builtin(name);
    auto u = parse_coeff(name == std::string("engel") ? "exp(-x1*x1)*sin(x2+x4)" : "exp(-x*x)*sin(y+t)", *alg);
    for (int n = 0; n < 8; ++n) {
      auto p = random_op(alg, pool, rng, 2);
      auto pp = formal_adjoint(formal_adjoint(p));
      auto lhs = p.apply(u), rhs = pp.apply(u);
      for (int k = 0; k < 5; ++k) {
        auto x = random_point(rng, alg->dim());
        EXPECT_NEAR(std::abs(lhs(x) - rhs(x)), 0.0, 1e-9 * (1 + std::abs(lhs(x))));
      }
    }
  }
}

TEST(FormalAdjoint, PairingByQuadrature) {
  Heis h;
  auto u = h.c("exp(-(x*x+y*y+t*t)/2)*(1+x*t)");
  auto w = h.c("exp(-(x*x+y*y+t*t)/2)*(y-i*t)");
  DiffOp p(h.alg);
  p.add_term(h.c("2+sin(x)"), h.w("XY"));
  p.add_term(h.c("i*tanh(t)"), h.w("T"));
  p.add_term(h.c("cos(y)"), h.w("Y"));
  auto pd = formal_adjoint(p);
  auto pu = p.apply(u), pdw = pd.apply(w);
  const cplx lhs = integrate3([&](const std::vector<double>& x) { return pu(x) * std::conj(w(x)); });
  const cplx rhs = integrate3([&](const std::vector<double>& x) { return u(x) * std::conj(pdw(x)); });
  EXPECT_GT(std::abs(lhs), 1e-3);
  EXPECT_LT(std::abs(lhs - rhs), 1e-8);
}

TEST(Compose, Examples) {
  Heis h;
  std::mt19937_64 rng(19);
  auto u = h.c("exp(-x*x-t*t)*(1+y)");
  auto id = DiffOp::identity(h.alg);
  auto x = DiffOp::word(h.alg, h.w("X"));

  auto xx = compose(x, x);
  ASSERT_EQ(xx.terms().size(), 1u);
  EXPECT_EQ(xx.terms()[0].word.letters, h.w("XX").letters);

  auto a = h.c("sin(x)+t"), b = h.c("cos(y)*i");
  DiffOp pa(h.alg), qb(h.alg);
  pa.add_term(a, h.w("X"));
  qb.add_term(b, h.w("Y"));
  auto pq = compose(pa, qb);
  // M_a X M_b Y = M_{ab} XY + M_{a X(b)} Y.
  DiffOp expect(h.alg);
  expect.add_term(a * b, h.w("XY"));
  expect.add_term(a * vector_field_apply(*h.alg, 0, b), h.w("Y"));
  auto ip = compose(id, pa);
  for (int n = 0; n < 10; ++n) {
    auto g = random_point(rng, 3);
    EXPECT_NEAR(std::abs(pq.apply(u)(g) - expect.apply(u)(g)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(ip.apply(u)(g) - pa.apply(u)(g)), 0.0, 1e-13);
  }
  EXPECT_THROW(compose(pa, DiffOp::identity(make_builtin("engel"))), DomainError);
}

TEST(Compose, AgreesWithSequentialApplication) {
  std::mt19937_64 rng(33);
  for (const auto& [name, pool] : {std::pair{"heisenberg1", kHeisCoeffs}, std::pair{"engel", kEngelCoeffs}}) {
    auto alg = make_builtin(name);
    auto u = parse_coeff(name == std::string("engel") ? "exp(-x2*x2)*cos(x1*x3)" : "exp(-y*y)*cos(x*t)", *alg);
    for (int n = 0; n < 8; ++n) {
      auto p = random_op(alg, pool, rng, 2), q = random_op(alg, pool, rng, 2);
      auto pq = compose(p, q);
      EXPECT_LE(pq.computed_order(), p.order() + q.order());
      auto lhs = pq.apply(u), rhs = p.apply(q.apply(u));
      for (int k = 0; k < 5; ++k) {
        auto x = random_point(rng, alg->dim());
        EXPECT_NEAR(std::abs(lhs(x) - rhs(x)), 0.0, 1e-9 * (1 + std::abs(rhs(x))));
      }
    }
  }
}

TEST(Commutator, ExamplesAndOrderDrop) {
  Heis h;
  std::mt19937_64 rng(5);
  auto psi = h.c("exp(-x*x-y*y-t*t)");
  auto u = h.c("sin(x+2*y)*cos(t)");

  auto cx = commutator_with_mult(DiffOp::word(h.alg, h.w("X")), psi);
  ASSERT_EQ(cx.terms().size(), 1u);
  EXPECT_TRUE(cx.terms()[0].word.empty());
  EXPECT_EQ(commutator_with_mult(DiffOp::multiplier(h.alg, h.c("2+sin(x)")), psi).terms().size(), 0u);

  auto lap = DiffOp::from_uea(rockland_laplacian(h.alg));
  auto cl = commutator_with_mult(lap, psi);
  EXPECT_LE(cl.computed_order(), 1);

  for (int n = 0; n < 20; ++n) {
    auto p = n == 0 ? lap : random_op(h.alg, kHeisCoeffs, rng, 3);
    auto c = commutator_with_mult(p, psi);
    if (p.computed_order() > 0) EXPECT_LE(c.computed_order(), p.computed_order() - 1);
    auto lhs = c.apply(u), pu = p.apply(u), ppsiu = p.apply(psi * u);
    for (int k = 0; k < 5; ++k) {
      auto x = random_point(rng, 3);
      EXPECT_NEAR(std::abs(lhs(x) - (ppsiu(x) - psi(x) * pu(x))), 0.0, 1e-10);
    }
  }
}

TEST(SymbolLemma, TopPartIsMultiplicative) {
  std::mt19937_64 rng(100);
  for (const auto& [name, pool] : {std::pair{"heisenberg1", kHeisCoeffs}, std::pair{"engel", kEngelCoeffs}}) {
    auto alg = make_builtin(name);
    const int pairs = name == std::string("engel") ? 30 : 100;
    for (int n = 0; n < pairs; ++n) {
      auto p = random_op(alg, pool, rng, 2), q = random_op(alg, pool, rng, 2);
      auto pq = compose(p, q);
      for (int k = 0; k < 10; ++k) {
        GroupElement g(random_point(rng, alg->dim()));
        EXPECT_LT(top_at(pq, g).distance(top_at(p, g) * top_at(q, g)), 1e-10) << name;
      }
    }
  }
}

TEST(SymbolLemma, AdjointCommutesWithTop) {
  std::mt19937_64 rng(101);
  for (const auto& [name, pool] : {std::pair{"heisenberg1", kHeisCoeffs}, std::pair{"engel", kEngelCoeffs}}) {
    auto alg = make_builtin(name);
    for (int n = 0; n < 50; ++n) {
      auto p = random_op(alg, pool, rng, 3);
      auto pd = formal_adjoint(p);
      EXPECT_EQ(pd.order(), p.order());
      for (int k = 0; k < 10; ++k) {
        GroupElement g(random_point(rng, alg->dim()));
        EXPECT_LT(top_at(pd, g).distance(adjoint_const(top_at(p, g))), 1e-10) << name;
      }
    }
  }
}

TEST(CoefficientBounds, SampledAndCertified) {
  Heis h;
  DiffOp p(h.alg);
  p.add_term(h.c("2+sin(x)"), h.w("XX"));
  p.add_term(h.c("y"), h.w("T"));
  std::vector<Interval> box(3, Interval{-3.0, 3.0});
  auto b = coefficient_bounds(p, 2, box, 500, 1);
  ASSERT_EQ(b.size(), 2u);
  // sup over beta of |X^beta (2 + sin x)| is 3, attained by beta = empty.
  EXPECT_LE(b[0].sampled_sup, 3.0);
  EXPECT_GT(b[0].sampled_sup, 2.9);
  ASSERT_TRUE(b[0].certified_bound.has_value());
  EXPECT_GE(*b[0].certified_bound, 3.0);
  EXPECT_FALSE(b[0].provably_unbounded);
  EXPECT_TRUE(b[1].provably_unbounded);
  EXPECT_FALSE(b[1].certified_bound.has_value());
  EXPECT_GE(b[1].sampled_sup, 2.5);
}
