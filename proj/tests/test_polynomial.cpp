// Core polynomial algebra tests.  Expected values are derived by hand (term
// ordering, expansions, derivatives) or by independent identities evaluated
// at random points.
#include <gtest/gtest.h>

#include <random>

#include "pdclf/polymatrix.hpp"
#include "pdclf/polynomial.hpp"

namespace pdclf {
namespace {

VarSpacePtr toy_space() {
  return VarSpace::make({{"x1", VarClass::kState},
                         {"x2", VarClass::kState},
                         {"theta", VarClass::kParameter}});
}

TEST(VarSpace, LookupAndClasses) {
  auto vs = toy_space();
  EXPECT_EQ(vs->size(), 3);
  EXPECT_EQ(vs->index("x1"), 0);
  EXPECT_EQ(vs->index("theta"), 2);
  EXPECT_EQ(vs->var_class(2), VarClass::kParameter);
  EXPECT_EQ(vs->indices_of(VarClass::kState), (std::vector<int>{0, 1}));
  EXPECT_THROW(vs->index("nope"), UnknownVariable);
  EXPECT_THROW(check_same_space(vs, VarSpace::make({{"y", VarClass::kState}})),
               VarSpaceMismatch);
  // Deep equality suffices: two separately built identical spaces compare equal.
  auto vs2 = toy_space();
  EXPECT_NO_THROW(check_same_space(vs, vs2));
}

TEST(Monomial, GradedOrderIsTheDocumentedOne) {
  // Hand-derived ascending order over (x1, x2, theta), degree <= 2:
  //   1, theta, x2, x1, theta^2, x2*theta, x2^2, x1*theta, x1*x2, x1^2
  // (total degree first; ties broken so that later variables come first).
  using M = Monomial;
  std::vector<M> expected = {
      M(),
      M::var(2),
      M::var(1),
      M::var(0),
      M::var(2, 2),
      M({{1, 1}, {2, 1}}),
      M::var(1, 2),
      M({{0, 1}, {2, 1}}),
      M({{0, 1}, {1, 1}}),
      M::var(0, 2),
  };
  for (size_t i = 0; i + 1 < expected.size(); ++i) {
    EXPECT_LT(expected[i], expected[i + 1]) << "at position " << i;
    EXPECT_FALSE(expected[i + 1] < expected[i]) << "at position " << i;
  }
  // A map over Monomial iterates in exactly this order.
  std::map<Monomial, int> m;
  for (int i = static_cast<int>(expected.size()) - 1; i >= 0; --i)
    m[expected[i]] = i;
  int k = 0;
  for (auto& [mono, idx] : m) EXPECT_EQ(idx, k++);
}

TEST(Monomial, ProductMergesExponents) {
  Monomial a({{0, 2}, {2, 1}});  // x1^2 theta
  Monomial b({{0, 1}, {1, 3}});  // x1 x2^3
  Monomial p = a * b;
  EXPECT_EQ(p.degree_of(0), 3);
  EXPECT_EQ(p.degree_of(1), 3);
  EXPECT_EQ(p.degree_of(2), 1);
  EXPECT_EQ(p.total_degree(), 7);
  EXPECT_THROW(Monomial({{0, -1}}), Error);
}

TEST(Polynomial, SquareOfTrinomialHasSixTerms) {
  auto vs = toy_space();
  Poly p = Poly::variable(vs, 0) + Poly::variable(vs, 1) + Poly::constant(vs, 1.0);
  Poly sq = p * p;
  // (x1 + x2 + 1)^2 = x1^2 + x2^2 + 1 + 2 x1 x2 + 2 x1 + 2 x2
  EXPECT_EQ(sq.terms().size(), 6u);
  Poly expected(vs);
  expected.add_term(Monomial(), 1.0);
  expected.add_term(Monomial::var(0), 2.0);
  expected.add_term(Monomial::var(1), 2.0);
  expected.add_term(Monomial::var(0, 2), 1.0);
  expected.add_term(Monomial({{0, 1}, {1, 1}}), 2.0);
  expected.add_term(Monomial::var(1, 2), 1.0);
  EXPECT_EQ(poly_distance(sq, expected), 0.0);
}

Poly random_poly(const VarSpacePtr& vs, std::mt19937& rng, int deg, int nterms) {
  std::uniform_int_distribution<int> pick_exp(0, deg);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  Poly p(vs);
  for (int t = 0; t < nterms; ++t) {
    std::vector<std::pair<int, int>> factors;
    int budget = deg;
    for (int v = 0; v < vs->size(); ++v) {
      int e = pick_exp(rng) % (budget + 1);
      budget -= e;
      if (e > 0) factors.push_back({v, e});
    }
    p.add_term(Monomial(std::move(factors)), coef(rng));
  }
  return p;
}

TEST(Polynomial, EvalIsARingHomomorphism) {
  auto vs = toy_space();
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    Poly p = random_poly(vs, rng, 4, 8);
    Poly q = random_poly(vs, rng, 4, 8);
    std::vector<double> z = {pt(rng), pt(rng), pt(rng)};
    double sum_direct = (p + q).eval(z);
    double prod_direct = (p * q).eval(z);
    EXPECT_NEAR(sum_direct, p.eval(z) + q.eval(z), 1e-12);
    EXPECT_NEAR(prod_direct, p.eval(z) * q.eval(z),
                1e-12 * std::max(1.0, std::abs(prod_direct)));
  }
}

TEST(Polynomial, DerivativeSatisfiesProductRule) {
  auto vs = toy_space();
  std::mt19937 rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    Poly p = random_poly(vs, rng, 3, 6);
    Poly q = random_poly(vs, rng, 3, 6);
    for (int v = 0; v < 3; ++v) {
      Poly lhs = (p * q).diff(v);
      Poly rhs = p.diff(v) * q + p * q.diff(v);
      EXPECT_LE(poly_distance(lhs, rhs), 1e-12);
    }
  }
}

TEST(Polynomial, DerivativeOfFrozenExample) {
  auto vs = toy_space();
  // p = 3 x1^2 x2 - 2 x1 theta + 5   =>   dp/dx1 = 6 x1 x2 - 2 theta
  Poly p = parse_poly("3*x1^2*x2 - 2*x1*theta + 5", vs);
  Poly expected = parse_poly("6*x1*x2 - 2*theta", vs);
  EXPECT_EQ(poly_distance(p.diff(0), expected), 0.0);
  // dp/dx2 = 3 x1^2, dp/dtheta = -2 x1
  EXPECT_EQ(poly_distance(p.diff(1), parse_poly("3*x1^2", vs)), 0.0);
  EXPECT_EQ(poly_distance(p.diff(2), parse_poly("-2*x1", vs)), 0.0);
}

TEST(Polynomial, EvalByNameRequiresAllAppearingVars) {
  auto vs = toy_space();
  Poly p = parse_poly("x1*theta + x2", vs);
  std::map<std::string, double> full = {{"x1", 2.0}, {"x2", -1.0}, {"theta", 0.5}};
  EXPECT_NEAR(p.eval(full), 2.0 * 0.5 - 1.0, 1e-15);
  std::map<std::string, double> partial = {{"x1", 2.0}, {"x2", -1.0}};
  EXPECT_THROW(p.eval(partial), MissingAssignment);
}

TEST(Polynomial, ParserHandlesGroupingPowersAndScientific) {
  auto vs = toy_space();
  Poly p = parse_poly("(x1 - 1)^2/4 + 2e-3", vs);
  EXPECT_NEAR(p.eval({3.0, 0.0, 0.0}), 1.0 + 2e-3, 1e-15);
  EXPECT_NEAR(p.eval({1.0, 0.0, 0.0}), 2e-3, 1e-15);
  Poly frozen = parse_poly("-1.79 + 12.12*theta^2 - 0.5*x1*x2", vs);
  EXPECT_NEAR(frozen.eval({2.0, 3.0, 0.5}), -1.79 + 12.12 * 0.25 - 3.0, 1e-12);
  EXPECT_THROW(parse_poly("x1 + yz", vs), UnknownVariable);
  EXPECT_THROW(parse_poly("x1 x2", vs), ParseError);
  EXPECT_THROW(parse_poly("x1/x2", vs), ParseError);
}

TEST(Polynomial, TextRoundTripIsExact) {
  auto vs = toy_space();
  std::mt19937 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    Poly p = random_poly(vs, rng, 5, 10);
    Poly back = parse_poly(to_string(p), vs);
    EXPECT_EQ(poly_distance(p, back), 0.0) << to_string(p);
  }
  EXPECT_EQ(to_string(Poly(vs)), "0");
  Poly clean = parse_poly("0.5*theta^2 - 2*x1", vs);
  EXPECT_EQ(to_string(clean), "-2*x1 + 0.5*theta^2");
}

TEST(Polynomial, ScaleVarsSubstitutes) {
  auto vs = toy_space();
  Poly p = parse_poly("x1^2 + 3*x1*x2 + theta", vs);
  Poly scaled = p.scale_vars({{0, 2.0}, {1, 0.5}});
  // x1 -> 2 x1, x2 -> 0.5 x2:  4 x1^2 + 3 x1 x2 + theta
  EXPECT_EQ(poly_distance(scaled, parse_poly("4*x1^2 + 3*x1*x2 + theta", vs)), 0.0);
}

TEST(LinExprRing, ProductOfTwoDecisionTermsThrows) {
  auto vs = toy_space();
  APoly p(vs);
  p.add_term(Monomial::var(0), LinExpr::variable(0));
  APoly q(vs);
  q.add_term(Monomial::var(1), LinExpr::variable(1));
  EXPECT_THROW(p * q, BilinearTerm);
  APoly c = to_affine(parse_poly("2*x2", vs));
  APoly ok = p * c;  // constant-coefficient factor is fine
  LinExpr at = ok.eval({1.0, 1.0, 0.0});
  ASSERT_EQ(at.terms().size(), 1u);
  EXPECT_EQ(at.terms()[0].first, 0);
  EXPECT_DOUBLE_EQ(at.terms()[0].second, 2.0);
}

TEST(PolyMatrixOps, SymDiffAndEval) {
  auto vs = toy_space();
  PolyMat M(vs, 2, 2);
  M(0, 0) = parse_poly("1 + theta", vs);
  M(0, 1) = parse_poly("x1", vs);
  M(1, 0) = parse_poly("-x1", vs);
  M(1, 1) = parse_poly("2", vs);
  PolyMat S = M.sym();  // M + M^T: off-diagonals cancel here
  EXPECT_EQ(poly_distance(S(0, 1), Poly(vs)), 0.0);
  EXPECT_EQ(poly_distance(S(0, 0), parse_poly("2 + 2*theta", vs)), 0.0);
  PolyMat D = M.diff(2);  // d/dtheta
  EXPECT_EQ(poly_distance(D(0, 0), parse_poly("1", vs)), 0.0);
  EXPECT_EQ(poly_distance(D(0, 1), Poly(vs)), 0.0);
  Eigen::MatrixXd at = M.eval({3.0, 0.0, 0.25});
  EXPECT_DOUBLE_EQ(at(0, 0), 1.25);
  EXPECT_DOUBLE_EQ(at(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(at(1, 0), -3.0);
  PolyMat P = M * M;
  Eigen::MatrixXd direct = at * at;
  Eigen::MatrixXd via_poly = P.eval({3.0, 0.0, 0.25});
  EXPECT_LT((direct - via_poly).norm(), 1e-12);
  EXPECT_THROW(M * PolyMat(vs, 3, 2), DimensionMismatch);
}

}  // namespace
}  // namespace pdclf
