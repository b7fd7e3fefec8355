// SOS compiler tests: basis enumeration counts, hand-checked compiled shapes,
// feasibility/infeasibility of classic polynomials, Gram reconstruction
// residuals, the log det epigraph, determinism, and the diagnosis mode.
#include <gtest/gtest.h>

#include <random>

#include "pdclf/solver.hpp"
#include "pdclf/sos.hpp"

namespace pdclf {
namespace {

VarSpacePtr xy_space() {
  return VarSpace::make({{"x", VarClass::kState}, {"y", VarClass::kState}});
}

TEST(MonomialBasis, CountsMatchBinomials) {
  // #monomials of degree <= d in n vars is C(n+d, d): C(4,2)=6, C(5,2)=10.
  EXPECT_EQ(monomial_basis({0, 1}, 0, 2).size(), 6u);
  EXPECT_EQ(monomial_basis({0, 1, 2}, 0, 2).size(), 10u);
  EXPECT_EQ(monomial_basis({0, 1}, 2, 2).size(), 3u);  // exactly degree 2
  // Per-variable caps.
  auto capped = monomial_basis({0, 1}, 0, 4, {{0, 1}});
  for (auto& m : capped) EXPECT_LE(m.degree_of(0), 1);
  EXPECT_EQ(capped.size(), 9u);  // e0 in {0,1}, e1 <= 4-e0: 5 + 4
  // Sorted graded-lex and unique.
  auto b = monomial_basis({0, 1, 2}, 0, 3);
  for (size_t i = 0; i + 1 < b.size(); ++i) EXPECT_LT(b[i], b[i + 1]);
}

TEST(SosCompile, ShapeOfGenericQuadratic) {
  // Generic degree-2 poly in 2 vars: Gram basis {1, y, x} (side 3) and one
  // row per monomial of degree <= 2 (six of them).
  auto vs = xy_space();
  SosProgram prog(vs);
  APoly p = to_affine(parse_poly("1 + x + y + x^2 + x*y + y^2", vs));
  GramRef ref = prog.require_sos(p, "q");
  EXPECT_EQ(ref.side, 3);
  auto compiled = prog.compile();
  EXPECT_EQ(compiled.program.num_rows(), 6);
  EXPECT_EQ(compiled.program.cones.psd_sides, (std::vector<int>{3}));
  EXPECT_EQ(compiled.program.num_vars(), 6);  // svec of side 3
}

TEST(SosCompile, EvenQuarticBasisIsPruned) {
  // (x^2+y^2)^2 has support of total degree exactly 4: the degree-interval
  // prune leaves only the three degree-2 monomials.
  auto vs = xy_space();
  SosProgram prog(vs);
  APoly p = to_affine(parse_poly("(x^2 + y^2)^2", vs));
  GramRef ref = prog.require_sos(p, "q");
  EXPECT_EQ(ref.side, 3);
}

TEST(SosSolve, EvenQuarticIsSosWithTinyResidual) {
  auto vs = xy_space();
  Poly target = parse_poly("(x^2 + y^2)^2", vs);
  SosProgram prog(vs);
  GramRef ref = prog.require_sos(to_affine(target), "q");
  auto compiled = prog.compile();
  auto sol = solve_conic(compiled.program);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  SosValues vals(compiled, sol);
  EXPECT_GE(vals.gram_min_eigenvalue(ref), -1e-8);
  // Reconstruct b'Qb and compare coefficients to the target.
  Eigen::MatrixXd Q = vals.gram(ref);
  Poly recon(vs);
  for (int i = 0; i < ref.side; ++i)
    for (int j = 0; j < ref.side; ++j)
      recon.add_term(ref.basis[i] * ref.basis[j], Q(i, j));
  EXPECT_LE(poly_distance(recon, target), 1e-7);
}

TEST(SosSolve, MotzkinIsNotSos) {
  auto vs = xy_space();
  Poly motzkin = parse_poly("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", vs);
  SosProgram prog(vs);
  prog.require_sos(to_affine(motzkin), "q");
  auto compiled = prog.compile();
  auto sol = solve_conic(compiled.program);
  EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << to_string(sol.status);
}

TEST(SosSolve, NegativeConstantIsNotSosPositiveIs) {
  auto vs = xy_space();
  {
    SosProgram prog(vs);
    prog.require_sos(to_affine(parse_poly("-1", vs)), "q");
    auto sol = solve_conic(prog.compile().program);
    EXPECT_EQ(sol.status, SolveStatus::kInfeasible);
  }
  {
    SosProgram prog(vs);
    prog.require_sos(to_affine(parse_poly("1", vs)), "q");
    auto sol = solve_conic(prog.compile().program);
    EXPECT_EQ(sol.status, SolveStatus::kOptimal);
  }
}

TEST(SosSolve, RandomSumOfSquaresIsRecovered) {
  auto vs = xy_space();
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    // p = q1^2 + q2^2 with random quadratics q_i.
    Poly p(vs);
    for (int k = 0; k < 2; ++k) {
      Poly q(vs);
      for (auto& m : monomial_basis({0, 1}, 0, 2)) q.add_term(m, coef(rng));
      p += q * q;
    }
    SosProgram prog(vs);
    GramRef ref = prog.require_sos(to_affine(p), "q");
    auto compiled = prog.compile();
    auto sol = solve_conic(compiled.program);
    ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
    SosValues vals(compiled, sol);
    EXPECT_GE(vals.gram_min_eigenvalue(ref), -1e-7);
    Eigen::MatrixXd Q = vals.gram(ref);
    Poly recon(vs);
    for (int i = 0; i < ref.side; ++i)
      for (int j = 0; j < ref.side; ++j)
        recon.add_term(ref.basis[i] * ref.basis[j], Q(i, j));
    EXPECT_LE(poly_distance(recon, p), 1e-6);
  }
}

TEST(SosSolve, MatrixSosFeasibleAndSampledPsd) {
  // [[1, x], [x, x^2 + 1/10]] = (1 x)'(1 x) + diag(0, 1/10): matrix SOS.
  auto vs = xy_space();
  APolyMat M(vs, 2, 2);
  M(0, 0) = to_affine(parse_poly("1", vs));
  M(0, 1) = to_affine(parse_poly("x", vs));
  M(1, 0) = M(0, 1);
  M(1, 1) = to_affine(parse_poly("x^2 + 0.1", vs));
  SosProgram prog(vs);
  GramRef ref = prog.require_matrix_sos(M, "m");
  auto compiled = prog.compile();
  auto sol = solve_conic(compiled.program);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  SosValues vals(compiled, sol);
  EXPECT_GE(vals.gram_min_eigenvalue(ref), -1e-8);
  // Sampled PSD-ness of the reconstructed polynomial matrix.
  PolyMat Mval(vs, 2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) Mval(i, j) = vals.value(M(i, j));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pt(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd at = Mval.eval({pt(rng), pt(rng)});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(at);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-6);
  }
}

TEST(SosSolve, IndefinitePolynomialMatrixIsRejected) {
  // det [[1, 2x], [2x, x^2]] = -3x^2 < 0 for x != 0: not PSD anywhere.
  auto vs = xy_space();
  APolyMat M(vs, 2, 2);
  M(0, 0) = to_affine(parse_poly("1", vs));
  M(0, 1) = to_affine(parse_poly("2*x", vs));
  M(1, 0) = M(0, 1);
  M(1, 1) = to_affine(parse_poly("x^2", vs));
  SosProgram prog(vs);
  prog.require_matrix_sos(M, "m");
  auto sol = solve_conic(prog.compile().program);
  EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << to_string(sol.status);
}

TEST(SosSolve, LogDetLowerBoundAttainsLogOfDeterminant) {
  // max log det diag(a, b) with a <= 2, b <= 3  =>  log 6 at (2, 3).
  auto vs = xy_space();
  SosProgram prog(vs);
  int a = prog.add_free("a");
  int b = prog.add_free("b");
  int sa = prog.add_nonneg("slack_a");
  int sb = prog.add_nonneg("slack_b");
  prog.pin_equal(sa, LinExpr(2.0) - LinExpr::variable(a));
  prog.pin_equal(sb, LinExpr(3.0) - LinExpr::variable(b));
  std::vector<std::vector<LinExpr>> X0 = {
      {LinExpr::variable(a), LinExpr(0.0)},
      {LinExpr(0.0), LinExpr::variable(b)}};
  LinExpr ld = prog.logdet_lower_bound(X0, "ld");
  prog.set_objective(LinExpr(0.0) - ld);
  auto compiled = prog.compile();
  auto sol = solve_conic(compiled.program);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  SosValues vals(compiled, sol);
  EXPECT_NEAR(vals.value(ld), std::log(6.0), 1e-5);
  EXPECT_NEAR(vals.value(a), 2.0, 1e-5);
  EXPECT_NEAR(vals.value(b), 3.0, 1e-5);
}

TEST(SosCompile, ByteIdenticalAcrossRebuilds) {
  auto build = [] {
    auto vs = xy_space();
    SosProgram prog(vs);
    APoly p = to_affine(parse_poly("2 + x^2 + 3*x*y + 2*y^2", vs));
    int e2 = prog.add_free("eps2");
    p.add_term(Monomial(), LinExpr::variable(e2, -1.0));
    prog.require_sos(p, "q");
    prog.set_objective(LinExpr::variable(e2));
    return prog.compile().program.to_text();
  };
  EXPECT_EQ(build(), build());
}

TEST(SosDiagnose, SlackLocalizesInfeasibility) {
  auto vs = xy_space();
  SosProgram prog(vs);
  // Family "good" is SOS; family "bad" is -1 (needs slack exactly 1).
  prog.require_sos(to_affine(parse_poly("x^2 + 1", vs)), "good");
  prog.require_sos(to_affine(parse_poly("-1", vs)), "bad");
  auto compiled = prog.compile(/*diagnose=*/true);
  auto sol = solve_conic(compiled.program);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  ASSERT_EQ(compiled.family_slack_cols.size(), 2u);
  double slack_good = 0, slack_bad = 0;
  for (auto& [name, col] : compiled.family_slack_cols) {
    if (name == "good") slack_good = sol.w[col];
    if (name == "bad") slack_bad = sol.w[col];
  }
  EXPECT_NEAR(slack_bad, 1.0, 1e-6);
  EXPECT_NEAR(slack_good, 0.0, 1e-6);
}

}  // namespace
}  // namespace pdclf
