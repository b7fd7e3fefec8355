// Conic solver tests against problems with closed-form optima, plus
// feasibility-certificate and cone-projection property checks.
#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pdclf/expcone.hpp"
#include "pdclf/solver.hpp"

namespace pdclf {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

TEST(ExpConeProjection, MoreauDecomposition) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int trial = 0; trial < 2000; ++trial) {
    double r = u(rng), s = u(rng), t = u(rng);
    auto p = project_exp_cone(r, s, t);
    EXPECT_TRUE(exp_primal_member(p[0], p[1], p[2], 1e-7))
        << r << " " << s << " " << t << " -> " << p[0] << " " << p[1] << " " << p[2];
    // q = v - p must lie in the polar cone (-q in the dual cone) and p _|_ q.
    double q0 = r - p[0], q1 = s - p[1], q2 = t - p[2];
    EXPECT_TRUE(exp_dual_member(-q0, -q1, -q2, 1e-7));
    double dot = p[0] * q0 + p[1] * q1 + p[2] * q2;
    double scale = std::max(1.0, std::abs(r) + std::abs(s) + std::abs(t));
    EXPECT_NEAR(dot, 0.0, 1e-6 * scale * scale);
    // Idempotence.
    auto pp = project_exp_cone(p[0], p[1], p[2]);
    EXPECT_NEAR(pp[0], p[0], 1e-7 * scale);
    EXPECT_NEAR(pp[1], p[1], 1e-7 * scale);
    EXPECT_NEAR(pp[2], p[2], 1e-7 * scale);
  }
}

TEST(ExpConeProjection, KnownPointsPassThrough) {
  // Members map to themselves; strict polar members map to the origin.
  auto inside = project_exp_cone(1.0, 1.0, 3.0);  // e^1 < 3
  EXPECT_NEAR(inside[0], 1.0, 1e-9);
  EXPECT_NEAR(inside[1], 1.0, 1e-9);
  EXPECT_NEAR(inside[2], 3.0, 1e-9);
  // (1, 0.5, -2) lies strictly inside the polar cone: -(that) is a strict
  // dual member since 1*e^{0.5/-1} = 0.607 <= e*2.  Projection is the origin.
  auto polar = project_exp_cone(1.0, 0.5, -2.0);
  EXPECT_NEAR(polar[0], 0.0, 1e-9);
  EXPECT_NEAR(polar[1], 0.0, 1e-9);
  EXPECT_NEAR(polar[2], 0.0, 1e-9);
  // Third quadrant shortcut: r<=0, s<=0 projects to (r, 0, max(t,0)).
  auto q3 = project_exp_cone(-2.0, -1.0, 4.0);
  EXPECT_NEAR(q3[0], -2.0, 1e-9);
  EXPECT_NEAR(q3[1], 0.0, 1e-9);
  EXPECT_NEAR(q3[2], 4.0, 1e-9);
}

ConicProgram lp_min_x_at_least_one() {
  // min x  s.t.  x - s = 1, s >= 0, x free.  Optimum x = 1.
  ConicProgram p;
  p.cones.num_free = 1;
  p.cones.num_nonneg = 1;
  p.c = {1.0, 0.0};
  int r = p.add_rows(1);
  p.set_entry(r, 0, 1.0);
  p.set_entry(r, 1, -1.0);
  p.h[r] = 1.0;
  return p;
}

TEST(ConicSolver, TinyLpOptimal) {
  auto sol = solve_conic(lp_min_x_at_least_one());
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
  EXPECT_NEAR(sol.w[0], 1.0, 1e-6);
  EXPECT_LE(sol.primal_residual, 1e-6);
}

TEST(ConicSolver, DeterministicAcrossRuns) {
  auto a = solve_conic(lp_min_x_at_least_one());
  auto b = solve_conic(lp_min_x_at_least_one());
  ASSERT_EQ(a.w.size(), b.w.size());
  for (size_t i = 0; i < a.w.size(); ++i) EXPECT_EQ(a.w[i], b.w[i]);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(ConicSolver, InfeasibleLpDetected) {
  // x >= 0 with x = -1.
  ConicProgram p;
  p.cones.num_nonneg = 1;
  p.c = {0.0};
  int r = p.add_rows(1);
  p.set_entry(r, 0, 1.0);
  p.h[r] = -1.0;
  auto sol = solve_conic(p);
  EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << to_string(sol.status);
}

TEST(ConicSolver, UnboundedLpDetected) {
  // min x  s.t.  x + s = 0, s >= 0  =>  x = -s -> -inf.
  ConicProgram p;
  p.cones.num_free = 1;
  p.cones.num_nonneg = 1;
  p.c = {1.0, 0.0};
  int r = p.add_rows(1);
  p.set_entry(r, 0, 1.0);
  p.set_entry(r, 1, 1.0);
  auto sol = solve_conic(p);
  EXPECT_EQ(sol.status, SolveStatus::kUnbounded) << to_string(sol.status);
}

TEST(ConicSolver, CorrelationSdp) {
  // max t  s.t.  [[1, t], [t, 1]] >= 0   =>   t* = 1.
  ConicProgram p;
  p.cones.num_free = 1;
  p.cones.psd_sides = {2};
  p.c = {-1.0, 0.0, 0.0, 0.0};  // svec block at cols 1..3
  int r = p.add_rows(3);
  p.set_entry(r + 0, 1, 1.0);          // P00 = 1
  p.h[r + 0] = 1.0;
  p.set_entry(r + 1, 3, 1.0);          // P11 = 1
  p.h[r + 1] = 1.0;
  p.set_entry(r + 2, 2, 1.0);          // svec off-diag = sqrt2 * t
  p.set_entry(r + 2, 0, -kSqrt2);
  auto sol = solve_conic(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  EXPECT_NEAR(sol.objective, -1.0, 1e-6);
  EXPECT_NEAR(sol.w[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.w[2] / kSqrt2, 1.0, 1e-6);
}

TEST(ConicSolver, ArithmeticGeometricSdp) {
  // min a + b  s.t.  [[a, 1], [1, b]] >= 0   =>   a = b = 1, optimum 2.
  ConicProgram p;
  p.cones.psd_sides = {2};
  p.c = {1.0, 0.0, 1.0};
  int r = p.add_rows(1);
  p.set_entry(r, 1, 1.0);  // off-diag entry = sqrt2 * 1
  p.h[r] = kSqrt2;
  auto sol = solve_conic(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-6);
  EXPECT_NEAR(sol.w[0], 1.0, 1e-5);
  EXPECT_NEAR(sol.w[2], 1.0, 1e-5);
}

TEST(ConicSolver, InfeasibleSdpDetected) {
  // Pin [[1, 2], [2, 1]] (eigenvalues 3 and -1) inside the PSD cone.
  ConicProgram p;
  p.cones.psd_sides = {2};
  p.c = {0.0, 0.0, 0.0};
  int r = p.add_rows(3);
  p.set_entry(r + 0, 0, 1.0);
  p.h[r + 0] = 1.0;
  p.set_entry(r + 1, 2, 1.0);
  p.h[r + 1] = 1.0;
  p.set_entry(r + 2, 1, 1.0);
  p.h[r + 2] = 2.0 * kSqrt2;
  auto sol = solve_conic(p);
  EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << to_string(sol.status);
}

TEST(ConicSolver, ExpConeLog) {
  // max r  s.t.  (r, 1, 4) in Kexp   =>   r* = log 4.
  ConicProgram p;
  p.cones.num_exp = 1;
  p.c = {-1.0, 0.0, 0.0};
  int r = p.add_rows(2);
  p.set_entry(r + 0, 1, 1.0);
  p.h[r + 0] = 1.0;
  p.set_entry(r + 1, 2, 1.0);
  p.h[r + 1] = 4.0;
  auto sol = solve_conic(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  EXPECT_NEAR(sol.w[0], std::log(4.0), 1e-6);
}

TEST(ConicSolver, MixedConesOneProgram) {
  // min -t - r  s.t.  [[1,t],[t,1]] >= 0,  (r, 1, e^2) in Kexp,  slack >= 0
  // with slack pinned to 3.  Optimum: t = 1, r = 2, objective -3.
  ConicProgram p;
  p.cones.num_free = 1;    // t at col 0
  p.cones.num_nonneg = 1;  // slack at col 1
  p.cones.psd_sides = {2}; // cols 2..4
  p.cones.num_exp = 1;     // cols 5..7
  p.c = {-1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0};
  int r = p.add_rows(6);
  p.set_entry(r + 0, 2, 1.0);
  p.h[r + 0] = 1.0;
  p.set_entry(r + 1, 4, 1.0);
  p.h[r + 1] = 1.0;
  p.set_entry(r + 2, 3, 1.0);
  p.set_entry(r + 2, 0, -kSqrt2);
  p.set_entry(r + 3, 6, 1.0);
  p.h[r + 3] = 1.0;
  p.set_entry(r + 4, 7, 1.0);
  p.h[r + 4] = std::exp(2.0);
  p.set_entry(r + 5, 1, 1.0);
  p.h[r + 5] = 3.0;
  auto sol = solve_conic(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  EXPECT_NEAR(sol.objective, -3.0, 1e-5);
  EXPECT_NEAR(sol.w[0], 1.0, 1e-5);
  EXPECT_NEAR(sol.w[5], 2.0, 1e-5);
  EXPECT_NEAR(sol.w[1], 3.0, 1e-6);
}

TEST(ConicSolver, RandomSdpFeasiblePointBoundsOptimum) {
  // Build equalities satisfied by a known strictly feasible w0; the solver's
  // optimum can be no worse, and its iterate must satisfy cone + equality
  // residual bounds.
  std::mt19937 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int side = 5, svec_dim = side * (side + 1) / 2;
  ConicProgram p;
  p.cones.num_free = 2;
  p.cones.num_nonneg = 3;
  p.cones.psd_sides = {side};
  const int nvars = 2 + 3 + svec_dim;
  // Strictly feasible point: free arbitrary, nonneg 1s, PSD = I (+0.3 noise).
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(side, side);
  Eigen::MatrixXd N(side, side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) N(i, j) = gauss(rng);
  M += 0.05 * (N + N.transpose());
  std::vector<double> w0(nvars, 0.0);
  w0[0] = 0.7;
  w0[1] = -1.2;
  w0[2] = w0[3] = w0[4] = 1.0;
  {
    int k = 5;
    for (int j = 0; j < side; ++j)
      for (int i = 0; i <= j; ++i)
        w0[k++] = (i == j) ? M(i, j) : M(i, j) * kSqrt2;
  }
  int rows = p.add_rows(8);
  Eigen::MatrixXd Gd = Eigen::MatrixXd::Zero(8, nvars);
  for (int r = 0; r < 8; ++r) {
    double rhs = 0.0;
    for (int j = 0; j < nvars; ++j) {
      double g = gauss(rng);
      if (std::abs(g) < 0.8) continue;  // keep it sparse
      p.set_entry(rows + r, j, g);
      Gd(r, j) = g;
      rhs += g * w0[j];
    }
    p.h[rows + r] = rhs;
  }
  // Bounded objective by construction: c = G'mu + d with d interior to the
  // dual cone (zero on free vars), so c'w >= mu'h on the feasible set.
  Eigen::VectorXd mu(8);
  for (int r = 0; r < 8; ++r) mu(r) = gauss(rng) * 0.3;
  Eigen::VectorXd cvec = Gd.transpose() * mu;  // d is zero on the free part
  for (int i = 2; i < 5; ++i) cvec(i) += 1.0;  // nonneg part of d
  {
    int k = 5;
    for (int j = 0; j < side; ++j)
      for (int i = 0; i <= j; ++i) cvec(k++) += (i == j) ? 1.0 : 0.0;  // d: identity
  }
  p.c.assign(cvec.data(), cvec.data() + nvars);
  auto sol = solve_conic(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal) << to_string(sol.status);
  double obj0 = 0.0;
  for (int j = 0; j < nvars; ++j) obj0 += p.c[j] * w0[j];
  EXPECT_LE(sol.objective, obj0 + 1e-5);
  EXPECT_LE(sol.primal_residual, 1e-5);
  // Cone membership of the returned iterate.
  for (int i = 2; i < 5; ++i) EXPECT_GE(sol.w[i], -1e-7);
  Eigen::MatrixXd P(side, side);
  int k = 5;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i <= j; ++i) {
      double v = sol.w[k++];
      P(i, j) = P(j, i) = (i == j) ? v : v / kSqrt2;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-6);
}

TEST(ConicProgramText, DumpIsDeterministic) {
  auto p = lp_min_x_at_least_one();
  std::string a = p.to_text();
  std::string b = p.to_text();
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("conic 2 1"), std::string::npos);
  EXPECT_NE(a.find("cones free 1 nonneg 1 psd exp 0"), std::string::npos);
}

}  // namespace
}  // namespace pdclf
