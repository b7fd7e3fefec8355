#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pdclf/conic.hpp"
#include "pdclf/expcone.hpp"

namespace pdclf {

struct SolveOptions {
  double eps = 1e-8;          // relative primal/dual/gap tolerance
  double eps_infeasible = 1e-9;
  int max_iters = 200000;
  int check_interval = 25;
  double alpha = 1.5;         // over-relaxation
  int ruiz_iters = 10;
  double rho_x = 1e-6;         // metric weight on the equality block
  double scale = 1.0;          // initial metric weight on the cone block
  double rho_tau = 10.0;       // metric weight on the homogenizing variable
  bool adaptive_scale = true;  // rebalance the metric from residual ratios
  int scale_interval = 250;    // iterations between rebalance attempts
  bool verbose = false;
};

/// First-order conic solver: ADMM on the homogeneous self-dual embedding
/// (operator splitting a la SCS).  The library-facing program
///     min c'w  s.t.  G w = h,  w in K
/// is handed to the splitting core as the dual of the standard form
///     min c~'x  s.t.  A x + s = b,  s in K*   with
///     A = G^T,  b = c,  c~ = -h,
/// whose dual variable y IS w.  Status mapping follows: standard-form primal
/// infeasibility certifies our problem unbounded, and vice versa.
class ConicSolver {
 public:
  explicit ConicSolver(const ConicProgram& prog, SolveOptions opts = {})
      : prog_(prog), opts_(opts) {}

  ConicSolution solve() {
    setup();
    ConicSolution sol;
    const int n = n_, m = m_;
    // Douglas-Rachford on  0 in M^-1 Q u + M^-1 N_C(u)  over the homogeneous
    // embedding, with a single shadow iterate z.  At a fixed point, u solves
    // the embedding and z - u holds the metric-scaled slack/kappa block.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n + m + 1);
    z(n + m) = 1.0;  // tau
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n + m + 1);
    Eigen::VectorXd ut(n + m + 1), pre(n + m + 1), v(n + m + 1);
    const double znorm_target = std::sqrt(static_cast<double>(n + m + 1));
    int iter = 0;
    for (iter = 1; iter <= opts_.max_iters; ++iter) {
      solve_linear(z, iter == 1, &ut);
      pre = 2.0 * ut - z;
      project_C(pre, &u);
      z += opts_.alpha * (u - ut);

      if (iter % opts_.check_interval == 0 || iter == opts_.max_iters) {
        v = z - u;
        if (check_termination(u, v, iter, &sol)) return sol;
      }
      if (opts_.adaptive_scale && iter % opts_.scale_interval == 0) {
        v = z - u;
        if (rebalance(u, &v)) z = u + v;
      }
      // The embedding is positively homogeneous, so the iterate can be kept
      // on a fixed sphere.  Without this the iterate drifts toward the origin
      // end of the solution ray on badly scaled programs and step sizes decay
      // with it.
      double znorm = z.norm();
      if (znorm > 0.0) z *= znorm_target / znorm;
    }
    // Max iterations: report best-effort solution.
    v = z - u;
    fill_solution(u, v, &sol);
    sol.status = SolveStatus::kMaxIters;
    sol.iterations = opts_.max_iters;
    return sol;
  }

 private:
  void setup() {
    m_ = prog_.num_vars();   // standard-form rows (= our variables)
    n_ = prog_.num_rows();   // standard-form cols (= our equalities)
    A_ = Eigen::SparseMatrix<double>(m_, n_);
    {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(prog_.G_entries.size());
      for (auto& t : prog_.G_entries) trips.emplace_back(t.col(), t.row(), t.value());
      A_.setFromTriplets(trips.begin(), trips.end());
    }
    b_ = Eigen::Map<const Eigen::VectorXd>(prog_.c.data(), m_);
    cvec_ = -Eigen::Map<const Eigen::VectorXd>(prog_.h.data(), n_);

    // --- Ruiz equilibration on A (rows grouped per cone block). ---
    D_ = Eigen::VectorXd::Ones(m_);
    E_ = Eigen::VectorXd::Ones(n_);
    Eigen::SparseMatrix<double> As = A_;
    for (int pass = 0; pass < opts_.ruiz_iters; ++pass) {
      Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m_);
      Eigen::VectorXd cmax = Eigen::VectorXd::Zero(n_);
      for (int k = 0; k < As.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(As, k); it; ++it) {
          double a = std::abs(it.value());
          rmax(it.row()) = std::max(rmax(it.row()), a);
          cmax(it.col()) = std::max(cmax(it.col()), a);
        }
      group_row_scales(&rmax);
      Eigen::VectorXd dr(m_), dc(n_);
      for (int i = 0; i < m_; ++i) dr(i) = rmax(i) > 0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
      for (int j = 0; j < n_; ++j) dc(j) = cmax(j) > 0 ? 1.0 / std::sqrt(cmax(j)) : 1.0;
      As = dr.asDiagonal() * As * dc.asDiagonal();
      D_ = D_.cwiseProduct(dr);
      E_ = E_.cwiseProduct(dc);
    }
    bs_ = D_.asDiagonal() * b_;
    cs_ = E_.asDiagonal() * cvec_;
    scale_b_ = std::max(bs_.norm(), 1e-8);
    scale_c_ = std::max(cs_.norm(), 1e-8);
    bs_ /= scale_b_;
    cs_ /= scale_c_;
    As_ = As;
    AsT_ = As_.transpose();

    // Factor rho_x I + A'A / rho (SPD, side n_).  The symbolic pattern is
    // fixed, so metric updates only need a numeric refactorization.
    AtA_ = AsT_ * As_;
    ident_.resize(n_, n_);
    ident_.setIdentity();
    rho_x_ = opts_.rho_x;
    rho_tau_ = opts_.rho_tau;
    rho_ = std::max(1e-6, std::min(1e6, opts_.scale));
    Eigen::SparseMatrix<double> Mred = AtA_ * (1.0 / rho_) + ident_ * rho_x_;
    ldlt_.analyzePattern(Mred);
    ldlt_.factorize(Mred);
    if (ldlt_.info() != Eigen::Success)
      throw SolverFailure("failed to factor the splitting linear system");
    refresh_tau_terms();
  }

  // g = (M + Q)^-1-style image of q = (c, b); caches the tau Schur terms.
  void refresh_tau_terms() {
    Eigen::VectorXd gq(n_ + m_);
    apply_Minv(cs_, bs_, &gq);
    g_ = gq;
    double qg = cs_.dot(gq.head(n_)) + bs_.dot(gq.tail(m_));
    qg_den_ = rho_tau_ + qg;
  }

  /// Adaptive splitting metric.  The diagonal metric weighs the cone block by
  /// rho; fixed points are metric-independent, so updating rho mid-run only
  /// requires rescaling the v cone block (v = M^-1 Q u at a fixed point) and
  /// refactorizing the reduced system numerically.  The update drives the two
  /// relative residuals toward each other, which is what breaks the
  /// collapsed-tau stall: a lopsided metric lets one block converge at the
  /// expense of the other.
  bool rebalance(const Eigen::VectorXd& u, Eigen::VectorXd* v) {
    Candidate cand = unscale(u, *v);
    double rd = (A_ * cand.x + cand.s - b_).norm() / (1.0 + b_.norm());
    double rp = (A_.transpose() * cand.y + cvec_).norm() / (1.0 + cvec_.norm());
    if (!(rp > 0.0) || !(rd > 0.0)) return false;
    double factor = std::sqrt(rp / rd);
    factor = std::min(10.0, std::max(0.1, factor));
    if (factor > 0.5 && factor < 2.0) return false;
    double rho_new = std::min(1e6, std::max(1e-6, rho_ * factor));
    if (rho_new == rho_) return false;
    if (opts_.verbose)
      std::fprintf(stderr,
                   "  rebalance: rp %.2e  rd %.2e  rho %.2e -> %.2e\n", rp, rd,
                   rho_, rho_new);
    v->segment(n_, m_) *= rho_ / rho_new;
    rho_ = rho_new;
    Eigen::SparseMatrix<double> Mred = AtA_ * (1.0 / rho_) + ident_ * rho_x_;
    ldlt_.factorize(Mred);
    if (ldlt_.info() != Eigen::Success)
      throw SolverFailure("failed to refactor the splitting linear system");
    refresh_tau_terms();
    return true;
  }

  // Rows of one PSD block / exp triple must share a scale factor.
  void group_row_scales(Eigen::VectorXd* rmax) const {
    const ConeLayout& K = prog_.cones;
    for (size_t blk = 0; blk < K.psd_sides.size(); ++blk) {
      int off = K.psd_offset(static_cast<int>(blk));
      int len = K.psd_sides[blk] * (K.psd_sides[blk] + 1) / 2;
      double mx = 0.0;
      for (int i = 0; i < len; ++i) mx = std::max(mx, (*rmax)(off + i));
      for (int i = 0; i < len; ++i) (*rmax)(off + i) = mx;
    }
    for (int t = 0; t < K.num_exp; ++t) {
      int off = K.exp_offset(t);
      double mx = std::max({(*rmax)(off), (*rmax)(off + 1), (*rmax)(off + 2)});
      for (int i = 0; i < 3; ++i) (*rmax)(off + i) = mx;
    }
  }

  /// Solve [[rho_x I, A'],[-A, rho I]] [p; q] = [w1; w2].
  void apply_Minv(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                  Eigen::VectorXd* out) const {
    Eigen::VectorXd rhs = w1 - AsT_ * w2 * (1.0 / rho_);
    Eigen::VectorXd p = ldlt_.solve(rhs);
    Eigen::VectorXd q = (w2 + As_ * p) * (1.0 / rho_);
    out->resize(n_ + m_);
    out->head(n_) = p;
    out->tail(m_) = q;
  }

  // Metric-weighted inner product over the (x, y) blocks.
  double dot_R(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return rho_x_ * a.head(n_).dot(b.head(n_)) +
           rho_ * a.segment(n_, m_).dot(b.segment(n_, m_));
  }

  /// Linear half of the splitting step.  The (x, y) block solves the skew
  /// system affinely in tau: z_xy = Mw - g tau.  Substituting that line into
  /// the orthogonality relation <z, z - w>_M = 0 (which the full skew solve
  /// satisfies identically) gives a quadratic in tau; taking its larger root
  /// agrees with the plain Schur solution whenever that root is the stable
  /// one, and keeps tau away from the degenerate small root otherwise.
  void solve_linear(const Eigen::VectorXd& w, bool first, Eigen::VectorXd* z) const {
    Eigen::VectorXd Mw(n_ + m_);
    apply_Minv(rho_x_ * w.head(n_), rho_ * w.segment(n_, m_), &Mw);
    double ztau;
    if (first) {
      ztau = w(n_ + m_);
    } else {
      // a tau^2 + b tau + c = 0 with a = rho_tau + <q, g> (= rho_tau + |g|_M^2).
      double a = qg_den_;
      double b = dot_R(w, g_) - 2.0 * dot_R(Mw, g_) - rho_tau_ * w(n_ + m_);
      double c = dot_R(Mw, Mw) - dot_R(Mw, w);
      double disc = b * b - 4.0 * a * c;
      ztau = (std::sqrt(std::max(disc, 0.0)) - b) / (2.0 * a);
    }
    z->resize(n_ + m_ + 1);
    z->head(n_ + m_) = Mw - g_ * ztau;
    (*z)(n_ + m_) = ztau;
  }

  /// C = R^n x K x R+ : x free, y in our original cone K, tau >= 0.
  void project_C(const Eigen::VectorXd& in, Eigen::VectorXd* out) const {
    *out = in;
    const ConeLayout& K = prog_.cones;
    auto y = out->segment(n_, m_);
    // free part: identity.
    int off = K.nonneg_offset();
    for (int i = 0; i < K.num_nonneg; ++i) y(off + i) = std::max(0.0, y(off + i));
    for (size_t blk = 0; blk < K.psd_sides.size(); ++blk) {
      int s = K.psd_sides[blk];
      int boff = K.psd_offset(static_cast<int>(blk));
      project_psd(y.data() + boff, s);
    }
    for (int t = 0; t < K.num_exp; ++t) {
      int eoff = K.exp_offset(t);
      auto p = project_exp_cone(y(eoff), y(eoff + 1), y(eoff + 2));
      y(eoff) = p[0];
      y(eoff + 1) = p[1];
      y(eoff + 2) = p[2];
    }
    (*out)(n_ + m_) = std::max(0.0, (*out)(n_ + m_));
  }

  static void project_psd(double* svec, int s) {
    if (s == 1) {
      svec[0] = std::max(0.0, svec[0]);
      return;
    }
    static constexpr double kSqrt2 = 1.4142135623730951;
    Eigen::MatrixXd S(s, s);
    int k = 0;
    for (int j = 0; j < s; ++j)
      for (int i = 0; i <= j; ++i) {
        double val = svec[k++];
        if (i == j) {
          S(i, j) = val;
        } else {
          S(i, j) = S(j, i) = val / kSqrt2;
        }
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    S = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    k = 0;
    for (int j = 0; j < s; ++j)
      for (int i = 0; i <= j; ++i) {
        svec[k++] = (i == j) ? S(i, j) : S(i, j) * kSqrt2;
      }
  }

  /// Unscaled candidate triplet (x, y, s) in standard-form space.
  struct Candidate {
    Eigen::VectorXd x, y, s;
    double tau;
  };

  Candidate unscale(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Candidate c;
    c.tau = u(n_ + m_);
    double t = c.tau > 0 ? c.tau : 1.0;
    c.x = scale_b_ * (E_.asDiagonal() * u.head(n_)) / t;
    c.y = scale_c_ * (D_.asDiagonal() * u.segment(n_, m_)) / t;
    // v holds M^-1 of the slack at a fixed point, so undo the metric weight.
    c.s = scale_b_ * rho_ * (D_.asDiagonal().inverse() * v.segment(n_, m_)) / t;
    return c;
  }

  bool check_termination(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         int iter, ConicSolution* sol) const {
    Candidate cand = unscale(u, v);
    double tau = u(n_ + m_), kappa = v(n_ + m_);

    if (tau > 1e-9 * std::max(1.0, kappa)) {
      // Feasibility/optimality test of the standard-form pair.
      Eigen::VectorXd pr = A_ * cand.x + cand.s - b_;
      Eigen::VectorXd dr = A_.transpose() * cand.y + cvec_;
      double cx = cvec_.dot(cand.x), by = b_.dot(cand.y);
      double pres = pr.norm() / (1.0 + b_.norm());
      double dres = dr.norm() / (1.0 + cvec_.norm());
      double gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
      if (opts_.verbose && (iter % (opts_.check_interval * 80) == 0))
        std::fprintf(stderr,
                     "  it %6d  pres %.2e  dres %.2e  gap %.2e  tau %.2e  "
                     "kappa %.2e  obj %.6f\n",
                     iter, pres, dres, gap, tau, kappa, -by);
      if (pres <= opts_.eps && dres <= opts_.eps && gap <= opts_.eps) {
        fill_solution(u, v, sol);
        sol->status = SolveStatus::kOptimal;
        sol->iterations = iter;
        return true;
      }
    }
    // Infeasibility certificates.
    double by = b_.dot(cand.y * (cand.tau > 0 ? cand.tau : 1.0));
    Eigen::VectorXd yraw = cand.y * (cand.tau > 0 ? cand.tau : 1.0);
    if (by < -1e-12) {
      double res = (A_.transpose() * yraw).norm() * b_.norm() / (-by);
      if (res <= opts_.eps_infeasible) {
        sol->status = SolveStatus::kUnbounded;  // our problem is unbounded
        sol->iterations = iter;
        sol->w.assign(prog_.num_vars(), 0.0);
        return true;
      }
    }
    Eigen::VectorXd xraw = cand.x * (cand.tau > 0 ? cand.tau : 1.0);
    Eigen::VectorXd sraw = cand.s * (cand.tau > 0 ? cand.tau : 1.0);
    double cx = cvec_.dot(xraw);
    if (cx < -1e-12) {
      double res = (A_ * xraw + sraw).norm() * cvec_.norm() / (-cx);
      if (res <= opts_.eps_infeasible) {
        sol->status = SolveStatus::kInfeasible;  // our equalities + cones empty
        sol->iterations = iter;
        sol->w.assign(prog_.num_vars(), 0.0);
        return true;
      }
    }
    return false;
  }

  void fill_solution(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                     ConicSolution* sol) const {
    Candidate cand = unscale(u, v);
    // Our primal w is the standard-form dual variable y.
    sol->w.assign(cand.y.data(), cand.y.data() + m_);
    double obj = 0.0;
    for (int i = 0; i < m_; ++i) obj += prog_.c[i] * sol->w[i];
    sol->objective = obj;
    Eigen::VectorXd dr = A_.transpose() * cand.y + cvec_;  // = Gw - h
    sol->primal_residual = dr.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd pr = A_ * cand.x + cand.s - b_;
    sol->dual_residual = pr.lpNorm<Eigen::Infinity>();
    double cx = cvec_.dot(cand.x), by = b_.dot(cand.y);
    sol->gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
  }

  const ConicProgram& prog_;
  SolveOptions opts_;
  int m_ = 0, n_ = 0;
  Eigen::SparseMatrix<double> A_, As_, AsT_;
  Eigen::SparseMatrix<double> AtA_, ident_;
  Eigen::VectorXd b_, cvec_, bs_, cs_, D_, E_, g_;
  double scale_b_ = 1.0, scale_c_ = 1.0, qg_den_ = 1.0;
  double rho_ = 1.0, rho_x_ = 1e-6, rho_tau_ = 1.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

inline ConicSolution solve_conic(const ConicProgram& prog, SolveOptions opts = {}) {
  return ConicSolver(prog, opts).solve();
}

}  // namespace pdclf
