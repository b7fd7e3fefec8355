#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdclf/scenario.hpp"
#include "pdclf/solver.hpp"
#include "pdclf/sos.hpp"

namespace pdclf {

// ---------------------------------------------------------------------------
// Newton-polytope basis reduction.
//
// If a (matrix) polynomial admits a sum-of-squares representation, the Gram
// basis can be restricted to monomials m with 2m inside the convex hull of
// the union support.  Membership is decided exactly by a tiny feasibility LP
// on the in-repo conic solver; anything the LP cannot certify as outside is
// kept, so the filter is always sound.
// ---------------------------------------------------------------------------

inline bool in_support_hull(const Monomial& target,
                            const std::vector<Monomial>& support) {
  for (const Monomial& s : support)
    if (s == target) return true;
  if (support.empty()) return false;
  std::set<int> vars;
  for (const Monomial& s : support)
    for (auto& [v, e] : s.factors()) vars.insert(v);
  for (auto& [v, e] : target.factors()) vars.insert(v);
  std::vector<int> vl(vars.begin(), vars.end());
  int d = static_cast<int>(vl.size());
  int ns = static_cast<int>(support.size());
  if (d == 0) return false;  // distinct constants cannot coincide

  // Convex-combination feasibility:  sum_s lambda_s * exp(s) = exp(target),
  // sum_s lambda_s = 1, lambda >= 0.
  ConicProgram lp;
  lp.cones.num_nonneg = ns;
  lp.c.assign(static_cast<size_t>(ns), 0.0);
  lp.add_rows(d + 1);
  for (int s = 0; s < ns; ++s) {
    for (int k = 0; k < d; ++k) {
      int e = support[static_cast<size_t>(s)].degree_of(vl[static_cast<size_t>(k)]);
      if (e != 0) lp.set_entry(k, s, static_cast<double>(e));
    }
    lp.set_entry(d, s, 1.0);
  }
  for (int k = 0; k < d; ++k)
    lp.h[static_cast<size_t>(k)] =
        static_cast<double>(target.degree_of(vl[static_cast<size_t>(k)]));
  lp.h[static_cast<size_t>(d)] = 1.0;

  SolveOptions o;
  o.eps = 1e-7;
  o.eps_infeasible = 1e-8;
  o.max_iters = 20000;
  ConicSolution sol = solve_conic(lp, o);
  return sol.status != SolveStatus::kInfeasible;
}

/// Keep only candidates m whose double 2m lies in the support hull.
inline std::vector<Monomial> newton_prune(
    const std::vector<Monomial>& candidates,
    const std::vector<Monomial>& support) {
  std::vector<Monomial> kept;
  for (const Monomial& m : candidates)
    if (in_support_hull(m * m, support)) kept.push_back(m);
  return kept;
}

/// Gram basis for a matrix-SOS constraint: the generic degree/box candidate
/// set, optionally filtered through the union-support Newton polytope.
inline std::vector<Monomial> newton_matrix_basis(const APolyMat& M,
                                                 bool hull_filter = true) {
  std::set<int> vars;
  std::map<int, int> var_degs;
  std::set<Monomial> supp;
  int dmax = 0;
  int dmin = std::numeric_limits<int>::max();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      const APoly& p = M(i, j);
      if (p.is_zero()) continue;
      for (int v : p.vars_appearing()) {
        vars.insert(v);
        var_degs[v] = std::max(var_degs[v], p.degree_in(v));
      }
      dmax = std::max(dmax, p.total_degree());
      dmin = std::min(dmin, p.min_total_degree());
      for (auto& [mono, c] : p.terms()) supp.insert(mono);
    }
  if (supp.empty()) return {};
  if (dmin > dmax) dmin = 0;
  auto candidates = gram_basis_for(vars, dmin, dmax, var_degs, true);
  if (!hull_filter) return candidates;
  std::vector<Monomial> sv(supp.begin(), supp.end());
  return newton_prune(candidates, sv);
}

// ---------------------------------------------------------------------------
// Closed-loop decrease matrix.
// ---------------------------------------------------------------------------

template <class C>
Polynomial<C> with_coeffs(const Poly& p) {
  Polynomial<C> r(p.space());
  for (auto& [m, c] : p.terms()) r.add_term(m, C(c));
  return r;
}

template <class C>
PolyMatrix<C> with_coeffs(const PolyMat& M) {
  PolyMatrix<C> r(M.space(), M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) r(i, j) = with_coeffs<C>(M(i, j));
  return r;
}

template <class C>
PolyMatrix<C> poly_scale(const PolyMatrix<C>& M, const Polynomial<C>& s) {
  PolyMatrix<C> r(M.space(), M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) r(i, j) = M(i, j) * s;
  return r;
}

/// The matrix whose negative definiteness certifies closed-loop decrease of
/// V = x' X^-1 x under u = Y X^-1 x:
///   sym(A X + B Y) - sum_{j in dep} dX/dx_j * f_j - sum_k dX/dtheta_k * rate_k.
/// X may only depend on states whose dynamics carry no input (zero rows of
/// B); dep_states lists those state indices.
template <class C>
PolyMatrix<C> decrease_matrix(const NpvSystem& sys, const PolyMatrix<C>& X,
                              const PolyMatrix<C>& Y,
                              const std::vector<int>& dep_states) {
  std::set<int> zr(sys.structure.zero_rows.begin(),
                   sys.structure.zero_rows.end());
  std::set<int> dep_vars;
  for (int j : dep_states) {
    if (j < 0 || j >= sys.n)
      throw ScenarioError("synthesis.X_states: state index out of range");
    if (zr.count(j) == 0)
      throw ScenarioError(
          "synthesis.X_states: X may only depend on states with control-free "
          "dynamics, but the input matrix row for " +
          sys.space->name(sys.state_vars[static_cast<size_t>(j)]) +
          " is nonzero");
    dep_vars.insert(sys.state_vars[static_cast<size_t>(j)]);
  }
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j)
      for (int v : X(i, j).vars_appearing())
        if (sys.space->var_class(v) == VarClass::kState && dep_vars.count(v) == 0)
          throw ScenarioError("candidate function depends on state " +
                              sys.space->name(v) +
                              " outside its declared control-free set");

  PolyMatrix<C> F = (with_coeffs<C>(sys.A) * X + with_coeffs<C>(sys.B) * Y).sym();
  for (int j : dep_states)
    F -= poly_scale(X.diff(sys.state_vars[static_cast<size_t>(j)]),
                    with_coeffs<C>(sys.f[static_cast<size_t>(j)]));
  for (size_t k = 0; k < sys.param_vars.size(); ++k)
    F -= poly_scale(X.diff(sys.param_vars[k]),
                    Polynomial<C>::variable(X.space(), sys.rate_vars[k]));
  return F;
}

// ---------------------------------------------------------------------------
// Domain normalization x = S x_hat (S = diag(scale)).  The synthesized
// certificate transforms back by congruence, so every guarantee survives.
// ---------------------------------------------------------------------------

inline NpvSystem scaled_system(const NpvSystem& sys,
                               const std::vector<double>& scale) {
  if (static_cast<int>(scale.size()) != sys.n)
    throw ScenarioError("synthesis.scale: expected " + std::to_string(sys.n) +
                        " entries");
  std::map<int, double> up;
  for (int j = 0; j < sys.n; ++j)
    up[sys.state_vars[static_cast<size_t>(j)]] = scale[static_cast<size_t>(j)];

  NpvSystem out = sys;
  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j)
      out.A(i, j) = sys.A(i, j).scale_vars(up) *
                    (scale[static_cast<size_t>(j)] / scale[static_cast<size_t>(i)]);
  for (int i = 0; i < sys.n; ++i)
    for (int k = 0; k < sys.m; ++k)
      out.B(i, k) = sys.B(i, k).scale_vars(up) * (1.0 / scale[static_cast<size_t>(i)]);
  for (int i = 0; i < sys.n; ++i)
    out.f[static_cast<size_t>(i)] =
        sys.f[static_cast<size_t>(i)].scale_vars(up) * (1.0 / scale[static_cast<size_t>(i)]);
  for (size_t r = 0; r < sys.x_rows.size(); ++r)
    for (int a = 0; a < sys.x_rows[r].rows(); ++a)
      for (int j = 0; j < sys.n; ++j)
        out.x_rows[r](a, j) =
            sys.x_rows[r](a, j).scale_vars(up) * scale[static_cast<size_t>(j)];
  out.structure = zero_rows(out.B);
  return out;
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

struct SolverDiagnostics {
  std::string status;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double objective = 0.0;
};

struct Certificate {
  std::string scenario_name;
  std::string system_hash;
  std::string mode = "pd";
  PolyMat X;  // original coordinates
  PolyMat Y;
  Eigen::MatrixXd X0;
  double eps1 = 0.0;  // X >= eps1 I on the domain
  double eps2 = 0.0;  // X <= eps2 I
  double eps3 = 0.0;  // decrease matrix <= -eps3 I
  double logdet_X0 = 0.0;
  std::vector<double> scale;
  SolverDiagnostics solver;
};

inline nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["format"] = "pdclf-certificate-1";
  j["name"] = c.scenario_name;
  j["system_hash"] = c.system_hash;
  j["mode"] = c.mode;
  j["epsilons"] = {{"e1", c.eps1}, {"e2", c.eps2}, {"e3", c.eps3}};
  j["logdet_X0"] = c.logdet_X0;
  j["scale"] = c.scale;
  auto mat_to_json = [](const PolyMat& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < M.cols(); ++k) row.push_back(to_string(M(i, k)));
      rows.push_back(row);
    }
    return rows;
  };
  j["X"] = mat_to_json(c.X);
  j["Y"] = mat_to_json(c.Y);
  nlohmann::json x0 = nlohmann::json::array();
  for (int i = 0; i < c.X0.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < c.X0.cols(); ++k) row.push_back(c.X0(i, k));
    x0.push_back(row);
  }
  j["X0"] = x0;
  j["solver"] = {{"status", c.solver.status},
                 {"iterations", c.solver.iterations},
                 {"primal_residual", c.solver.primal_residual},
                 {"dual_residual", c.solver.dual_residual},
                 {"gap", c.solver.gap},
                 {"objective", c.solver.objective}};
  return j;
}

inline Certificate certificate_from_json_text(const std::string& text,
                                              const VarSpacePtr& space) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("certificate: JSON parse error: ") + e.what());
  }
  auto fail = [](const std::string& what) -> void {
    throw ScenarioError("certificate: " + what);
  };
  if (!j.is_object() || !j.contains("format") ||
      j["format"] != "pdclf-certificate-1")
    fail("unsupported or missing format marker");
  for (const char* key : {"name", "system_hash", "mode", "epsilons",
                          "logdet_X0", "scale", "X", "Y", "X0", "solver"})
    if (!j.contains(key)) fail(std::string("missing key ") + key);

  Certificate c;
  c.scenario_name = j["name"].get<std::string>();
  c.system_hash = j["system_hash"].get<std::string>();
  c.mode = j["mode"].get<std::string>();
  c.eps1 = j["epsilons"].at("e1").get<double>();
  c.eps2 = j["epsilons"].at("e2").get<double>();
  c.eps3 = j["epsilons"].at("e3").get<double>();
  c.logdet_X0 = j["logdet_X0"].get<double>();
  c.scale = j["scale"].get<std::vector<double>>();

  auto mat_from_json = [&](const nlohmann::json& rows, const char* key) {
    if (!rows.is_array() || rows.empty()) fail(std::string(key) + ": expected rows");
    int r = static_cast<int>(rows.size());
    int ccols = static_cast<int>(rows[0].size());
    PolyMat M(space, r, ccols);
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != ccols)
        fail(std::string(key) + ": ragged rows");
      for (int k = 0; k < ccols; ++k)
        M(i, k) = parse_poly(
            rows[static_cast<size_t>(i)][static_cast<size_t>(k)].get<std::string>(),
            space);
    }
    return M;
  };
  c.X = mat_from_json(j["X"], "X");
  c.Y = mat_from_json(j["Y"], "Y");
  const nlohmann::json& x0 = j["X0"];
  int n = static_cast<int>(x0.size());
  c.X0.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      c.X0(i, k) = x0[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
  const nlohmann::json& sv = j["solver"];
  c.solver.status = sv.at("status").get<std::string>();
  c.solver.iterations = sv.at("iterations").get<int>();
  c.solver.primal_residual = sv.at("primal_residual").get<double>();
  c.solver.dual_residual = sv.at("dual_residual").get<double>();
  c.solver.gap = sv.at("gap").get<double>();
  c.solver.objective = sv.at("objective").get<double>();
  return c;
}

inline void save_certificate(const Certificate& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError(path + ": cannot write certificate");
  out << certificate_to_json(c).dump(2) << "\n";
}

inline Certificate load_certificate(const std::string& path,
                                    const VarSpacePtr& space) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open certificate file");
  std::stringstream ss;
  ss << in.rdbuf();
  return certificate_from_json_text(ss.str(), space);
}

// ---------------------------------------------------------------------------
// Synthesis: compile the stability conditions into one conic program.
// ---------------------------------------------------------------------------

inline SolveOptions synthesis_solve_options() {
  SolveOptions o;
  o.eps = 1e-8;
  o.max_iters = 200000;
  return o;
}

struct FamilySlack {
  std::string family;
  double slack = 0.0;
};

struct SynthesisResult {
  SolveStatus status = SolveStatus::kNumericalError;
  Certificate certificate;            // valid iff status == kOptimal
  std::vector<FamilySlack> diagnosis; // filled when status == kInfeasible
  SolverDiagnostics solver;           // always filled from the main solve
};

/// The assembled conic formulation plus handles to the decision quantities,
/// kept so results can be read back out after a solve.
struct SynthesisProgram {
  SosProgram prog;
  NpvSystem sys;           // scaled copy used to build the conditions
  std::vector<double> s;   // per-state scale factors
  std::vector<int> dep;    // states X may depend on
  bool pd = true;
  APolyMat X, Y;
  std::vector<std::vector<LinExpr>> X0;
  LinExpr eps2;

  SynthesisProgram(const VarSpacePtr& space, const NpvSystem& scaled)
      : prog(space), sys(scaled), X(space, 0, 0), Y(space, 0, 0) {}
};

/// Assemble the synthesis conditions.  With both optionals null this is the
/// volume-maximization program.  With `trace_weight` set the objective is
/// replaced by the linearization  max tr(W X0)  (used to walk toward the
/// volume optimum through plain semidefinite solves).  With `X0_pin` set the
/// inner ellipsoid is frozen at the given (scaled-coordinates) matrix and the
/// program becomes a pure feasibility problem, which the first-order solver
/// certifies to much tighter accuracy than the degenerate optimum of the
/// original objective.
inline SynthesisProgram build_synthesis_program(
    const Scenario& sc, const Eigen::MatrixXd* X0_pin = nullptr,
    const Eigen::MatrixXd* trace_weight = nullptr) {
  const SynthesisConfig& cfg = sc.synthesis;
  const int n = sc.system.n, m = sc.system.m;
  std::vector<double> s =
      cfg.scale.empty() ? std::vector<double>(static_cast<size_t>(n), 1.0)
                        : cfg.scale;
  NpvSystem scaled = scaled_system(sc.system, s);
  const VarSpacePtr& space = scaled.space;

  SynthesisProgram sp(space, scaled);
  sp.s = std::move(s);
  sp.pd = (cfg.mode != "robust");
  const bool pd = sp.pd;
  NpvSystem& sys = sp.sys;

  std::vector<int> dep = cfg.X_states.empty() ? sys.structure.zero_rows
                                              : cfg.X_states;
  std::sort(dep.begin(), dep.end());
  dep.erase(std::unique(dep.begin(), dep.end()), dep.end());
  sp.dep = dep;

  SosProgram& prog = sp.prog;

  // X(x_dep, theta), symmetric, entrywise free polynomials.
  std::vector<int> Xvars;
  for (int j : dep) Xvars.push_back(sys.state_vars[static_cast<size_t>(j)]);
  if (pd) Xvars.insert(Xvars.end(), sys.param_vars.begin(), sys.param_vars.end());
  auto Xbasis = monomial_basis(Xvars, 0, cfg.deg_X);
  APolyMat& X = sp.X;
  X = APolyMat(space, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      APoly e = prog.free_poly(
          "X[" + std::to_string(i) + "][" + std::to_string(j) + "]", Xbasis);
      X(i, j) = e;
      if (j > i) X(j, i) = e;
    }

  // Y(x, theta).
  std::vector<int> Yvars = sys.state_vars;
  Yvars.insert(Yvars.end(), sys.param_vars.begin(), sys.param_vars.end());
  auto Ybasis = monomial_basis(Yvars, 0, cfg.deg_Y);
  APolyMat& Y = sp.Y;
  Y = APolyMat(space, m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      Y(i, j) = prog.free_poly(
          "Y[" + std::to_string(i) + "][" + std::to_string(j) + "]", Ybasis);

  // Upper-bound level (free unless pinned) and inner ellipsoid shape.
  sp.eps2 = cfg.eps2_pin > 0
                ? LinExpr(cfg.eps2_pin)
                : LinExpr::variable(prog.add_free("upper_bound.level"));
  const LinExpr& eps2 = sp.eps2;
  sp.X0.assign(static_cast<size_t>(n),
               std::vector<LinExpr>(static_cast<size_t>(n)));
  std::vector<std::vector<LinExpr>>& X0 = sp.X0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      LinExpr v = X0_pin ? LinExpr((*X0_pin)(i, j))
                         : LinExpr::variable(prog.add_free(
                               "X0[" + std::to_string(i) + "][" +
                               std::to_string(j) + "]"));
      X0[static_cast<size_t>(i)][static_cast<size_t>(j)] = v;
      X0[static_cast<size_t>(j)][static_cast<size_t>(i)] = v;
    }

  // Localizer ingredients.
  std::vector<Poly> hs = sys.theta_set;
  std::vector<Poly> cs;
  for (size_t j = 0; j < sys.x_rows.size(); ++j) cs.push_back(sys.c_poly(static_cast<int>(j)));
  std::vector<Poly> rates;
  for (size_t k = 0; k < sys.rate_box.size(); ++k) {
    Poly td = Poly::variable(space, sys.rate_vars[k]);
    rates.push_back((td - Poly::constant(space, sys.rate_box[k].first)) *
                    (Poly::constant(space, sys.rate_box[k].second) - td));
  }
  const int mh = cfg.deg_mult / 2;

  auto subtract_localizers = [&](APolyMat* M, const std::string& fam, int side,
                                 const std::vector<int>& mvars, bool use_h,
                                 bool use_c, bool use_rates) {
    auto mb = monomial_basis(mvars, 0, mh);
    if (use_h)
      for (size_t i = 0; i < hs.size(); ++i)
        *M -= poly_scale(
            prog.gram_poly_matrix(fam + ".h[" + std::to_string(i) + "]", side, mb),
            with_coeffs<LinExpr>(hs[i]));
    if (use_c)
      for (size_t j = 0; j < cs.size(); ++j)
        *M -= poly_scale(
            prog.gram_poly_matrix(fam + ".c[" + std::to_string(j) + "]", side, mb),
            with_coeffs<LinExpr>(cs[j]));
    if (use_rates)
      for (size_t k = 0; k < rates.size(); ++k)
        *M -= poly_scale(
            prog.gram_poly_matrix(fam + ".rate[" + std::to_string(k) + "]", side, mb),
            with_coeffs<LinExpr>(rates[k]));
  };
  auto require_family = [&](const APolyMat& M, const std::string& fam) {
    if (cfg.prune)
      prog.require_matrix_sos(M, fam, newton_matrix_basis(M, true));
    else
      prog.require_matrix_sos(M, fam, false);
  };

  std::vector<int> xp = sys.state_vars;
  xp.insert(xp.end(), sys.param_vars.begin(), sys.param_vars.end());
  std::vector<int> xpr = xp;
  xpr.insert(xpr.end(), sys.rate_vars.begin(), sys.rate_vars.end());

  {  // X - eps1 I >= 0 on X_set x Theta
    APolyMat M = X - with_coeffs<LinExpr>(PolyMat::identity(space, n, cfg.eps1));
    subtract_localizers(&M, "lower_bound", n, xp, true, true, false);
    require_family(M, "lower_bound");
  }
  {  // eps2 I - X >= 0
    APolyMat M(space, n, n);
    for (int i = 0; i < n; ++i) M(i, i) = APoly(space, eps2);
    M -= X;
    subtract_localizers(&M, "upper_bound", n, xp, true, true, false);
    require_family(M, "upper_bound");
  }
  {  // closed-loop decrease: -(F + eps3 I) >= 0 on the rate box
    APolyMat F = decrease_matrix<LinExpr>(sys, X, Y, dep);
    APolyMat M = with_coeffs<LinExpr>(PolyMat::identity(space, n, -cfg.eps3));
    M -= F;
    subtract_localizers(&M, "decrease", n, pd ? xpr : xp, true, true, pd);
    require_family(M, "decrease");
  }
  for (size_t j = 0; j < sys.x_rows.size(); ++j) {
    // Level set containment: [[I, C X], [X C', X]] >= 0 keeps the unit
    // sublevel set of V inside |C x| <= 1.
    const PolyMat& C = sys.x_rows[j];
    int r = C.rows();
    APolyMat CX = with_coeffs<LinExpr>(C) * X;
    APolyMat M(space, r + n, r + n);
    for (int a = 0; a < r; ++a) M(a, a) = APoly(space, LinExpr(1.0));
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < n; ++b) {
        M(a, r + b) = CX(a, b);
        M(r + b, a) = CX(a, b);
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) M(r + a, r + b) = X(a, b);
    std::string fam = "region[" + std::to_string(j) + "]";
    subtract_localizers(&M, fam, r + n, xp, true, cfg.border_x_localizers, false);
    require_family(M, fam);
  }
  {  // X >= X0 on the domain
    APolyMat M = X;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        M(i, j) -= APoly(space, X0[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    subtract_localizers(&M, "inner_ellipsoid", n, xp, true, true, false);
    require_family(M, "inner_ellipsoid");
  }

  LinExpr objective(0.0);
  if (X0_pin) {
    // Feasibility pass: nothing to optimize.
  } else if (trace_weight) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        objective -= X0[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                     (*trace_weight)(i, j);
  } else if (cfg.trace_objective) {
    for (int i = 0; i < n; ++i)
      objective -= X0[static_cast<size_t>(i)][static_cast<size_t>(i)];
  } else {
    objective = LinExpr(0.0) - prog.logdet_lower_bound(X0, "inner_volume");
  }
  prog.set_objective(objective);
  return sp;
}

namespace detail {

inline SolverDiagnostics solver_diagnostics(const ConicSolution& sol,
                                            double objective_offset) {
  SolverDiagnostics d;
  d.status = to_string(sol.status);
  d.iterations = sol.iterations;
  d.primal_residual = sol.primal_residual;
  d.dual_residual = sol.dual_residual;
  d.gap = sol.gap;
  d.objective = sol.objective + objective_offset;
  return d;
}

inline Certificate extract_certificate(const Scenario& sc,
                                       const SynthesisProgram& sp,
                                       const SosProgram::Compiled& compiled,
                                       const ConicSolution& sol) {
  const SynthesisConfig& cfg = sc.synthesis;
  const int n = sc.system.n, m = sc.system.m;
  const std::vector<double>& s = sp.s;
  const VarSpacePtr& space = sp.sys.space;
  SosValues vals(compiled, sol);

  Certificate cert;
  cert.scenario_name = sc.name;
  cert.system_hash = sc.system_hash;
  cert.mode = sp.pd ? "pd" : "robust";
  cert.scale = s;

  std::map<int, double> down;
  for (int j = 0; j < n; ++j)
    down[sp.sys.state_vars[static_cast<size_t>(j)]] =
        1.0 / s[static_cast<size_t>(j)];
  PolyMat Xh = vals.value(sp.X), Yh = vals.value(sp.Y);
  cert.X = PolyMat(space, n, n);
  cert.Y = PolyMat(space, m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cert.X(i, j) = Xh(i, j).scale_vars(down) *
                     (s[static_cast<size_t>(i)] * s[static_cast<size_t>(j)]);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      cert.Y(i, j) = Yh(i, j).scale_vars(down) * s[static_cast<size_t>(j)];
  cert.X0.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cert.X0(i, j) =
          vals.value(sp.X0[static_cast<size_t>(i)][static_cast<size_t>(j)]) *
          s[static_cast<size_t>(i)] * s[static_cast<size_t>(j)];

  double smin = *std::min_element(s.begin(), s.end());
  double smax = *std::max_element(s.begin(), s.end());
  cert.eps1 = cfg.eps1 * smin * smin;
  cert.eps2 = vals.value(sp.eps2) * smax * smax;
  cert.eps3 = cfg.eps3 * smin * smin;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cert.X0);
  double ld = 0.0;
  for (int i = 0; i < n; ++i)
    ld += std::log(std::max(eig.eigenvalues()(i), 1e-300));
  cert.logdet_X0 = ld;

  cert.solver = solver_diagnostics(sol, compiled.objective_offset);
  return cert;
}

}  // namespace detail

inline SynthesisResult synthesize(
    const Scenario& sc, const SolveOptions& opts = synthesis_solve_options()) {
  const int n = sc.system.n;

  // Phase A: maximize the inner ellipsoid volume.  SOS optima sit on
  // degenerate faces, so the first-order solver may stall short of the
  // target tolerance; cap its budget and rescue below if it does.
  SynthesisProgram spA = build_synthesis_program(sc);
  SolveOptions optsA = opts;
  optsA.max_iters = std::min(opts.max_iters, 30000);
  SosProgram::Compiled compA = spA.prog.compile();
  ConicSolution solA = solve_conic(compA.program, optsA);

  SynthesisResult out;
  out.status = solA.status;
  out.solver = detail::solver_diagnostics(solA, compA.objective_offset);

  if (solA.status == SolveStatus::kOptimal) {
    out.certificate = detail::extract_certificate(sc, spA, compA, solA);
    return out;
  }

  if (solA.status == SolveStatus::kMaxIters) {
    // Rescue path.  The volume optimum sits on a degenerate face that the
    // first-order iteration approaches too slowly, and its stalled iterate
    // is not trustworthy.  Instead walk toward the optimum through plain
    // semidefinite solves of the logdet tangent  max tr(W X0), W = X0_prev^-1
    // (no exponential cones), then freeze the best shape slightly shrunk and
    // re-certify the now strictly feasible conditions to full accuracy.
    SolveOptions optsMM = opts;
    optsMM.eps = std::max(opts.eps, 2e-4);
    optsMM.max_iters = std::min(opts.max_iters, 25000);
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd X0A;
    bool have_proposal = false;
    for (int step = 0; step < 2; ++step) {
      SynthesisProgram spW = build_synthesis_program(sc, nullptr, &W);
      SosProgram::Compiled compW = spW.prog.compile();
      ConicSolution solW = solve_conic(compW.program, optsMM);
      if (solW.status != SolveStatus::kOptimal &&
          solW.status != SolveStatus::kMaxIters)
        break;
      SosValues vals(compW, solW);
      Eigen::MatrixXd cand(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          cand(i, j) = vals.value(
              spW.X0[static_cast<size_t>(i)][static_cast<size_t>(j)]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(cand);
      if (ec.eigenvalues().minCoeff() <= 0.0) break;
      X0A = cand;
      have_proposal = true;
      Eigen::VectorXd inv_lam = ec.eigenvalues().cwiseInverse();
      W = ec.eigenvectors() * inv_lam.asDiagonal() *
          ec.eigenvectors().transpose();
    }

    if (have_proposal) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X0A);
      double lmax = eig.eigenvalues().maxCoeff();
      for (double delta : {0.01, 0.05, 0.2}) {
        Eigen::VectorXd lam = eig.eigenvalues();
        for (int i = 0; i < n; ++i)
          lam(i) = std::max(lam(i), 1e-6 * lmax) * (1.0 - delta);
        Eigen::MatrixXd X0B = eig.eigenvectors() * lam.asDiagonal() *
                              eig.eigenvectors().transpose();
        SynthesisProgram spB = build_synthesis_program(sc, &X0B);
        SosProgram::Compiled compB = spB.prog.compile();
        ConicSolution solB = solve_conic(compB.program, opts);
        if (solB.status == SolveStatus::kOptimal) {
          out.status = SolveStatus::kOptimal;
          out.solver = detail::solver_diagnostics(solB, compB.objective_offset);
          out.certificate = detail::extract_certificate(sc, spB, compB, solB);
          return out;
        }
      }
    }
  }

  if (solA.status == SolveStatus::kUnbounded) return out;

  // Phase-1 repair: relax every Gram block by a nonnegative slack and
  // minimize the total.  A strictly positive optimum proves the original
  // conditions cannot hold, and the families carrying the surviving slack
  // name the blocking conditions.
  SosProgram::Compiled dcomp = spA.prog.compile(true);
  SolveOptions dopts = opts;
  dopts.eps = std::max(opts.eps, 1e-7);
  dopts.max_iters = std::min(opts.max_iters, 60000);
  ConicSolution dsol = solve_conic(dcomp.program, dopts);
  std::vector<FamilySlack> slacks;
  double total = 0.0;
  for (auto& [name, col] : dcomp.family_slack_cols) {
    double v = (col >= 0 && col < static_cast<int>(dsol.w.size()))
                   ? dsol.w[static_cast<size_t>(col)]
                   : 0.0;
    if (v > 0.0) total += v;
    if (v > 1e-9) slacks.push_back({name, v});
  }
  std::sort(slacks.begin(), slacks.end(),
            [](const FamilySlack& a, const FamilySlack& b) {
              return a.slack > b.slack;
            });
  if (dsol.status == SolveStatus::kOptimal && total > 1e-6)
    out.status = SolveStatus::kInfeasible;
  if (out.status == SolveStatus::kInfeasible) out.diagnosis = std::move(slacks);
  return out;
}

// ---------------------------------------------------------------------------
// Sampled certificate verification.
// ---------------------------------------------------------------------------

/// Per-coordinate sampling box for the state set: exact for constraint rows
/// with a single constant entry, conservative default elsewhere (samples are
/// always rejection-filtered through the exact membership test).
inline std::vector<std::pair<double, double>> state_box(const NpvSystem& sys) {
  std::vector<double> best(static_cast<size_t>(sys.n),
                           std::numeric_limits<double>::infinity());
  for (const PolyMat& C : sys.x_rows) {
    for (int r = 0; r < C.rows(); ++r) {
      int nz = -1, count = 0;
      bool constant = true;
      double val = 0.0;
      for (int j = 0; j < C.cols(); ++j) {
        const Poly& e = C(r, j);
        if (e.is_zero()) continue;
        if (e.total_degree() > 0) {
          constant = false;
          break;
        }
        ++count;
        nz = j;
        val = e.terms().begin()->second;
      }
      if (constant && count == 1 && std::abs(val) > 0.0)
        best[static_cast<size_t>(nz)] =
            std::min(best[static_cast<size_t>(nz)], 1.0 / std::abs(val));
    }
  }
  std::vector<std::pair<double, double>> box;
  for (int i = 0; i < sys.n; ++i) {
    double b = std::isfinite(best[static_cast<size_t>(i)])
                   ? best[static_cast<size_t>(i)]
                   : 1.0;
    box.emplace_back(-b, b);
  }
  return box;
}

/// Per-parameter interval recovered from single-variable concave quadratics
/// in the parameter-set description; default [0, 1] when none matches.
inline std::vector<std::pair<double, double>> theta_box(const NpvSystem& sys) {
  std::vector<std::pair<double, double>> box(
      static_cast<size_t>(sys.n_theta), {0.0, 1.0});
  for (size_t k = 0; k < sys.param_vars.size(); ++k) {
    int var = sys.param_vars[k];
    for (const Poly& h : sys.theta_set) {
      auto va = h.vars_appearing();
      if (va.size() != 1 || *va.begin() != var) continue;
      if (h.degree_in(var) != 2) continue;
      double c0 = 0, c1 = 0, c2 = 0;
      for (auto& [mono, c] : h.terms()) {
        int e = mono.degree_of(var);
        if (e == 0) c0 = c;
        if (e == 1) c1 = c;
        if (e == 2) c2 = c;
      }
      if (c2 >= 0) continue;
      double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc < 0) continue;
      double r1 = (-c1 + std::sqrt(disc)) / (2.0 * c2);
      double r2 = (-c1 - std::sqrt(disc)) / (2.0 * c2);
      box[k] = {std::min(r1, r2), std::max(r1, r2)};
    }
  }
  return box;
}

/// Deterministic rejection sampler over X_set x Theta x rate box.
class DomainSampler {
 public:
  DomainSampler(const NpvSystem& sys, uint64_t seed)
      : sys_(sys), rng_(seed), xbox_(state_box(sys)), tbox_(theta_box(sys)) {}

  std::vector<double> sample_x() {
    std::vector<double> x(static_cast<size_t>(sys_.n));
    for (int tries = 0; tries < 100000; ++tries) {
      for (int i = 0; i < sys_.n; ++i)
        x[static_cast<size_t>(i)] = uniform(xbox_[static_cast<size_t>(i)]);
      if (sys_.in_x_set(x)) return x;
    }
    throw NumericalGuard("could not draw a state inside the admissible set");
  }

  std::vector<double> sample_theta() {
    std::vector<double> t(static_cast<size_t>(sys_.n_theta));
    for (int tries = 0; tries < 100000; ++tries) {
      for (int k = 0; k < sys_.n_theta; ++k)
        t[static_cast<size_t>(k)] = uniform(tbox_[static_cast<size_t>(k)]);
      if (sys_.in_theta_set(t)) return t;
    }
    throw NumericalGuard("could not draw a parameter inside its set");
  }

  std::vector<double> sample_rate() {
    std::vector<double> r(sys_.rate_box.size());
    for (size_t k = 0; k < sys_.rate_box.size(); ++k)
      r[k] = uniform(sys_.rate_box[k]);
    return r;
  }

  const std::vector<std::pair<double, double>>& x_box() const { return xbox_; }
  const std::vector<std::pair<double, double>>& parameter_box() const {
    return tbox_;
  }

 private:
  double uniform(const std::pair<double, double>& b) {
    return std::uniform_real_distribution<double>(b.first, b.second)(rng_);
  }

  const NpvSystem& sys_;
  std::mt19937_64 rng_;
  std::vector<std::pair<double, double>> xbox_, tbox_;
};

struct VerificationReport {
  int samples_checked = 0;
  int violations = 0;
  std::map<std::string, int> by_family;
  double max_violation = 0.0;
};

inline VerificationReport verify_certificate(const Certificate& cert,
                                             const NpvSystem& sys, int samples,
                                             uint64_t seed = 1,
                                             double tol = 1e-6) {
  VerificationReport rep;
  rep.by_family = {{"lower_bound", 0},
                   {"upper_bound", 0},
                   {"decrease", 0},
                   {"inner_ellipsoid", 0}};
  for (size_t j = 0; j < sys.x_rows.size(); ++j)
    rep.by_family["region[" + std::to_string(j) + "]"] = 0;

  // Dependency set inferred from the certificate itself.
  std::set<int> xstates;
  for (int i = 0; i < cert.X.rows(); ++i)
    for (int j = 0; j < cert.X.cols(); ++j)
      for (int v : cert.X(i, j).vars_appearing())
        if (sys.space->var_class(v) == VarClass::kState) xstates.insert(v);
  std::vector<int> dep;
  for (int j = 0; j < sys.n; ++j)
    if (xstates.count(sys.state_vars[static_cast<size_t>(j)])) dep.push_back(j);
  PolyMat F = decrease_matrix(sys, cert.X, cert.Y, dep);

  DomainSampler sampler(sys, seed);
  auto note = [&](const std::string& fam, double amount) {
    if (amount > rep.max_violation) rep.max_violation = amount;
    if (amount > tol) {
      ++rep.by_family[fam];
      ++rep.violations;
    }
  };
  for (int k = 0; k < samples; ++k) {
    auto x = sampler.sample_x();
    auto th = sampler.sample_theta();
    auto rt = sampler.sample_rate();
    auto p = sys.pack_point(x, th, rt);

    Eigen::MatrixXd Xe = cert.X.eval(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(Xe);
    note("lower_bound", cert.eps1 - ex.eigenvalues().minCoeff());
    note("upper_bound", ex.eigenvalues().maxCoeff() - cert.eps2);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(F.eval(p));
    note("decrease", ef.eigenvalues().maxCoeff() + cert.eps3);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(Xe - cert.X0);
    note("inner_ellipsoid", -ei.eigenvalues().minCoeff());

    for (size_t j = 0; j < sys.x_rows.size(); ++j) {
      Eigen::MatrixXd Ce = sys.x_rows[j].eval(p);
      int r = static_cast<int>(Ce.rows());
      Eigen::MatrixXd Bd(r + sys.n, r + sys.n);
      Bd.topLeftCorner(r, r).setIdentity();
      Bd.topRightCorner(r, sys.n) = Ce * Xe;
      Bd.bottomLeftCorner(sys.n, r) = (Ce * Xe).transpose();
      Bd.bottomRightCorner(sys.n, sys.n) = Xe;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Bd);
      note("region[" + std::to_string(j) + "]", -eb.eigenvalues().minCoeff());
    }
    ++rep.samples_checked;
  }
  return rep;
}

}  // namespace pdclf
