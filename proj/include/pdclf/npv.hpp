#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pdclf/polymatrix.hpp"

namespace pdclf {

/// Structure derived from the input matrix: the rows of B that are
/// identically zero.  The states with those indices are the only ones the
/// Lyapunov matrix may depend on (their derivatives cannot be steered
/// directly, so the derivative of the Lyapunov function stays input-free).
struct StructureInfo {
  std::vector<int> zero_rows;  // 0-based, ascending
};

inline StructureInfo zero_rows(const PolyMat& B) {
  StructureInfo info;
  for (int i = 0; i < B.rows(); ++i) {
    bool all_zero = true;
    for (int j = 0; j < B.cols(); ++j)
      if (!B(i, j).is_zero()) {
        all_zero = false;
        break;
      }
    if (all_zero) info.zero_rows.push_back(i);
  }
  return info;
}

/// All 2^k corners of a box.  Bit i of the vertex index selects the upper
/// bound of component i, so the order is deterministic.
inline std::vector<std::vector<double>> rate_vertices(
    const std::vector<std::pair<double, double>>& box) {
  int k = static_cast<int>(box.size());
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(1) << k);
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<double> v(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i)
      v[static_cast<size_t>(i)] = ((mask >> i) & 1u) ? box[i].second : box[i].first;
    out.push_back(std::move(v));
  }
  return out;
}

/// A control-affine polynomial system  xdot = A(x,theta) x + B(x,theta) u
/// together with the parameter set (h_i(theta) >= 0), the rate box for
/// thetadot, and the local state set (|C_i(x) x| <= 1 per constraint).
struct NpvSystem {
  int n = 0;        // states
  int m = 0;        // inputs
  int n_theta = 0;  // parameters

  VarSpacePtr space;            // x1..xn, theta(k), thetadot(k)
  std::vector<int> state_vars;  // indices into `space`, ascending
  std::vector<int> param_vars;
  std::vector<int> rate_vars;

  PolyMat A;           // n x n, in (x, theta)
  PolyMat B;           // n x m, in (x, theta)
  std::vector<Poly> f; // drift rows; always populated (given or A*x)

  std::vector<Poly> theta_set;  // h_i(theta) >= 0
  std::vector<std::pair<double, double>> rate_box;  // per parameter
  std::vector<PolyMat> x_rows;  // C_i, each r_i x n, entries in x only

  StructureInfo structure;

  /// Full evaluation point from state / parameter / rate blocks.
  std::vector<double> pack_point(const std::vector<double>& x,
                                 const std::vector<double>& theta,
                                 const std::vector<double>& thetadot = {}) const {
    std::vector<double> pt(static_cast<size_t>(space->size()), 0.0);
    for (size_t i = 0; i < x.size(); ++i) pt[static_cast<size_t>(state_vars[i])] = x[i];
    for (size_t i = 0; i < theta.size(); ++i) pt[static_cast<size_t>(param_vars[i])] = theta[i];
    for (size_t i = 0; i < thetadot.size(); ++i) pt[static_cast<size_t>(rate_vars[i])] = thetadot[i];
    return pt;
  }

  bool in_theta_set(const std::vector<double>& theta, double tol = 1e-12) const {
    std::vector<double> pt = pack_point(std::vector<double>(static_cast<size_t>(n), 0.0), theta);
    for (const Poly& h : theta_set)
      if (h.eval(pt) < -tol) return false;
    return true;
  }

  bool in_rate_box(const std::vector<double>& thetadot, double tol = 1e-12) const {
    for (size_t k = 0; k < rate_box.size(); ++k)
      if (thetadot[k] < rate_box[k].first - tol ||
          thetadot[k] > rate_box[k].second + tol)
        return false;
    return true;
  }

  /// Membership via |C_i(x) x| <= 1 for every constraint (2-norm when C_i
  /// has several rows).
  bool in_x_set(const std::vector<double>& x, double tol = 1e-12) const {
    std::vector<double> pt = pack_point(x, std::vector<double>(static_cast<size_t>(n_theta), 0.0));
    for (const PolyMat& C : x_rows) {
      double norm2 = 0.0;
      for (int r = 0; r < C.rows(); ++r) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += C(r, j).eval(pt) * x[static_cast<size_t>(j)];
        norm2 += row * row;
      }
      if (norm2 > 1.0 + tol) return false;
    }
    return true;
  }

  /// Defining polynomial of constraint i:  c_i(x) = 1 - |C_i(x) x|^2.
  Poly c_poly(int i) const {
    const PolyMat& C = x_rows.at(static_cast<size_t>(i));
    Poly c(space, 1.0);
    for (int r = 0; r < C.rows(); ++r) {
      Poly row(space);
      for (int j = 0; j < n; ++j)
        row += C(r, j) * Poly::variable(space, state_vars[static_cast<size_t>(j)]);
      c -= row * row;
    }
    return c;
  }
};

namespace detail {

inline VarSpacePtr make_system_space(int n, int n_theta) {
  auto vs = std::make_shared<VarSpace>();
  for (int i = 1; i <= n; ++i) vs->add("x" + std::to_string(i), VarClass::kState);
  if (n_theta == 1) {
    vs->add("theta", VarClass::kParameter);
  } else {
    for (int k = 1; k <= n_theta; ++k)
      vs->add("theta" + std::to_string(k), VarClass::kParameter);
  }
  if (n_theta == 1) {
    vs->add("thetadot", VarClass::kParameterRate);
  } else {
    for (int k = 1; k <= n_theta; ++k)
      vs->add("thetadot" + std::to_string(k), VarClass::kParameterRate);
  }
  return vs;
}

/// First state factor (lowest variable index) of a monomial, or -1.
inline int first_state_factor(const Monomial& mono, const VarSpace& space) {
  for (const auto& [v, e] : mono.factors())
    if (space.var_class(v) == VarClass::kState && e >= 1) return v;
  return -1;
}

}  // namespace detail

/// Initialize the derived members of a partially-built system: drift rows
/// (from A when not given), the factorization consistency check, the
/// equilibrium check, and the zero-row structure.  Throws ScenarioError with
/// a schema-style path on violations.
inline void finalize_system(NpvSystem& sys) {
  const VarSpace& space = *sys.space;

  auto state_col = [&](int var) {
    for (size_t j = 0; j < sys.state_vars.size(); ++j)
      if (sys.state_vars[j] == var) return static_cast<int>(j);
    return -1;
  };

  // Drift given but no factorization: assign each monomial of f_j to the
  // column of its lowest-index state factor (factorizations are not unique;
  // this is the documented default).
  bool derived_A = false;
  if (sys.A.rows() == 0 && !sys.f.empty()) {
    sys.A = PolyMat(sys.space, sys.n, sys.n);
    derived_A = true;
    for (int i = 0; i < sys.n; ++i) {
      for (const auto& [mono, coef] : sys.f[static_cast<size_t>(i)].terms()) {
        int v = detail::first_state_factor(mono, space);
        if (v < 0)
          throw ScenarioError(
              "system.f[" + std::to_string(i) +
              "]: monomial with no state factor breaks the origin equilibrium");
        Monomial reduced;
        mono.reduce(v, &reduced);
        sys.A(i, state_col(v)).add_term(reduced, coef);
      }
    }
  }

  if (sys.A.rows() != sys.n || sys.A.cols() != sys.n)
    throw ScenarioError("system.A: expected an " + std::to_string(sys.n) + "x" +
                        std::to_string(sys.n) + " matrix");
  if (sys.B.rows() != sys.n || sys.B.cols() != sys.m)
    throw ScenarioError("system.B: expected an " + std::to_string(sys.n) + "x" +
                        std::to_string(sys.m) + " matrix");

  // Drift from the factorization when not given.
  std::vector<Poly> ax(static_cast<size_t>(sys.n), Poly(sys.space));
  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j)
      ax[static_cast<size_t>(i)] +=
          sys.A(i, j) * Poly::variable(sys.space, sys.state_vars[static_cast<size_t>(j)]);
  if (sys.f.empty()) {
    sys.f = ax;
  } else {
    for (int i = 0; i < sys.n; ++i) {
      for (const auto& [mono, coef] : sys.f[static_cast<size_t>(i)].terms())
        if (detail::first_state_factor(mono, space) < 0)
          throw ScenarioError(
              "system.f[" + std::to_string(i) +
              "]: monomial with no state factor breaks the origin equilibrium");
      if (!derived_A && !poly_equal(ax[static_cast<size_t>(i)], sys.f[static_cast<size_t>(i)], 1e-10))
        throw ScenarioError("system.A: row " + std::to_string(i) +
                            " does not reproduce the drift (A*x != f)");
    }
  }

  for (size_t k = 0; k < sys.rate_box.size(); ++k)
    if (!(sys.rate_box[k].first <= sys.rate_box[k].second))
      throw ScenarioError("system.rate_box[" + std::to_string(k) +
                          "]: lower bound exceeds upper bound");

  sys.structure = zero_rows(sys.B);
}

/// Truncated Taylor polynomials used by the rocket model.
inline Poly taylor_sin(const VarSpacePtr& space, int var, int deg) {
  Poly p(space);
  double fact = 1.0;
  double sign = 1.0;
  for (int k = 1; k <= deg; k += 2) {
    fact *= (k == 1) ? 1.0 : static_cast<double>(k - 1) * k;
    p.add_term(Monomial::var(var, k), sign / fact);
    sign = -sign;
  }
  return p;
}

inline Poly taylor_cos(const VarSpacePtr& space, int var, int deg) {
  Poly p(space, 1.0);
  double fact = 1.0;
  double sign = -1.0;
  for (int k = 2; k <= deg; k += 2) {
    fact *= static_cast<double>(k - 1) * k;
    p.add_term(Monomial::var(var, k), sign / fact);
    sign = -sign;
  }
  return p;
}

/// Planar rocket constants.  theta models the mass/inertia reduction from
/// fuel burn: effective mass is m/theta and effective inertia J/theta.
struct RocketParams {
  double m = 1.0;
  double l = 1.0;
  double J = 1.0 / 3.0;
  double g = 9.81;
  int taylor_sin_deg = 3;
  int taylor_cos_deg = 2;
};

/// Planar rocket in linear-like polynomial form.  The hovering thrust
/// offset u2 -> u2 + m g / theta removes the gravity constant exactly, and
/// truncated Taylor series replace sin/cos of the tilt angle.  State order:
/// (y, z, phi, vy, vz, phidot) as x1..x6; inputs (Fy, Fz - m g / theta).
inline NpvSystem gravity_offset_transform(const RocketParams& p) {
  NpvSystem sys;
  sys.n = 6;
  sys.m = 2;
  sys.n_theta = 1;
  sys.space = detail::make_system_space(sys.n, sys.n_theta);
  for (int i = 0; i < sys.space->size(); ++i) {
    switch (sys.space->var_class(i)) {
      case VarClass::kState: sys.state_vars.push_back(i); break;
      case VarClass::kParameter: sys.param_vars.push_back(i); break;
      case VarClass::kParameterRate: sys.rate_vars.push_back(i); break;
      default: break;
    }
  }

  int phi = sys.state_vars[2];
  int th = sys.param_vars[0];
  Poly theta = Poly::variable(sys.space, th);
  Poly sin_phi = taylor_sin(sys.space, phi, p.taylor_sin_deg);
  Poly cos_phi = taylor_cos(sys.space, phi, p.taylor_cos_deg);

  sys.A = PolyMat(sys.space, 6, 6);
  sys.A(0, 3) = Poly::constant(sys.space, 1.0);
  sys.A(1, 4) = Poly::constant(sys.space, 1.0);
  sys.A(2, 5) = Poly::constant(sys.space, 1.0);
  // Gravity torque after the thrust offset: (m g l / J) sin(phi); dividing
  // the sine expansion by phi keeps the factorization polynomial.
  {
    Poly sin_over_phi(sys.space);
    for (const auto& [mono, coef] : sin_phi.terms()) {
      Monomial reduced;
      mono.reduce(phi, &reduced);
      sin_over_phi.add_term(reduced, coef);
    }
    sys.A(5, 2) = sin_over_phi * (p.m * p.g * p.l / p.J);
  }

  sys.B = PolyMat(sys.space, 6, 2);
  sys.B(3, 0) = theta * (1.0 / p.m);
  sys.B(4, 1) = theta * (1.0 / p.m);
  sys.B(5, 0) = theta * cos_phi * (-p.l / p.J);
  sys.B(5, 1) = theta * sin_phi * (p.l / p.J);

  finalize_system(sys);
  return sys;
}

}  // namespace pdclf
