#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pdclf {

// Exponential cone  Kexp = cl{ (x,y,z) : y > 0, y*exp(x/y) <= z }
//                        = that set  ∪  { (x,0,z) : x <= 0, z >= 0 }.
// Dual cone         Kexp* = cl{ (u,v,w) : u < 0, -u*exp(v/u) <= e*w }
//                        ∪ { (0,v,w) : v >= 0, w >= 0 }.
// The projection reduces, on the curved boundary, to a univariate root find
// in rho = x/y (stationarity of the squared distance with multiplier mu):
//   x = r0 - mu e^rho,  y = s0 - mu e^rho (1-rho),  z = t0 + mu,
//   mu_a = (r0 - rho s0) e^{-rho} / (1 - rho + rho^2)
//   mu_b = (s0 e^rho - t0) / (1 + e^{2 rho} (1 - rho))
// and h(rho) = 0 where
//   h(rho) = e^{2 rho} (s0 + r0 (rho-1)) - e^rho t0 (1 - rho + rho^2)
//            + rho s0 - r0.

namespace expcone_detail {

inline bool in_primal(double x, double y, double z, double tol) {
  if (y > 0.0) {
    double ratio = x / y;
    if (ratio <= 700.0 && y * std::exp(ratio) <= z + tol) return true;
  }
  return y >= -tol && y <= tol && x <= tol && z >= -tol;  // flat face
}

inline bool in_dual(double u, double v, double w, double tol) {
  constexpr double kE = 2.718281828459045;
  if (u < 0.0) {
    double ratio = v / u;
    if (ratio <= 700.0 && (-u) * std::exp(ratio) <= kE * w + tol) return true;
  }
  return u >= -tol && u <= tol && v >= -tol && w >= -tol;  // flat face
}

inline double h_of_rho(double rho, double r0, double s0, double t0) {
  // Normalized to avoid overflow: divide by e^{2 rho} for rho > 0, e^{rho}... keep
  // the raw sign; scale only matters for root finding.
  if (rho > 0.0) {
    double em = std::exp(-rho), em2 = std::exp(-2.0 * rho);
    return (s0 + r0 * (rho - 1.0)) - em * t0 * (1.0 - rho + rho * rho) +
           (rho * s0 - r0) * em2;
  }
  double ep = std::exp(rho), ep2 = std::exp(2.0 * rho);
  return ep2 * (s0 + r0 * (rho - 1.0)) - ep * t0 * (1.0 - rho + rho * rho) +
         (rho * s0 - r0);
}

/// Primal point on the boundary for a given rho (may be invalid if mu<0 or y<=0).
inline std::array<double, 3> point_of_rho(double rho, double r0, double s0,
                                          double t0) {
  double erho = std::exp(std::min(rho, 700.0));
  double den_b = 1.0 + erho * erho * (1.0 - rho);
  double scale_b = std::max(1.0, erho * erho * std::abs(1.0 - rho));
  double mu;
  if (std::isfinite(den_b) && std::abs(den_b) > 1e-8 * scale_b) {
    mu = (s0 * erho - t0) / den_b;
  } else {
    double den_a = 1.0 - rho + rho * rho;  // > 0 for all rho
    mu = (r0 - rho * s0) * std::exp(-std::min(rho, 700.0)) / den_a;
  }
  double y = s0 - mu * erho * (1.0 - rho);
  double x = rho * y;
  double z = y * erho;
  return {x, y, z};
}

}  // namespace expcone_detail

/// Euclidean projection onto the exponential cone.
inline std::array<double, 3> project_exp_cone(double r0, double s0, double t0) {
  using namespace expcone_detail;
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(r0),
                              std::max(std::abs(s0), std::abs(t0))));
  if (in_primal(r0, s0, t0, tol)) return {r0, s0, t0};
  // v in polar cone -K*  =>  projection is 0.
  if (in_dual(-r0, -s0, -t0, tol)) return {0.0, 0.0, 0.0};
  if (r0 <= 0.0 && s0 <= 0.0) return {r0, 0.0, std::max(t0, 0.0)};

  // Main case: root of h on the curved boundary.  Bracket by expansion, then
  // bisect.  The valid projection has y > 0; filter candidates accordingly.
  double best_d = std::numeric_limits<double>::infinity();
  std::array<double, 3> best = {0.0, 0.0, std::max(t0, 0.0)};
  // Consider the apex/ray fallbacks as candidates too.
  {
    std::array<double, 3> ray = {std::min(r0, 0.0), 0.0, std::max(t0, 0.0)};
    double d = (ray[0] - r0) * (ray[0] - r0) + (ray[1] - s0) * (ray[1] - s0) +
               (ray[2] - t0) * (ray[2] - t0);
    best = ray;
    best_d = d;
  }

  auto consider = [&](double rho) {
    auto p = point_of_rho(rho, r0, s0, t0);
    if (!(p[1] > 0.0) || !std::isfinite(p[0]) || !std::isfinite(p[2])) return;
    if (p[2] < 0.0) return;
    // The KKT multiplier is nonnegative at a true root: the projection moves
    // x down and z up (q = v - p = mu e^rho (1, 1-rho, -e^{-rho}), mu >= 0).
    // Candidates violating this are cancellation noise near the flat face.
    double atol = 1e-9 * std::max(1.0, std::max(std::abs(r0),
                           std::max(std::abs(s0), std::abs(t0))));
    if (p[2] < t0 - atol || p[0] > r0 + atol) return;
    double d = (p[0] - r0) * (p[0] - r0) + (p[1] - s0) * (p[1] - s0) +
               (p[2] - t0) * (p[2] - t0);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  };

  // Scan for sign changes of h over a grid, refine each by bisection.
  auto scan = [&](double lo, double hi, int cells) {
    double prev_rho = lo, prev_h = h_of_rho(lo, r0, s0, t0);
    for (int i = 1; i <= cells; ++i) {
      double rho = lo + (hi - lo) * i / cells;
      double h = h_of_rho(rho, r0, s0, t0);
      if (std::isfinite(prev_h) && std::isfinite(h) &&
          ((prev_h <= 0.0 && h >= 0.0) || (prev_h >= 0.0 && h <= 0.0))) {
        double a = prev_rho, b = rho, ha = prev_h;
        for (int it = 0; it < 200; ++it) {
          double m = 0.5 * (a + b);
          double hm = h_of_rho(m, r0, s0, t0);
          if ((ha <= 0.0) == (hm <= 0.0)) {
            a = m;
            ha = hm;
          } else {
            b = m;
          }
        }
        consider(0.5 * (a + b));
      }
      prev_rho = rho;
      prev_h = h;
    }
  };
  scan(-60.0, 60.0, 600);
  // For small s0 > 0 the root sits near rho ~ r0/s0 (the exponential terms
  // vanish and h is essentially linear there); cover it when far left.
  if (s0 > 0.0 && r0 < 0.0) {
    double far = r0 / s0;
    if (far < -50.0) scan(far - 10.0, -50.0, 600);
  }
  return best;
}

/// Projection onto the dual exponential cone via Moreau:
/// v = P_K(v) + P_{-K*}(v)  =>  P_{K*}(v) = v + P_K(-v).
inline std::array<double, 3> project_exp_dual_cone(double u, double v, double w) {
  auto p = project_exp_cone(-u, -v, -w);
  return {u + p[0], v + p[1], w + p[2]};
}

inline bool exp_primal_member(double x, double y, double z, double tol = 1e-9) {
  return expcone_detail::in_primal(x, y, z, tol);
}

inline bool exp_dual_member(double u, double v, double w, double tol = 1e-9) {
  return expcone_detail::in_dual(u, v, w, tol);
}

}  // namespace pdclf
