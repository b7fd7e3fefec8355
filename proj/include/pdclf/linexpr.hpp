#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pdclf/errors.hpp"

namespace pdclf {

/// Affine expression c0 + sum(coef_i * d_i) over scalar decision variables
/// d_i of a conic program.  Polynomial coefficients during SOS compilation
/// are LinExpr values; products of two non-constant LinExpr throw, which
/// enforces structurally that compiled programs are affine in decisions.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double c) : constant_(c) {}  // NOLINT: implicit by design

  static LinExpr variable(int var, double coef = 1.0) {
    LinExpr e;
    if (coef != 0.0) e.terms_.push_back({var, coef});
    return e;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }

  bool is_constant() const { return terms_.empty(); }

  bool is_zero(double tol = 0.0) const {
    if (std::abs(constant_) > tol) return false;
    for (auto& [v, c] : terms_)
      if (std::abs(c) > tol) return false;
    return true;
  }

  LinExpr& operator+=(const LinExpr& o) {
    constant_ += o.constant_;
    if (!o.terms_.empty()) {
      terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
      merge();
    }
    return *this;
  }

  LinExpr& operator-=(const LinExpr& o) {
    constant_ -= o.constant_;
    for (auto& [v, c] : o.terms_) terms_.push_back({v, -c});
    if (!o.terms_.empty()) merge();
    return *this;
  }

  LinExpr& operator*=(double s) {
    constant_ *= s;
    for (auto& [v, c] : terms_) c *= s;
    return *this;
  }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }

  friend LinExpr operator*(const LinExpr& a, const LinExpr& b) {
    if (!a.is_constant() && !b.is_constant())
      throw BilinearTerm(
          "product of two decision-dependent expressions; compiled programs "
          "must stay affine in decision variables");
    if (a.is_constant()) return b * a.constant_;
    return a * b.constant_;
  }

 private:
  void merge() {
    std::sort(terms_.begin(), terms_.end(),
              [](auto& x, auto& y) { return x.first < y.first; });
    std::vector<std::pair<int, double>> out;
    for (auto& [v, c] : terms_) {
      if (!out.empty() && out.back().first == v)
        out.back().second += c;
      else
        out.push_back({v, c});
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](auto& t) { return t.second == 0.0; }),
              out.end());
    terms_ = std::move(out);
  }

  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

inline bool coeff_negligible(double c, double tol) { return std::abs(c) < tol; }
inline bool coeff_negligible(const LinExpr& c, double tol) {
  if (std::abs(c.constant()) >= tol) return false;
  for (auto& [v, w] : c.terms())
    if (std::abs(w) >= tol) return false;
  return true;
}

}  // namespace pdclf
