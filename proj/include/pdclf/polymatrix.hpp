#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pdclf/polynomial.hpp"

namespace pdclf {

/// Dense matrix of polynomials sharing one VarSpace.
template <class C>
class PolyMatrix {
 public:
  PolyMatrix() = default;

  PolyMatrix(VarSpacePtr space, int rows, int cols)
      : space_(std::move(space)), rows_(rows), cols_(cols) {
    entries_.assign(static_cast<size_t>(rows_) * cols_, Polynomial<C>(space_));
  }

  static PolyMatrix identity(VarSpacePtr space, int n, double scale = 1.0) {
    PolyMatrix m(space, n, n);
    for (int i = 0; i < n; ++i)
      m(i, i) = Polynomial<C>::constant(m.space_, C(scale));
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const VarSpacePtr& space() const { return space_; }

  Polynomial<C>& operator()(int i, int j) {
    check_index(i, j);
    return entries_[static_cast<size_t>(i) * cols_ + j];
  }
  const Polynomial<C>& operator()(int i, int j) const {
    check_index(i, j);
    return entries_[static_cast<size_t>(i) * cols_ + j];
  }

  PolyMatrix& operator+=(const PolyMatrix& o) {
    check_same_shape(o);
    for (size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
  }

  PolyMatrix& operator-=(const PolyMatrix& o) {
    check_same_shape(o);
    for (size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
  }

  friend PolyMatrix operator+(PolyMatrix a, const PolyMatrix& b) { return a += b; }
  friend PolyMatrix operator-(PolyMatrix a, const PolyMatrix& b) { return a -= b; }

  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
    check_same_space(a.space_, b.space_);
    if (a.cols_ != b.rows_)
      throw DimensionMismatch("polynomial matrix product shape mismatch");
    PolyMatrix r(a.space_, a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) {
        Polynomial<C> acc(a.space_);
        for (int k = 0; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
        r(i, j) = std::move(acc);
      }
    return r;
  }

  PolyMatrix& operator*=(double s) {
    for (auto& e : entries_) e *= s;
    return *this;
  }
  friend PolyMatrix operator*(PolyMatrix a, double s) { return a *= s; }
  friend PolyMatrix operator*(double s, PolyMatrix a) { return a *= s; }

  PolyMatrix transpose() const {
    PolyMatrix r(space_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  /// <M> = M + M^T (defined for square matrices).
  PolyMatrix sym() const {
    if (rows_ != cols_) throw DimensionMismatch("sym() needs a square matrix");
    return *this + transpose();
  }

  PolyMatrix diff(int var) const {
    PolyMatrix r(space_, rows_, cols_);
    for (size_t k = 0; k < entries_.size(); ++k)
      r.entries_[k] = entries_[k].diff(var);
    return r;
  }

  bool is_symmetric(double tol = 1e-12) const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j) {
        Polynomial<C> d = (*this)(i, j) - (*this)(j, i);
        for (auto& [m, c] : d.terms())
          if (!coeff_negligible(c, tol)) return false;
      }
    return true;
  }

  /// Numeric evaluation (plain polynomials only).
  template <class D = C>
  std::enable_if_t<std::is_same_v<D, double>, Eigen::MatrixXd> eval(
      const std::vector<double>& point) const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(point);
    return m;
  }

 private:
  void check_index(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
      throw DimensionMismatch("polynomial matrix index out of range");
  }
  void check_same_shape(const PolyMatrix& o) const {
    check_same_space(space_, o.space_);
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionMismatch("polynomial matrix shape mismatch");
  }

  VarSpacePtr space_;
  int rows_ = 0, cols_ = 0;
  std::vector<Polynomial<C>> entries_;
};

using PolyMat = PolyMatrix<double>;
using APolyMat = PolyMatrix<LinExpr>;

inline APolyMat to_affine(const PolyMat& m) {
  APolyMat r(m.space(), m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = to_affine(m(i, j));
  return r;
}

}  // namespace pdclf
