#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pdclf/errors.hpp"

namespace pdclf {

enum class VarClass : uint8_t {
  kState,           // x_i
  kParameter,       // theta_k
  kParameterRate,   // thetadot_k
  kAuxiliary,       // v_i (universally quantified SOS auxiliaries)
};

/// Ordered, immutable list of named scalar variables.  Polynomials refer to
/// variables by index into one shared VarSpace.
class VarSpace {
 public:
  VarSpace() = default;

  static std::shared_ptr<const VarSpace> make(
      std::vector<std::pair<std::string, VarClass>> vars) {
    auto vs = std::make_shared<VarSpace>();
    for (auto& [name, cls] : vars) vs->add(name, cls);
    return vs;
  }

  int add(const std::string& name, VarClass cls) {
    if (index_.count(name) > 0) throw Error("duplicate variable name: " + name);
    names_.push_back(name);
    classes_.push_back(cls);
    index_[name] = static_cast<int>(names_.size()) - 1;
    return index_[name];
  }

  int size() const { return static_cast<int>(names_.size()); }

  int index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UnknownVariable("unknown variable: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::string& name(int i) const { return names_.at(i); }
  VarClass var_class(int i) const { return classes_.at(i); }

  std::vector<int> indices_of(VarClass cls) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (classes_[i] == cls) out.push_back(i);
    return out;
  }

  friend bool operator==(const VarSpace& a, const VarSpace& b) {
    return a.names_ == b.names_ && a.classes_ == b.classes_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<VarClass> classes_;
  std::map<std::string, int> index_;
};

using VarSpacePtr = std::shared_ptr<const VarSpace>;

inline void check_same_space(const VarSpacePtr& a, const VarSpacePtr& b) {
  if (a == b) return;
  if (a && b && *a == *b) return;
  throw VarSpaceMismatch("operands live in different variable spaces");
}

/// Sparse monomial: sorted (variable index, exponent) pairs, exponents >= 1.
class Monomial {
 public:
  Monomial() = default;  // the constant monomial 1

  explicit Monomial(std::vector<std::pair<int, int>> factors)
      : factors_(std::move(factors)) {
    normalize();
  }

  static Monomial var(int index, int exp = 1) {
    if (exp == 0) return Monomial();
    return Monomial({{index, exp}});
  }

  const std::vector<std::pair<int, int>>& factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }

  int total_degree() const {
    int d = 0;
    for (auto& [v, e] : factors_) d += e;
    return d;
  }

  int degree_of(int var) const {
    for (auto& [v, e] : factors_)
      if (v == var) return e;
    return 0;
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    auto a = factors_.begin(), b = o.factors_.begin();
    while (a != factors_.end() || b != o.factors_.end()) {
      if (b == o.factors_.end() || (a != factors_.end() && a->first < b->first)) {
        r.factors_.push_back(*a++);
      } else if (a == factors_.end() || b->first < a->first) {
        r.factors_.push_back(*b++);
      } else {
        r.factors_.push_back({a->first, a->second + b->second});
        ++a;
        ++b;
      }
    }
    return r;
  }

  /// Derivative helper: this monomial with var's exponent reduced by one.
  /// Returns the multiplying exponent (0 if var absent).
  int reduce(int var, Monomial* out) const {
    *out = Monomial();
    int mult = 0;
    for (auto& [v, e] : factors_) {
      if (v == var) {
        mult = e;
        if (e > 1) out->factors_.push_back({v, e - 1});
      } else {
        out->factors_.push_back({v, e});
      }
    }
    return mult;
  }

  double eval(const std::vector<double>& point) const {
    double r = 1.0;
    for (auto& [v, e] : factors_) {
      double base = point.at(v);
      double p = 1.0;
      for (int k = 0; k < e; ++k) p *= base;
      r *= p;
    }
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors_ == b.factors_;
  }

  /// Graded lexicographic order: total degree first, then exponent sequence
  /// over the variable order (earlier variable, higher power first).
  friend bool operator<(const Monomial& a, const Monomial& b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db;
    auto ia = a.factors_.begin(), ib = b.factors_.begin();
    while (ia != a.factors_.end() && ib != b.factors_.end()) {
      if (ia->first != ib->first) return ia->first > ib->first;
      if (ia->second != ib->second) return ia->second < ib->second;
      ++ia;
      ++ib;
    }
    return false;  // equal
  }

 private:
  void normalize() {
    std::sort(factors_.begin(), factors_.end());
    std::vector<std::pair<int, int>> merged;
    for (auto& [v, e] : factors_) {
      if (e == 0) continue;
      if (e < 0) throw Error("negative exponent in monomial");
      if (!merged.empty() && merged.back().first == v)
        merged.back().second += e;
      else
        merged.push_back({v, e});
    }
    factors_ = std::move(merged);
  }

  std::vector<std::pair<int, int>> factors_;
};

}  // namespace pdclf
