#pragma once

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pdclf/linexpr.hpp"
#include "pdclf/varspace.hpp"

namespace pdclf {

/// Coefficients with |c| below this are dropped during normalization.
inline constexpr double kCoeffPruneTol = 1e-14;

/// Sparse multivariate polynomial over coefficient ring C (double for plain
/// polynomials, LinExpr for decision-affine expressions).  Terms are kept in
/// an ordered map under graded-lex monomial order, so iteration order — and
/// everything derived from it (serialization, compiled programs) — is
/// deterministic.
template <class C>
class Polynomial {
 public:
  using Terms = std::map<Monomial, C>;

  Polynomial() = default;
  explicit Polynomial(VarSpacePtr space) : space_(std::move(space)) {}

  Polynomial(VarSpacePtr space, C constant) : space_(std::move(space)) {
    add_term(Monomial(), std::move(constant));
  }

  static Polynomial constant(VarSpacePtr space, C value) {
    return Polynomial(std::move(space), std::move(value));
  }

  static Polynomial variable(VarSpacePtr space, int var, C coef = C(1.0)) {
    Polynomial p(std::move(space));
    p.add_term(Monomial::var(var), std::move(coef));
    return p;
  }

  const VarSpacePtr& space() const { return space_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& m, C coef) {
    if (coeff_negligible(coef, kCoeffPruneTol)) {
      return;
    }
    auto [it, fresh] = terms_.emplace(m, coef);
    if (!fresh) {
      it->second += coef;
      if (coeff_negligible(it->second, kCoeffPruneTol)) terms_.erase(it);
    }
  }

  int total_degree() const {
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, m.total_degree());
    return d;
  }

  int min_total_degree() const {
    if (terms_.empty()) return 0;
    int d = terms_.begin()->first.total_degree();
    for (auto& [m, c] : terms_) d = std::min(d, m.total_degree());
    return d;
  }

  int degree_in(int var) const {
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, m.degree_of(var));
    return d;
  }

  std::set<int> vars_appearing() const {
    std::set<int> vars;
    for (auto& [m, c] : terms_)
      for (auto& [v, e] : m.factors()) vars.insert(v);
    return vars;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same_space(space_, o.space_);
    for (auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_same_space(space_, o.space_);
    for (auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r(a.space_);
    for (auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_same_space(a.space_, b.space_);
    Polynomial r(a.space_ ? a.space_ : b.space_);
    for (auto& [ma, ca] : a.terms_)
      for (auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c = c * s;
    prune();
    return *this;
  }

  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  Polynomial times_monomial(const Monomial& mono) const {
    Polynomial r(space_);
    for (auto& [m, c] : terms_) r.terms_.emplace(m * mono, c);
    return r;
  }

  /// Partial derivative with respect to variable index `var`.
  Polynomial diff(int var) const {
    Polynomial r(space_);
    for (auto& [m, c] : terms_) {
      Monomial reduced;
      int mult = m.reduce(var, &reduced);
      if (mult > 0) r.add_term(reduced, c * static_cast<double>(mult));
    }
    return r;
  }

  /// Evaluate at a full point (indexed by variable).  Returns C, so plain
  /// polynomials give doubles and decision-affine ones give LinExpr.
  C eval(const std::vector<double>& point) const {
    if (static_cast<int>(point.size()) != (space_ ? space_->size() : 0))
      throw MissingAssignment("evaluation point has wrong dimension");
    C acc(0.0);
    for (auto& [m, c] : terms_) acc += c * m.eval(point);
    return acc;
  }

  /// Evaluate from a name->value map; every appearing variable must be bound.
  C eval(const std::map<std::string, double>& assignment) const {
    std::vector<double> point(space_ ? space_->size() : 0, 0.0);
    std::vector<bool> bound(point.size(), false);
    for (auto& [name, value] : assignment) {
      int i = space_->index(name);
      point[i] = value;
      bound[i] = true;
    }
    for (int v : vars_appearing())
      if (!bound[v])
        throw MissingAssignment("no value for variable " + space_->name(v));
    return eval(point);
  }

  /// Substitute var := factor * var for each (var, factor) given.
  Polynomial scale_vars(const std::map<int, double>& factors) const {
    Polynomial r(space_);
    for (auto& [m, c] : terms_) {
      double scale = 1.0;
      for (auto& [v, e] : m.factors()) {
        auto it = factors.find(v);
        if (it == factors.end()) continue;
        for (int k = 0; k < e; ++k) scale *= it->second;
      }
      r.add_term(m, c * scale);
    }
    return r;
  }

 private:
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (coeff_negligible(it->second, kCoeffPruneTol))
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  VarSpacePtr space_;
  Terms terms_;
};

using Poly = Polynomial<double>;
using APoly = Polynomial<LinExpr>;  // decision-affine polynomial

inline APoly to_affine(const Poly& p) {
  APoly r(p.space());
  for (auto& [m, c] : p.terms()) r.add_term(m, LinExpr(c));
  return r;
}

/// Max absolute coefficient difference.
inline double poly_distance(const Poly& a, const Poly& b) {
  Poly d = a - b;
  double m = 0.0;
  for (auto& [mono, c] : d.terms()) m = std::max(m, std::abs(c));
  return m;
}

inline bool poly_equal(const Poly& a, const Poly& b, double tol = 1e-10) {
  return poly_distance(a, b) <= tol;
}

// ---------------------------------------------------------------------------
// Text form: sum of coeff*var^deg*... terms in canonical (graded-lex
// ascending) order, e.g. "-1.79 + 12.12*theta^2".
// ---------------------------------------------------------------------------

inline std::string format_coeff(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string to_string(const Poly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : p.terms()) {
    double coef = c;
    if (first) {
      first = false;
      if (coef < 0) {
        os << "-";
        coef = -coef;
      }
    } else {
      os << (coef < 0 ? " - " : " + ");
      coef = std::abs(coef);
    }
    os << format_coeff(coef);
    for (auto& [v, e] : m.factors()) {
      os << "*" << p.space()->name(v);
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Parser: expr := term (('+'|'-') term)*
//         term := factor (('*'|'/') factor)*
//         factor := ('-')* (number | ident ('^' uint)? | '(' expr ')' ('^' uint)?)
// Division requires a constant divisor.
// ---------------------------------------------------------------------------

namespace detail {

class PolyParser {
 public:
  PolyParser(const std::string& text, VarSpacePtr space)
      : text_(text), space_(std::move(space)) {}

  Poly parse() {
    Poly p = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input in polynomial: '" +
                       text_.substr(pos_) + "'");
    return p;
  }

 private:
  Poly expr() {
    Poly acc = term();
    for (;;) {
      skip_ws();
      if (peek() == '+') {
        ++pos_;
        acc += term();
      } else if (peek() == '-') {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = factor();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc = acc * factor();
      } else if (peek() == '/') {
        ++pos_;
        Poly d = factor();
        if (d.total_degree() != 0)
          throw ParseError("division by a non-constant polynomial");
        double v = d.is_zero() ? 0.0 : d.terms().begin()->second;
        if (v == 0.0) throw ParseError("division by zero");
        acc *= 1.0 / v;
      } else {
        return acc;
      }
    }
  }

  Poly factor() {
    skip_ws();
    bool neg = false;
    while (peek() == '-') {
      neg = !neg;
      ++pos_;
      skip_ws();
    }
    Poly base(space_);
    char c = peek();
    if (c == '(') {
      ++pos_;
      base = expr();
      skip_ws();
      if (peek() != ')') throw ParseError("missing ')' in polynomial");
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      base = Poly::constant(space_, number());
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = ident();
      base = Poly::variable(space_, space_->index(name));
    } else {
      throw ParseError(std::string("unexpected character '") + c +
                       "' in polynomial");
    }
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      int e = static_cast<int>(number());
      Poly p = Poly::constant(space_, 1.0);
      for (int k = 0; k < e; ++k) p = p * base;
      base = p;
    }
    if (neg) base *= -1.0;
    return base;
  }

  double number() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    if (start == pos_) throw ParseError("expected a number");
    return std::stod(text_.substr(start, pos_ - start));
  }

  std::string ident() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  VarSpacePtr space_;
  size_t pos_ = 0;
};

}  // namespace detail

inline Poly parse_poly(const std::string& text, VarSpacePtr space) {
  return detail::PolyParser(text, std::move(space)).parse();
}

}  // namespace pdclf
