#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"

namespace parafreq {

using Exponent = std::array<int, 3>;

/// Sparse real polynomial in up to three Cartesian variables.
class Polynomial {
 public:
  Polynomial() = default;

  explicit Polynomial(int dim) : dim_(dim) {
    require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument, "polynomial dimension must be 1..3");
  }

  static Polynomial constant(int dim, double c) {
    Polynomial p(dim);
    p.add_term({0, 0, 0}, c);
    return p;
  }

  static Polynomial monomial(int dim, Exponent e, double c = 1.0) {
    Polynomial p(dim);
    p.add_term(e, c);
    return p;
  }

  /// x_axis - shift
  static Polynomial shifted_variable(int dim, int axis, double shift = 0.0) {
    Exponent e{0, 0, 0};
    e[axis] = 1;
    Polynomial p = monomial(dim, e);
    p.add_term({0, 0, 0}, -shift);
    return p;
  }

  /// Builds sum_j coeffs[j] * (x_axis - shift)^j.
  static Polynomial univariate(int dim, int axis, const std::vector<double>& coeffs,
                               double shift = 0.0) {
    Polynomial result(dim);
    Polynomial power = constant(dim, 1.0);
    const Polynomial base = shifted_variable(dim, axis, shift);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j] != 0.0) result += power * coeffs[j];
      if (j + 1 < coeffs.size()) power = power * base;
    }
    return result;
  }

  int dim() const noexcept { return dim_; }
  const std::map<Exponent, double>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  int degree() const noexcept {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
  }

  int degree_in(int axis) const noexcept {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[axis]);
    return d;
  }

  double coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  double max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  void add_term(const Exponent& e, double c) {
    for (int i = dim_; i < 3; ++i)
      require(e[i] == 0, ErrorCode::InvalidArgument, "exponent uses an axis beyond the dimension");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Polynomial derivative(int axis) const {
    Polynomial d(dim_);
    for (const auto& [e, c] : terms_) {
      if (e[axis] == 0) continue;
      Exponent de = e;
      de[axis] -= 1;
      d.add_term(de, c * e[axis]);
    }
    return d;
  }

  Polynomial laplacian() const {
    Polynomial lap(dim_);
    for (int i = 0; i < dim_; ++i) lap += derivative(i).derivative(i);
    return lap;
  }

  /// Powers x_i^k for k <= deg, shared by every polynomial evaluated at one point.
  using PowerTable = std::array<std::array<double, 32>, 3>;

  static void fill_powers(PowerTable& pw, const Point& x, int dim, int deg) {
    deg = std::min(deg, 31);
    for (int i = 0; i < 3; ++i) {
      pw[i][0] = 1.0;
      const double xi = i < dim ? x[i] : 0.0;
      for (int k = 1; k <= deg; ++k) pw[i][k] = pw[i][k - 1] * xi;
    }
  }

  double operator()(const PowerTable& pw) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
    return s;
  }

  double operator()(const Point& x) const {
    PowerTable pw;
    fill_powers(pw, x, dim_, degree());
    return (*this)(pw);
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, double s) {
    Polynomial r(a.dim_);
    if (s == 0.0) return r;
    for (const auto& [e, c] : a.terms_) r.add_term(e, c * s);
    return r;
  }
  friend Polynomial operator*(double s, const Polynomial& a) { return a * s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_dim(b);
    Polynomial r(a.dim_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_)
        r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
    return r;
  }

 private:
  void check_dim(const Polynomial& o) const {
    require(o.dim_ == dim_, ErrorCode::ReprMismatch, "polynomial dimensions differ");
  }

  int dim_ = 1;
  std::map<Exponent, double> terms_;
};

}  // namespace parafreq
