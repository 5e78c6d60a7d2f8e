#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "stlf/error.hpp"

namespace stlf {

/// Natural cubic spline (zero second derivative at both end knots).
///
/// Knot abscissae must be strictly increasing. With two knots the spline is
/// the straight line through them. Evaluation outside the knot range
/// continues the end cubic pieces.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw ShapeError("spline knot arrays differ in length");
    if (x_.size() < 2) throw InsufficientExtrema("spline needs at least 2 knots");
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i] > x_[i - 1])) throw NumericError("spline knots must be strictly increasing");
    }
    solve_second_derivatives();
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    // Interval k such that x_[k] <= t < x_[k+1], clamped to the end pieces.
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - t) / h;
    const double b = (t - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
  }

  std::span<const double> second_derivatives() const noexcept { return m_; }

 private:
  // Thomas algorithm on the symmetric tridiagonal system for interior
  // second derivatives.
  void solve_second_derivatives() {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double lower = upper[i - 1];  // symmetric system
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
      m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
    }
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace stlf
