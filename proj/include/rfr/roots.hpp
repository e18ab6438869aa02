#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfr/errors.hpp"

namespace rfr {

namespace detail {

inline double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

/// Sum of |c_i x^i|, the natural magnitude scale for residual checks.
inline double poly_scale(const std::vector<double>& c, double x) {
  double s = 0.0, xp = 1.0;
  for (double ci : c) {
    s += std::fabs(ci * xp);
    xp *= x;
  }
  return std::max(s, 1e-300);
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
  if (d.empty()) d.push_back(0.0);
  return d;
}

/// Bisection on a bracketing interval [a, b] with f(a) f(b) <= 0.
inline double bisect(const std::vector<double>& c, double a, double b) {
  double fa = poly_eval(c, a);
  if (fa == 0.0) return a;
  double fb = poly_eval(c, b);
  if (fb == 0.0) return b;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = poly_eval(c, m);
    if (fm == 0.0) return m;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// All real roots of the polynomial c0 + c1 x + ... strictly inside (lo, hi),
/// sorted ascending and deduplicated at 1e-9 spacing. Roots are bracketed by
/// Rolle's theorem: the roots of the derivative (found recursively) partition
/// (lo, hi) into monotone pieces, each holding at most one sign change.
inline std::vector<double> real_roots_in_interval(std::vector<double> coeffs, double lo, double hi,
                                                  double tol = 1e-9) {
  while (!coeffs.empty() && std::fabs(coeffs.back()) <= 1e-300) coeffs.pop_back();
  if (coeffs.empty())
    throw DegenerateLeadingCoefficient("all polynomial coefficients vanish");
  if (coeffs.size() == 1) return {};
  if (!(lo < hi)) throw InvalidMoments("real_roots_in_interval requires lo < hi");

  std::vector<double> breakpoints = {lo};
  if (coeffs.size() > 2) {
    for (double r : real_roots_in_interval(detail::poly_derivative(coeffs), lo, hi, tol))
      breakpoints.push_back(r);
  }
  breakpoints.push_back(hi);

  std::vector<double> roots;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    const double fa = detail::poly_eval(coeffs, a);
    const double fb = detail::poly_eval(coeffs, b);
    double root;
    if (fa == 0.0 && i > 0) {
      root = a;  // derivative root that is also a polynomial root (double root)
    } else if ((fa < 0.0) != (fb < 0.0)) {
      root = detail::bisect(coeffs, a, b);
    } else {
      continue;
    }
    if (root <= lo || root >= hi) continue;
    if (std::fabs(detail::poly_eval(coeffs, root)) > tol * detail::poly_scale(coeffs, root))
      continue;
    if (!roots.empty() && root - roots.back() <= 1e-9) continue;
    roots.push_back(root);
  }
  return roots;
}

}  // namespace rfr
