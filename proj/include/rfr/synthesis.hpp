#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "rfr/activation.hpp"
#include "rfr/errors.hpp"
#include "rfr/moments.hpp"

namespace rfr {

/// Gauss error function. std::erf is correctly rounded to well below the
/// 1e-14 contract on every libm we target.
inline double erf(double x) { return std::erf(x); }

enum class NormKind { One, Two };

/// A concrete activation achieving prescribed moments with minimal norm.
struct SynthesizedAF {
  ActivationSpec af = ActivationSpec::relu();
  Moments target;
  NormKind norm_kind = NormKind::Two;
  double norm_value = 0.0;
  double s_param = 0.0;  // saturation half-width (L1 only); +inf for linear
};

/// Minimal-L2-norm activation for given moments: the quadratic
/// a x^2 + b x + c with a = sign * mu_star/sqrt(2), b = mu1, c = mu0 - a;
/// degenerates to the unique linear minimizer when mu_star = 0.
inline SynthesizedAF synthesize_l2(const Moments& target, int sign = +1) {
  if (target.mu_star_sq < 0.0) throw InvalidMoments("mu_star^2 < 0");
  SynthesizedAF out;
  out.target = target;
  out.norm_kind = NormKind::Two;
  if (target.mu_star_sq == 0.0) {
    out.af = ActivationSpec::linear(target.mu1, target.mu0);
    out.s_param = kInf;
  } else {
    const double a = (sign >= 0 ? 1.0 : -1.0) * std::sqrt(target.mu_star_sq / 2.0);
    out.af = ActivationSpec::quadratic(a, target.mu1, target.mu0 - a);
    out.s_param = kInf;
  }
  out.norm_value = functional_norms(out.af).norm2;
  return out;
}

namespace detail {

/// zeta^2 realized by the saturated-linear family at half-width s, written against
/// erfc to avoid exp overflow:
///   zeta^2(s) = erf^2 / (erfc (s^2 + erf) - sqrt(2/pi) s e^{-s^2/2}).
/// Monotone increasing on s >= 0. The s -> 0+ limit is 2/(pi-2) (the
/// sign-function limit: slope grows as the clamp width shrinks), so the
/// symmetric family attains exactly zeta^2 in [2/(pi-2), inf).
inline double satlin_zeta_sq(double s) {
  if (s < 1e-4) {
    // Taylor expansion about 0 (the direct form is 0/0 there)
    return 1.7519383938841087 +
           s * (2.5645214748666416 + s * (2.1469208737194228 + s * 1.3886244810496342));
  }
  const double e = std::erf(s / std::numbers::sqrt2);
  const double ec = std::erfc(s / std::numbers::sqrt2);
  const double den =
      ec * (s * s + e) - std::sqrt(2.0 / std::numbers::pi) * s * std::exp(-0.5 * s * s);
  if (den <= 0.0) return kInf;  // deep saturation: denominator underflows
  return e * e / den;
}

/// Smallest attainable zeta^2 of the symmetric saturated-linear family.
inline constexpr double satlin_zeta_sq_floor() { return 1.7519383938841087; }

}  // namespace detail

/// Minimal-L1-norm activation for given moments: the symmetric saturated
/// linear function mu0 + b clamp(x, -s, s). The saturation
/// equation is solved by bisection over the signed parameter (negative
/// values carry zeta^2 below 2/(pi-2) and flip the slope's sign).
inline SynthesizedAF synthesize_l1(const Moments& target) {
  if (target.mu1 == 0.0 && target.mu_star_sq > 0.0)
    throw InvalidMoments("synthesize_l1 requires mu1 != 0 unless mu_star = 0");
  SynthesizedAF out;
  out.target = target;
  out.norm_kind = NormKind::One;
  if (target.mu_star_sq == 0.0) {
    // s = +inf branch: the linear representative
    out.af = ActivationSpec::linear(target.mu1, target.mu0);
    out.s_param = kInf;
    out.norm_value = functional_norms(out.af).norm1;
    return out;
  }
  const double zeta_sq = target.mu1 * target.mu1 / target.mu_star_sq;
  if (zeta_sq < detail::satlin_zeta_sq_floor())
    throw SolverDiverged(
        "zeta^2 = " + std::to_string(zeta_sq) +
        " is below 2/(pi-2), the floor of the symmetric saturated-linear family");
  constexpr double cap = 40.0;
  double lo = 0.0, hi = 1.0;
  while (detail::satlin_zeta_sq(hi) < zeta_sq) {
    hi *= 2.0;
    if (hi > cap) throw SolverDiverged("zeta^2 outside the attainable saturation range");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (detail::satlin_zeta_sq(mid) < zeta_sq)
      lo = mid;
    else
      hi = mid;
  }
  const double s = 0.5 * (lo + hi);
  const double b = target.mu1 / std::erf(s / std::numbers::sqrt2);
  out.af = ActivationSpec::saturated_linear(target.mu0, b, s);
  out.s_param = s;
  out.norm_value = functional_norms(out.af).norm1;
  return out;
}

}  // namespace rfr
