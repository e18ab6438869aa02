#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rfr/errors.hpp"
#include "rfr/moments.hpp"

namespace rfr {

enum class Regime { R1, R2, R3 };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::R1: return "r1";
    case Regime::R2: return "r2";
    case Regime::R3: return "r3";
  }
  return "?";
}

/// Problem constants: psi1 = N/d, psi2 = n/d, ridge lambda, objective weight
/// alpha, target magnitudes F1 (linear part), F_star (nonlinear part), noise
/// level tau. rho = F1^2/(F_star^2 + tau^2) is the SNR (+inf when noiseless).
struct RegimeParams {
  double psi1 = 1.0;
  double psi2 = 1.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double F1 = 1.0;
  double F_star = 0.0;
  double tau = 0.0;

  double f1_sq() const { return F1 * F1; }
  double noise_sq() const { return F_star * F_star + tau * tau; }
  double rho() const {
    const double n = noise_sq();
    return n > 0.0 ? f1_sq() / n : kInf;
  }
  double rho_inv() const { return noise_sq() / f1_sq(); }

  void validate() const {
    if (!(psi1 > 0.0) || !(psi2 > 0.0)) throw InvalidMoments("psi1, psi2 must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidMoments("alpha must lie in [0, 1)");
    if (!(F1 > 0.0)) throw InvalidMoments("F1 must be positive");
    if (lambda < 0.0 || F_star < 0.0 || tau < 0.0)
      throw InvalidMoments("lambda, F_star, tau must be nonnegative");
  }
};

struct RegimeEvaluation {
  double error = 0.0;
  double sensitivity = 0.0;
  double objective = 0.0;
};

namespace detail {

/// Compensated (Kahan) sum of a fixed list of terms; the degree-6 chi/zeta
/// polynomials cancel heavily for |chi zeta^2| near 1.
template <size_t N>
inline double ksum(const std::array<double, N>& terms) {
  double sum = 0.0, comp = 0.0;
  for (double term : terms) {
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace detail

/// Ridgeless link function: the negative root of  zeta^2 chi^2 + (psi zeta^2 - zeta^2
/// - 1) chi - psi = 0, with psi = min(psi1, psi2). Monotone increasing in
/// zeta^2 from -psi (zeta^2 = 0) to min(0, 1-psi) (zeta^2 = inf).
inline double chi(double zeta_sq, double psi) {
  if (zeta_sq >= 1e12 || zeta_sq == kInf) return std::min(0.0, 1.0 - psi);
  const double X = psi * zeta_sq - zeta_sq - 1.0;
  const double s = std::sqrt(X * X + 4.0 * zeta_sq * psi);
  if (X < 0.0) return -2.0 * psi / (s - X);  // cancellation-free branch
  return -(s + X) / (2.0 * zeta_sq);
}

/// Regularized link function omega in moment form (well defined at mu_star = 0 as
/// long as lambda*psi > 0). Always <= 0.
inline double omega_from_moments(double mu1_sq, double mu_star_sq, double psi, double lambda) {
  const double lp = lambda * psi + mu_star_sq;
  const double X = psi * mu1_sq - mu1_sq - lambda * psi - mu_star_sq;
  if (lp <= 0.0) {
    if (mu1_sq == 0.0) return 0.0;  // constant activation
    // ridgeless linear activation: omega -> -psi/(1-psi) below psi = 1,
    // diverges otherwise
    if (psi < 1.0) return -psi / (1.0 - psi);
    return -kInf;
  }
  const double s = std::sqrt(X * X + 4.0 * psi * mu1_sq * lp);
  if (X < 0.0) return -2.0 * psi * mu1_sq / (s - X);
  return -(s + X) / (2.0 * lp);
}

/// omega in the (zeta^2, lambda_bar) parametrization, with the
/// analytic limits for zeta^2 = inf and lambda_bar = inf.
inline double omega(double zeta_sq, double psi, double lambda_bar) {
  if (lambda_bar == kInf) return 0.0;
  if (zeta_sq >= 1e12 || zeta_sq == kInf) {
    // the zeta^2 -> inf limit does not depend on a finite lambda_bar
    return omega_from_moments(1.0, 0.0, psi, 0.0);
  }
  return omega_from_moments(zeta_sq, 1.0, psi, lambda_bar);
}

namespace detail {

struct R1Ratios {
  double bias = 0.0;        // E1/E0
  double variance = 0.0;    // E2/E0
  double sens_f1 = 0.0;     // zeta^2 * D1 / ((chi zeta^2 - 1) D0)
  double sens_noise = 0.0;  // zeta^2 * D2 / D0
};

/// Exact mu_star = 0 (linear activation) limits of the ridgeless ratios.
inline R1Ratios r1_linear_limits(double psi1, double psi2) {
  const double psi = std::min(psi1, psi2);
  R1Ratios r;
  if (psi >= 1.0) {
    r.bias = 0.0;
    r.sens_f1 = 1.0;
    if (psi1 <= psi2) {
      r.variance = psi1 / (psi2 - psi1);
      r.sens_noise = 1.0 / (psi2 - psi1);
    } else if (psi2 == 1.0) {
      r.variance = kInf;
      r.sens_noise = kInf;
    } else {
      r.variance = (2.0 * psi2 - psi2 * psi2 - psi1) / ((psi2 - 1.0) * (psi2 - psi1));
      r.sens_noise = (1.0 - psi1) / ((psi2 - 1.0) * (psi2 - psi1));
    }
    return r;
  }
  // u = chi * zeta^2 -> -psi/(1-psi); limit polynomials in u
  const double u = -psi / (1.0 - psi);
  const double u2 = u * u;
  const double um1 = u - 1.0;
  const double E0L = psi1 * psi2 * um1 * um1 * um1 - (psi1 + psi2) * u2 * um1 + u2 * (u + 1.0);
  const double E1L = psi1 * psi2 * um1;
  const double E2L = u2 * ((psi1 - 1.0) * u - (psi1 + 1.0));
  const double D0L = -E0L;
  const double zD1L = -u2 * ((psi1 - 1.0) * u - psi1 - 1.0) * ((psi2 - 1.0) * u - psi2 - 1.0);
  const double zD2L = -E2L;
  r.bias = E1L / E0L;
  r.variance = E2L / E0L;
  r.sens_f1 = zD1L / (um1 * D0L);
  r.sens_noise = zD2L / D0L;
  return r;
}

inline R1Ratios r1_ratios(double mu1_sq, double mu_star_sq, double psi1, double psi2) {
  if (mu_star_sq <= 0.0 || (mu1_sq > 0.0 && mu1_sq / mu_star_sq >= 1e12))
    return r1_linear_limits(psi1, psi2);
  const double psi = std::min(psi1, psi2);
  const double z2 = mu1_sq / mu_star_sq;
  const double c = chi(z2, psi);
  const double c2 = c * c, c3 = c2 * c, c4 = c3 * c, c5 = c4 * c, c6 = c5 * c;
  const double z4 = z2 * z2, z6 = z4 * z2;
  const double pp = psi1 * psi2;

  const double E0 = ksum<10>({
      -c5 * z6, 3.0 * c4 * z4, (pp - psi2 - psi1 + 1.0) * c3 * z6, -2.0 * c3 * z4,
      -3.0 * c3 * z2, (psi1 + psi2 - 3.0 * pp + 1.0) * c2 * z4, 2.0 * c2 * z2, c2,
      3.0 * pp * c * z2, -pp});
  const double E1 = ksum<4>({psi2 * c3 * z4, -psi2 * c2 * z2, pp * c * z2, -pp});
  const double E2 = ksum<8>({c5 * z6, -3.0 * c4 * z4, (psi1 - 1.0) * c3 * z6, 2.0 * c3 * z4,
                             3.0 * c3 * z2, (-psi1 - 1.0) * c2 * z4, -2.0 * c2 * z2, -c2});
  const double D0 = ksum<10>({c5 * z6, -3.0 * c4 * z4, (psi1 + psi2 - pp - 1.0) * c3 * z6,
                              2.0 * c3 * z4, 3.0 * c3 * z2, (3.0 * pp - psi2 - psi1 - 1.0) * c2 * z4,
                              -2.0 * c2 * z2, -c2, -3.0 * pp * c * z2, pp});
  const double D1 = ksum<8>({c6 * z6, -2.0 * c5 * z4, -(pp - psi1 - psi2 + 1.0) * c4 * z6,
                             c4 * z4, c4 * z2, -2.0 * (1.0 - pp) * c3 * z4,
                             -(psi1 + psi2 + pp + 1.0) * c2 * z2, -c2});
  const double D2 = ksum<4>({-(psi1 - 1.0) * c3 * z4, -c3 * z2, (psi1 + 1.0) * c2 * z2, c2});

  R1Ratios r;
  r.bias = E1 / E0;
  r.variance = E2 / E0;
  r.sens_f1 = z2 * D1 / ((c * z2 - 1.0) * D0);
  r.sens_noise = z2 * D2 / D0;
  return r;
}

inline void require_off_threshold(const RegimeParams& p) {
  if (p.psi1 == p.psi2)
    throw InterpolationThreshold("psi1 = psi2 = " + std::to_string(p.psi1) +
                                 ": the ridgeless objective is not defined");
}

}  // namespace detail

/// Ridgeless (lambda -> 0+) asymptotic test error.
inline double error_r1(const Moments& m, const RegimeParams& p) {
  detail::require_off_threshold(p);
  const auto r = detail::r1_ratios(m.mu1 * m.mu1, m.mu_star_sq, p.psi1, p.psi2);
  return p.f1_sq() * r.bias + p.noise_sq() * r.variance + p.F_star * p.F_star;
}

/// Ridgeless asymptotic sensitivity. The mu1^2/mu_star^2 prefactor is folded
/// into the ratios so the linear-activation limit stays finite.
inline double sensitivity_r1(const Moments& m, const RegimeParams& p) {
  detail::require_off_threshold(p);
  if (m.mu1 == 0.0) return 0.0;
  const auto r = detail::r1_ratios(m.mu1 * m.mu1, m.mu_star_sq, p.psi1, p.psi2);
  return p.f1_sq() * r.sens_f1 + p.noise_sq() * r.sens_noise;
}

namespace detail {

struct WideRatios {
  double bias = 0.0;
  double variance = 0.0;
};

/// Bias/variance ratios of the overparameterized error as functions of omega
/// (the large-sample bias shares the
/// denominator).
inline WideRatios wide_ratios(double w, double psi) {
  if (w == -kInf) {
    if (psi > 1.0) return {0.0, 1.0 / (psi - 1.0)};
    if (psi == 1.0) return {0.0, kInf};
    return {0.0, 1.0 / (psi - 1.0)};  // not reached: omega stays finite for psi < 1
  }
  const double den = (psi - 1.0) * w * w * w + (1.0 - 3.0 * psi) * w * w + 3.0 * psi * w - psi;
  return {(psi * w - psi) / den, (w * w * w - w * w) / den};
}

}  // namespace detail

/// Highly overparameterized (psi1 -> inf) asymptotic test error.
inline double error_r2(const Moments& m, const RegimeParams& p) {
  const double w = omega_from_moments(m.mu1 * m.mu1, m.mu_star_sq, p.psi2, p.lambda);
  const auto r = detail::wide_ratios(w, p.psi2);
  return p.f1_sq() * r.bias + p.noise_sq() * r.variance + p.F_star * p.F_star;
}

/// Asymptotic sensitivity in the overparameterized limit.
inline double sensitivity_r2(const Moments& m, const RegimeParams& p) {
  const double w = omega_from_moments(m.mu1 * m.mu1, m.mu_star_sq, p.psi2, p.lambda);
  const double psi2 = p.psi2;
  if (w == -kInf) {
    // leading w^3 balance of the expression below
    return (p.noise_sq() + p.f1_sq() * (psi2 - 1.0)) / (psi2 - 1.0);
  }
  const double num =
      w * w * (p.noise_sq() * (-1.0 + w) + p.f1_sq() * (-1.0 - psi2 + w * (-1.0 + psi2)));
  const double den = (-1.0 + w) * (psi2 - 2.0 * w * psi2 + w * w * (-1.0 + psi2));
  return num / den;
}

/// Large-sample (psi2 -> inf) asymptotic test error.
inline double error_r3(const Moments& m, const RegimeParams& p) {
  const double mu1_sq = m.mu1 * m.mu1;
  const double w = omega_from_moments(mu1_sq, m.mu_star_sq, p.psi1, p.lambda);
  const double psi1 = p.psi1;
  double bias;
  if (w == -kInf) {
    bias = 0.0;
  } else {
    const double den =
        (psi1 - 1.0) * w * w * w + (1.0 - 3.0 * psi1) * w * w + 3.0 * psi1 * w - psi1;
    double num = psi1 * w - psi1;
    if (m.mu_star_sq > 0.0 && mu1_sq > 0.0)
      num += (w * w * w - w * w) * m.mu_star_sq / mu1_sq;
    bias = num / den;
  }
  return p.f1_sq() * bias + p.F_star * p.F_star;
}

/// Asymptotic sensitivity in the large-sample limit.
inline double sensitivity_r3(const Moments& m, const RegimeParams& p) {
  const double w = omega_from_moments(m.mu1 * m.mu1, m.mu_star_sq, p.psi1, p.lambda);
  const double psi1 = p.psi1;
  if (w == -kInf) return p.f1_sq();
  return p.f1_sq() * (1.0 + 2.0 / (-1.0 + w) +
                      psi1 / (psi1 - 2.0 * w * psi1 + w * w * (-1.0 + psi1)));
}

/// Objective O = (1-alpha) E + alpha S, dispatching on the regime.
inline RegimeEvaluation objective(Regime regime, const Moments& m, const RegimeParams& p) {
  RegimeEvaluation ev;
  switch (regime) {
    case Regime::R1:
      ev.error = error_r1(m, p);
      ev.sensitivity = sensitivity_r1(m, p);
      break;
    case Regime::R2:
      ev.error = error_r2(m, p);
      ev.sensitivity = sensitivity_r2(m, p);
      break;
    case Regime::R3:
      ev.error = error_r3(m, p);
      ev.sensitivity = sensitivity_r3(m, p);
      break;
  }
  ev.objective = (1.0 - p.alpha) * ev.error + p.alpha * ev.sensitivity;
  return ev;
}

}  // namespace rfr
