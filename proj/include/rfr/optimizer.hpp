#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rfr/asymptotics.hpp"
#include "rfr/errors.hpp"
#include "rfr/moments.hpp"
#include "rfr/roots.hpp"

namespace rfr {

/// Decision constants of the ridgeless case table.
struct R1Thresholds {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double alphaL = 0.0;
  double alphaC = 0.0;  // -inf in the psi1 > psi2 = 1 special case
  double alphaR = 0.0;  // NaN when undefined (psi1 > psi2 = 1)
  double A = 0.0;       // psi1 > psi2 only
  double B = 0.0;       // psi1 > psi2 only
  bool e1 = false;
  bool e2 = false;
};

/// Result of a regime optimizer: the optimal Moebius/chi variable, the
/// branch that produced it, a canonical representative of the optimal
/// moment set, and the objective value.
struct Optimum {
  Regime regime = Regime::R1;
  double x_opt = 0.0;  // NaN for the diverging-mu1 sentinel (no finite x)
  std::string branch;
  Moments canonical_moments;
  double objective = 0.0;
  bool is_linear = false;
};

namespace detail {

inline void require_not_threshold(const RegimeParams& p) {
  if (p.psi1 == p.psi2)
    throw InterpolationThreshold("psi1 = psi2: objective undefined in regime R1");
}

/// zeta^2 on the ridgeless optimal set: x mu1^2 (-1+x+psi) = mu_star^2 (psi+x).
inline double r1_zeta_sq_of_x(double x, double psi) {
  return (psi + x) / (x * (-1.0 + x + psi));
}

inline Moments r1_moments_of_x(double x, double psi) {
  const double xR = std::min(0.0, 1.0 - psi);
  if (x >= xR - 1e-13) {
    // boundary: linear activation, scale-free representative
    return Moments::from_parts(0.0, 1.0, 0.0);
  }
  const double z2 = std::max(0.0, r1_zeta_sq_of_x(x, psi));
  return Moments::from_parts(0.0, std::sqrt(z2), 1.0);
}

inline double r1_objective_of_x(double x, const RegimeParams& p) {
  const double psi = std::min(p.psi1, p.psi2);
  const Moments m = r1_moments_of_x(x, psi);
  const auto ev = objective(Regime::R1, m, p);
  return ev.objective;
}

/// mu1^2 on the overparameterized optimal set at mu_star = 1 (canonical
/// representative):  mu1^2 (-1+2 psi2-x)(-1+x) = -2 (mu_star^2+lambda psi2)(1+x).
inline double r2_mu1_sq_of_x(double x, double psi2, double lambda) {
  return 2.0 * (1.0 + lambda * psi2) * (1.0 + x) / ((2.0 * psi2 - 1.0 - x) * (1.0 - x));
}

inline Moments r2_moments_of_x(double x, double psi2, double lambda) {
  const double m1sq = std::max(0.0, r2_mu1_sq_of_x(x, psi2, lambda));
  return Moments::from_parts(0.0, std::sqrt(m1sq), 1.0);
}

inline double r2_objective_of_x(double x, const RegimeParams& p) {
  const Moments m = r2_moments_of_x(x, p.psi2, p.lambda);
  return objective(Regime::R2, m, p).objective;
}

/// mu1^2 on the large-sample optimal set at mu_star = 0:
///   mu1^2 (-1+2 psi1-x)(-1+x) + 2 lambda psi1 (1+x) = 0.
inline double r3_mu1_sq_of_x(double x, double psi1, double lambda) {
  return 2.0 * lambda * psi1 * (1.0 + x) / ((2.0 * psi1 - 1.0 - x) * (1.0 - x));
}

inline Moments r3_moments_of_x(double x, double psi1, double lambda) {
  const double m1sq = std::max(0.0, r3_mu1_sq_of_x(x, psi1, lambda));
  return Moments::from_parts(0.0, std::sqrt(m1sq), 0.0);
}

inline double r3_objective_of_x(double x, const RegimeParams& p) {
  const Moments m = r3_moments_of_x(x, p.psi1, p.lambda);
  return objective(Regime::R3, m, p).objective;
}

}  // namespace detail

/// Numerator polynomial of dO/dx in regime R1 (coefficients
/// normalized by rho so the noiseless limit rho = inf is the plain
/// coefficient set). Degree 5 generally, degree 3 when psi1 = 1 < psi2.
inline std::vector<double> r1_polynomial(const RegimeParams& p) {
  detail::require_not_threshold(p);
  const double a = p.alpha, p1 = p.psi1, p2 = p.psi2, ri = p.rho_inv();
  if (p1 < p2) {
    if (p1 == 1.0) {
      return {
          (-10.0 * a + 10.0 * a * p2 - 4.0 * p2) + ri * (4.0 * a),
          (-20.0 * a + 12.0 * a * p2 - 4.0 * p2) + ri * (4.0 * a),
          (-11.0 * a + 3.0 * a * p2 - p2) + ri * a,
          -2.0 * a,
      };
    }
    const double q = (p1 - 1.0) * (p1 - 1.0) * p1 * p1;
    return {
        -q * (a - 4.0 * a * p1 + (3.0 * a - 1.0) * p2) - ri * q * a,
        2.0 * (p1 - 1.0) * p1 * (a * (p1 * (9.0 * p1 - 6.0 * p2 - 4.0) + p2) + 2.0 * p1 * p2) -
            ri * 4.0 * (p1 - 1.0) * p1 * a * p1,
        2.0 * p1 * (a + 4.0 * a * p1 * (4.0 * p1 - 3.0) +
                    p2 * (4.0 * a - 9.0 * a * p1 + 3.0 * p1 - 1.0)) -
            ri * 2.0 * p1 * a * (3.0 * p1 - 1.0),
        4.0 * p1 * (a * (7.0 * p1 - 2.0) - 3.0 * a * p2 + p2) - ri * 4.0 * p1 * a,
        (a * (12.0 * p1 - 1.0) - 3.0 * a * p2 + p2) - ri * a,
        2.0 * a,
    };
  }
  // psi1 > psi2 branch
  return {
      p2 * p2 *
          ((p2 - 1.0) * (p2 - 1.0) * (2.0 * a * p1 - (3.0 * a + 1.0) * p2 + a) +
           ri * (a * p2 * p2 - 2.0 * (a + 1.0) * p2 + a + 2.0 * p1)),
      2.0 * p2 *
          (-(p2 - 1.0) * ((7.0 * a + 2.0) * p2 * p2 - p2 * (4.0 * a * p1 + 3.0 * a + 1.0) + p1) +
           ri * (p2 * (2.0 * a * (p2 - 1.0) - 1.0) + p1)),
      2.0 * p2 *
          (-((13.0 * a + 3.0) * p2 * p2 - 2.0 * p2 * (3.0 * a * p1 + 5.0 * a + 1.0) +
             2.0 * a * p1 + a + p1) +
           ri * a * (3.0 * p2 - 1.0)),
      4.0 * p2 * ((2.0 * a * (p1 + 1.0) - (6.0 * a + 1.0) * p2) + ri * a),
      (2.0 * a * p1 - (11.0 * a + 1.0) * p2 + a) + ri * a,
      -2.0 * a,
  };
}

namespace detail {

/// beta1 for psi1 > psi2: the quartic r(x) derived from the proof's
/// g-polynomial via g(2 rho alpha / ((x - psi2) psi2)) = 0, written with the
/// rho^4 normalization so rho = inf keeps the leading bracket only.
inline std::vector<double> beta1_r_polynomial(double p2, double a, double ri) {
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
  const double s = p2, s2 = s * s, s3 = s2 * s;
  const double ri2 = ri * ri, ri3 = ri2 * ri;
  const double r0 =
      s3 * s3 *
      ((256.0 * a4 + 128.0 * a3 * s + 128.0 * a3 - 112.0 * a2 * s2 + 320.0 * a2 * s -
        112.0 * a2 + 16.0 * a * s3 - 8.0 * a * s2 - 8.0 * a * s + 16.0 * a + s2) +
       ri * (128.0 * a3 - 224.0 * a2 * s - 224.0 * a2 + 48.0 * a * s2 + 40.0 * a * s + 48.0 * a) +
       ri2 * (-112.0 * a2 + 48.0 * a * s + 48.0 * a) + ri3 * 16.0 * a);
  const double r1 =
      -4.0 * s3 * s2 *
      ((32.0 * a3 * s + 32.0 * a3 - 56.0 * a2 * s2 + 160.0 * a2 * s - 56.0 * a2 +
        12.0 * a * s3 - 6.0 * a * s2 - 6.0 * a * s + 12.0 * a + s2) +
       ri * (32.0 * a3 - 112.0 * a2 * s - 112.0 * a2 + 36.0 * a * s2 + 30.0 * a * s + 36.0 * a) +
       ri2 * (-56.0 * a2 + 36.0 * a * s + 36.0 * a) + ri3 * 12.0 * a);
  const double r2 =
      -2.0 * s2 * s2 *
      ((56.0 * a2 * s2 - 160.0 * a2 * s + 56.0 * a2 - 24.0 * a * s3 + 12.0 * a * s2 +
        12.0 * a * s - 24.0 * a - 3.0 * s2) +
       ri * (112.0 * a2 * s + 112.0 * a2 - 72.0 * a * s2 - 60.0 * a * s - 72.0 * a) +
       ri2 * (56.0 * a2 - 72.0 * a * s - 72.0 * a) + ri3 * (-24.0 * a));
  const double r3 =
      -4.0 * s3 *
      ((4.0 * a * s3 - 2.0 * a * s2 - 2.0 * a * s + 4.0 * a + s2) +
       ri * (12.0 * a * s2 + 10.0 * a * s + 12.0 * a) + ri2 * (12.0 * a * s + 12.0 * a) +
       ri3 * 4.0 * a);
  const double r4 = s2 * s2;
  return {r0, r1, r2, r3, r4};
}

}  // namespace detail

/// Case-table decision constants. For psi1 > psi2 the beta1 value is the
/// smallest root of the quartic r above psi2 (+inf when r has none, in which
/// case the first column never applies).
inline R1Thresholds r1_thresholds(const RegimeParams& p) {
  detail::require_not_threshold(p);
  const double a = p.alpha, p1 = p.psi1, p2 = p.psi2, ri = p.rho_inv();
  R1Thresholds t;
  if (p1 < p2) {
    t.beta1 = std::min(p1 - 4.0, -3.0 * p1) -
              8.0 * std::sqrt(std::fabs(1.0 - p1)) * std::max(1.0 / p1, std::pow(p1, 1.5)) +
              8.0 * std::max(1.0 / p1, p1 * p1);
    t.beta2 = p1 * (p1 + 2.0) / (p1 + 1.0);
    t.beta3 = p1 + std::fabs(1.0 - p1) * std::min(p1, 1.0 / p1);
    t.alphaL = p2 / (p2 + 1.0 + ri);
    // zero of O(x_L) - O(x_R) in alpha; satisfies alphaL = alphaC =
    // alphaR at psi2 = min{2 psi1, psi1 + 1}
    t.alphaC = p2 / (2.0 * p2 - p1 + std::max(0.0, 1.0 - p1) + ri);
    t.alphaR = p2 / (3.0 * p2 + 1.0 - 2.0 * std::min(1.0 + p1, 2.0 * p1) + ri);
    t.A = t.B = std::numeric_limits<double>::quiet_NaN();
    t.e1 = a < t.alphaR;
    t.e2 = a > t.alphaR;
    return t;
  }
  t.beta2 = p2 + a * p2 / (p2 + 1.0 + ri);
  t.beta3 = p2 == 1.0 ? p2
                      : p2 + std::min(p2, 1.0 / p2) * a * std::pow(std::fabs(p2 - 1.0), 3.0) /
                                 ((p2 - 1.0) * (p2 - 1.0) + ri * (p2 + 3.0));
  t.alphaL = (2.0 * p1 - p2) / (2.0 * p1 - p2 + 1.0 + ri);
  {
    const auto rp = detail::beta1_r_polynomial(p2, a, ri);
    double hi = std::max(2.0 * p2 + 2.0, 16.0);
    std::vector<double> roots;
    while (hi < 1e12) {
      roots = real_roots_in_interval(rp, p2, hi);
      if (!roots.empty()) break;
      hi *= 8.0;
    }
    t.beta1 = roots.empty() ? kInf : roots.front();
  }
  if (p2 == 1.0) {
    t.alphaC = -kInf;  // alpha > alphaC always true
    t.alphaR = std::numeric_limits<double>::quiet_NaN();
    t.A = t.B = std::numeric_limits<double>::quiet_NaN();
    t.e1 = false;
    t.e2 = true;
    return t;
  }
  const double sq = (p2 - 1.0) * (p2 - 1.0);
  if (ri == 0.0) {
    t.alphaC = p1 / (std::max(0.0, 1.0 - p2) + 2.0 * p1 - p2);
    t.alphaR = p2 / (2.0 * p1 + 1.0 - p2 - 2.0 * std::min(1.0, p2));
    t.A = kInf;
    t.B = (2.0 * p2 + 1.0 + 2.0 * std::min(p2 - 1.0, 0.0)) / 2.0;
  } else {
    const double rho = 1.0 / ri;
    t.alphaC = (rho * p1 - (p1 - p2) / std::fabs(1.0 - p2)) /
               (rho * (std::max(0.0, 1.0 - p2) + 2.0 * p1 - p2) + 1.0);
    t.alphaR = (2.0 * (p1 - p2) * std::max(1.0, p2) - rho * sq * p2) /
               (sq * (rho * (2.0 * std::min(1.0, p2) - 2.0 * p1 + p2) - rho - 1.0));
    t.A = p2 + rho * std::min(1.0, p2) * sq / 2.0;
    t.B = (rho * sq * (2.0 * p2 + 1.0 + 2.0 * std::min(p2 - 1.0, 0.0)) + 2.0 * p2 - 1.0 +
           2.0 * p2 * std::max(p2, 1.0) - p2 * p2) /
          (2.0 * rho * sq + 2.0 * std::max(1.0, p2));
  }
  t.e1 = (p1 < t.B) || (a < t.alphaR && t.B < p1 && p1 < t.A);
  t.e2 = (p1 > t.A) || (a > t.alphaR && t.B < p1 && p1 < t.A);
  return t;
}

/// Optimal moment set for the ridgeless regime (case-table dispatch).
inline Optimum solve_r1(const RegimeParams& p) {
  p.validate();
  detail::require_not_threshold(p);
  const auto t = r1_thresholds(p);
  const double a = p.alpha;
  auto near = [](double u, double v) { return std::isfinite(v) && std::fabs(u - v) <= 1e-12; };
  if (near(a, t.alphaL) || near(a, t.alphaC) || near(a, t.alphaR))
    throw TieBreakAmbiguous("alpha coincides with a case-table threshold; x is not unique");
  if (p.psi1 > p.psi2 && (near(p.psi1, t.A) || near(p.psi1, t.B)))
    throw TieBreakAmbiguous("psi1 coincides with A or B; x is not unique");
  if (t.e1 && t.e2) throw SolveFailed("E1 and E2 both hold; thresholds inconsistent");
  if (!t.e1 && !t.e2) throw TieBreakAmbiguous("neither E1 nor E2 holds (boundary case)");

  const double psi = std::min(p.psi1, p.psi2);
  const double psibar = std::max(p.psi1, p.psi2);
  const double xL = -psi, xR = std::min(0.0, 1.0 - psi);
  const auto roots = real_roots_in_interval(r1_polynomial(p), xL, xR);
  auto root = [&](size_t i) -> std::optional<double> {
    if (i < roots.size()) return roots[i];
    return std::nullopt;
  };
  const auto x1 = root(0), x2 = root(1), x3 = root(2);

  const int col = t.beta1 <= psibar ? 1 : (t.beta2 < psibar ? 2 : (t.beta3 < psibar ? 3 : 4));
  auto O = [&](double x) { return detail::r1_objective_of_x(x, p); };
  std::string branch;
  double x = 0.0;

  // "u" below is the case-table join: prefer the second candidate only when it
  // exists and strictly lowers the objective.
  auto sqcup = [&](double first, std::optional<double> second, const std::string& label) {
    if (second && O(*second) < O(first)) {
      branch = label + " -> second";
      return *second;
    }
    branch = label + " -> first";
    return first;
  };
  auto need = [&](const std::optional<double>& r, const char* which) {
    if (!r) throw SolveFailed(std::string("case table requires root ") + which +
                              " which was not found in (xL, xR)");
    return *r;
  };

  int row;
  if (a < t.alphaL && t.e1) {
    row = 1;
    switch (col) {
      case 2: x = sqcup(xR, x1, "xR u x1"); break;
      default: x = xR; branch = "xR"; break;
    }
  } else if (a < t.alphaL && t.e2) {
    row = a > t.alphaC ? 2 : 3;
    switch (col) {
      case 2: x = sqcup(need(x1, "x1"), x3, "x1 u x3"); break;
      case 4: throw SolveFailed("case-table cell (alpha<alphaL, E2, col 4) marked unreachable");
      default: x = need(x1, "x1"); branch = "x1"; break;
    }
  } else if (a > t.alphaL && t.e1 && a > t.alphaC) {
    row = 4;
    if (col == 1) throw SolveFailed("case-table cell (alpha>alphaL, E1, alpha>alphaC, col 1) marked unreachable");
    x = xL;
    branch = "xL";
  } else if (a > t.alphaL && t.e1 && a < t.alphaC) {
    row = 5;
    if (col == 1) throw SolveFailed("case-table cell (alpha>alphaL, E1, alpha<alphaC, col 1) marked unreachable");
    x = xR;
    branch = "xR";
  } else {
    row = 6;
    switch (col) {
      case 2:
      case 3: x = sqcup(xL, x2, "xL u x2"); break;
      default: x = xL; branch = "xL"; break;
    }
  }

  Optimum opt;
  opt.regime = Regime::R1;
  opt.x_opt = x;
  opt.branch = "case-table row " + std::to_string(row) + " col " + std::to_string(col) + ": " + branch;
  opt.is_linear = std::fabs(x - xR) <= 1e-12;
  opt.canonical_moments = detail::r1_moments_of_x(x, psi);
  opt.objective = O(x);
  return opt;
}

/// Optimal moment set in the overparameterized regime: the unique root of
/// the stationarity quartic in (-1, min{1, -1+2 psi2}).
inline Optimum solve_r2(const RegimeParams& p) {
  p.validate();
  const double a = p.alpha, p2 = p.psi2, ri = p.rho_inv();
  const std::vector<double> quartic = {
      8.0 * p2 * ri + (a + 4.0 * p2 * (-1.0 + 2.0 * p2) * (-1.0 + 2.0 * a)),
      8.0 * p2 * ri + 4.0 * ((1.0 - 4.0 * p2) * a + 2.0 * p2 * p2),
      -2.0 * (-3.0 * a + p2 * (2.0 + 4.0 * a)),
      4.0 * a,
      a,
  };
  const double lo = -1.0, hi = std::min(1.0, -1.0 + 2.0 * p2);
  const auto roots = real_roots_in_interval(quartic, lo, hi);
  if (roots.empty())
    throw RootNotFound("stationarity quartic has no root in (-1, min{1, -1+2 psi2})");
  const double x = roots.front();

  Optimum opt;
  opt.regime = Regime::R2;
  opt.x_opt = x;
  opt.branch = "overparameterized quartic root";
  opt.canonical_moments = detail::r2_moments_of_x(x, p2, p.lambda);
  opt.objective = detail::r2_objective_of_x(x, p);
  opt.is_linear = false;
  return opt;
}

/// Optimal moment set in the large-sample regime. The optimum is
/// always linear (mu_star = 0); for alpha = 0 (and psi1 = 1, alpha <= 1/4) it
/// is the diverging-mu1 limit, reported with x_opt = NaN and infinite mu1.
inline Optimum solve_r3(const RegimeParams& p) {
  p.validate();
  const double a = p.alpha, p1 = p.psi1, lam = p.lambda;
  Optimum opt;
  opt.regime = Regime::R3;
  opt.is_linear = true;

  auto diverging = [&](const std::string& branch, double obj) {
    opt.x_opt = std::numeric_limits<double>::quiet_NaN();
    opt.branch = branch;
    opt.canonical_moments.mu0 = 0.0;
    opt.canonical_moments.mu1 = kInf;
    opt.canonical_moments.mu2 = kInf;
    opt.canonical_moments.mu_star_sq = 0.0;
    opt.canonical_moments.zeta_sq = kInf;
    opt.objective = obj;
    return opt;
  };

  if (a == 0.0) {
    // objective F_star^2 for psi1 >= 1; below psi1 = 1 the model keeps the
    // unresolvable bias F1^2 (1 - psi1) even with infinite data
    const double obj = (p1 < 1.0 ? p.f1_sq() * (1.0 - p1) : 0.0) + p.F_star * p.F_star;
    return diverging("large-sample alpha=0 (mu1 -> inf)", obj);
  }
  if (p1 == 1.0 && a <= 0.25) {
    return diverging("large-sample psi1=1, alpha<=1/4 (mu1 -> inf)",
                     a * p.f1_sq() + (1.0 - a) * p.F_star * p.F_star);
  }
  if (p1 == 1.0) {
    const double mu1_sq =
        (-4.0 * a * a * lam + 3.0 * a * lam + std::sqrt(a) * lam) / (16.0 * a * a - 8.0 * a + 1.0);
    opt.branch = "large-sample psi1=1 closed form";
    opt.canonical_moments = Moments::from_parts(0.0, std::sqrt(mu1_sq), 0.0);
    const auto ev = objective(Regime::R3, opt.canonical_moments, p);
    opt.objective = ev.objective;
    const double w = omega_from_moments(mu1_sq, 0.0, p1, lam);
    opt.x_opt = w == -kInf ? -1.0 : (1.0 + w) / (w - 1.0);
    return opt;
  }
  // psi1 != 1: the overparameterized stationarity quartic in the noiseless
  // limit, respelled for psi1
  const std::vector<double> quartic = {
      a + 4.0 * p1 * (-1.0 + 2.0 * p1) * (-1.0 + 2.0 * a),
      4.0 * ((1.0 - 4.0 * p1) * a + 2.0 * p1 * p1),
      -2.0 * (-3.0 * a + p1 * (2.0 + 4.0 * a)),
      4.0 * a,
      a,
  };
  const std::vector<double> roots =
      real_roots_in_interval(quartic, -1.0, std::min(1.0, -1.0 + 2.0 * p1));
  if (roots.empty())
    throw RootNotFound("stationarity quartic has no root in (-1, min{1, -1+2 psi1})");
  const double x = roots.front();
  opt.x_opt = x;
  opt.branch = "large-sample quartic root";
  opt.canonical_moments = detail::r3_moments_of_x(x, p1, lam);
  opt.objective = detail::r3_objective_of_x(x, p);
  return opt;
}

/// Dense-evaluation argmin of the regime objective over its x-interval.
/// Deliberately brute force: this is the independent oracle the tests pit
/// the case machines against.
inline std::pair<double, double> grid_oracle(Regime regime, const RegimeParams& p,
                                             int grid_points = 20001) {
  p.validate();
  if (grid_points < 1001) throw InvalidMoments("grid_oracle requires grid_points >= 1001");
  double lo, hi;
  bool closed = false;
  switch (regime) {
    case Regime::R1: {
      detail::require_not_threshold(p);
      const double psi = std::min(p.psi1, p.psi2);
      lo = -psi;
      hi = std::min(0.0, 1.0 - psi);
      closed = true;  // endpoints are legal optima in R1
      break;
    }
    case Regime::R2:
      lo = -1.0;
      hi = std::min(1.0, -1.0 + 2.0 * p.psi2);
      break;
    case Regime::R3:
      lo = -1.0;
      hi = std::min(1.0, -1.0 + 2.0 * p.psi1);
      break;
  }
  if (!closed) {
    lo += 1e-6;
    hi -= 1e-6;
  }
  double best_x = lo, best_o = kInf;
  for (int i = 0; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
    double o;
    switch (regime) {
      case Regime::R1: o = detail::r1_objective_of_x(x, p); break;
      case Regime::R2: o = detail::r2_objective_of_x(x, p); break;
      default: o = detail::r3_objective_of_x(x, p); break;
    }
    if (o < best_o) {
      best_o = o;
      best_x = x;
    }
  }
  return {best_x, best_o};
}

}  // namespace rfr
