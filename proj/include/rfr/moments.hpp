#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "rfr/activation.hpp"
#include "rfr/errors.hpp"
#include "rfr/quadrature.hpp"

namespace rfr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Gaussian moments of an activation: mu0 = E sigma(Z), mu1 = E Z sigma(Z),
/// mu2 = E sigma(Z)^2, mu_star^2 = mu2 - mu0^2 - mu1^2, zeta^2 = mu1^2/mu_star^2.
struct Moments {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu_star_sq = 0.0;
  double zeta_sq = 0.0;  // +inf when mu_star^2 = 0 and mu1 != 0

  /// Build from (mu0, mu1, mu_star^2) directly; avoids the mu2-roundtrip
  /// cancellation when mu1^2 dwarfs mu_star^2.
  static Moments from_parts(double mu0, double mu1, double mu_star_sq) {
    Moments m;
    m.mu0 = mu0;
    m.mu1 = mu1;
    m.mu_star_sq = mu_star_sq;
    m.mu2 = mu0 * mu0 + mu1 * mu1 + mu_star_sq;
    m.zeta_sq = mu_star_sq > 0.0 ? mu1 * mu1 / mu_star_sq : (mu1 != 0.0 ? kInf : 0.0);
    return m;
  }

  static Moments from_raw(double mu0, double mu1, double mu2) {
    Moments m;
    m.mu0 = mu0;
    m.mu1 = mu1;
    m.mu2 = mu2;
    m.mu_star_sq = mu2 - mu0 * mu0 - mu1 * mu1;
    if (m.mu_star_sq < 0.0) {
      if (m.mu_star_sq < -1e-8)
        throw NegativeMuStar("mu_star^2 = " + std::to_string(m.mu_star_sq) + " < -1e-8");
      m.mu_star_sq = 0.0;  // roundoff near linear activations
    }
    m.zeta_sq = m.mu_star_sq > 0.0 ? m.mu1 * m.mu1 / m.mu_star_sq
                                   : (m.mu1 != 0.0 ? kInf : 0.0);
    return m;
  }
};

inline Moments compute_moments(const ActivationSpec& af, int nodes = 201) {
  if (nodes < 21) throw InvalidMoments("compute_moments requires nodes >= 21");
  GaussianQuadrature q(nodes, af.kinks());
  const auto& xs = q.points();
  // one pass over values, with finiteness check at every node
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, c0 = 0.0, c1 = 0.0, c2 = 0.0;
  const auto& ws = q.weights();
  for (size_t i = 0; i < xs.size(); ++i) {
    const double v = af.value(xs[i]);
    if (!std::isfinite(v))
      throw NonFiniteValue(af.name() + " is not finite at x = " + std::to_string(xs[i]));
    auto acc = [](double& sum, double& comp, double term) {
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    };
    acc(m0, c0, ws[i] * v);
    acc(m1, c1, ws[i] * xs[i] * v);
    acc(m2, c2, ws[i] * v * v);
  }
  return Moments::from_raw(m0, m1, m2);
}

/// norm1 = E|sigma'(Z)|, norm2 = sqrt(E sigma'(Z)^2): the functional
/// simplicity measures.
struct FunctionalNorms {
  double norm1 = 0.0;
  double norm2 = 0.0;
};

inline FunctionalNorms functional_norms(const ActivationSpec& af, int nodes = 201) {
  if (nodes < 21) throw InvalidMoments("functional_norms requires nodes >= 21");
  GaussianQuadrature q(nodes, af.kinks());
  const auto& xs = q.points();
  const auto& ws = q.weights();
  double n1 = 0.0, n2 = 0.0, c1 = 0.0, c2 = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double d = af.weak_derivative(xs[i]);
    if (!std::isfinite(d))
      throw NonFiniteValue(af.name() + " derivative is not finite at x = " + std::to_string(xs[i]));
    auto acc = [](double& sum, double& comp, double term) {
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    };
    acc(n1, c1, ws[i] * std::fabs(d));
    acc(n2, c2, ws[i] * d * d);
  }
  return {n1, std::sqrt(n2)};
}

}  // namespace rfr
