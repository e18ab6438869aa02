#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "rfr/activation.hpp"
#include "rfr/errors.hpp"
#include "rfr/moments.hpp"

namespace rfr {

/// Deterministic normal generator: SplitMix-style bit mixing feeding
/// Box-Muller. Identical streams for identical seeds, independent of any
/// standard-library distribution internals.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : state_(seed) {}

  double uniform() {  // in (0, 1)
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Monte-Carlo configuration for the finite-size random features model.
struct SimConfig {
  int d = 100;
  double psi1 = 1.0;
  double psi2 = 1.0;
  double lambda = 0.0;
  ActivationSpec af = ActivationSpec::relu();
  double F0 = 0.0;
  double F1 = 1.0;
  double F_star = 0.0;
  double tau = 0.0;
  int n_test = 2000;
  int trials = 10;
  std::uint64_t seed = 0;

  int features() const { return static_cast<int>(std::lround(psi1 * d)); }
  int samples() const { return static_cast<int>(std::lround(psi2 * d)); }

  void validate() const {
    if (d < 20) throw InvalidMoments("simulator requires d >= 20");
    if (features() < 1 || samples() < 1) throw InvalidMoments("N and n must be >= 1");
    if (n_test < 100) throw InvalidMoments("n_test must be >= 100");
    if (trials < 1) throw InvalidMoments("trials must be >= 1");
    if (lambda < 0.0 || tau < 0.0 || F_star < 0.0) throw InvalidMoments("negative noise/ridge");
    if (!(F1 > 0.0)) throw InvalidMoments("F1 must be positive");
  }
};

struct SimEstimate {
  double error_mean = 0.0;
  double error_se = 0.0;
  double sens_mean = 0.0;
  double sens_se = 0.0;
  std::vector<std::pair<double, double>> per_trial;  // (error, sensitivity)
};

/// Rows i.i.d. uniform on the sphere of radius sqrt(d): Gaussian vectors
/// rescaled to norm exactly sqrt(d).
inline Eigen::MatrixXd sample_sphere(int d, int count, NormalRng& rng) {
  if (d < 2) throw InvalidMoments("sample_sphere requires d >= 2");
  Eigen::MatrixXd m(count, d);
  const double target = std::sqrt(static_cast<double>(d));
  for (int i = 0; i < count; ++i) {
    double nsq = 0.0;
    for (int j = 0; j < d; ++j) {
      m(i, j) = rng.normal();
      nsq += m(i, j) * m(i, j);
    }
    m.row(i) *= target / std::sqrt(nsq);
  }
  return m;
}

namespace detail {

/// One realization of the random target of Assumption 3: the linear part
/// F0 + <beta1, x> plus the quadratic surrogate c (x^T G x - tr G)/d whose
/// empirical second moment over 10^4 sphere points is calibrated to F_star^2.
struct Target {
  Eigen::VectorXd beta1;
  Eigen::MatrixXd G;       // empty when F_star = 0
  double c_nl = 0.0;
  double F0 = 0.0;

  Eigen::VectorXd evaluate(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd f = (X * beta1).array() + F0;
    if (c_nl != 0.0) {
      const double tr = G.trace();
      const Eigen::VectorXd quad = ((X * G).cwiseProduct(X)).rowwise().sum();
      const double d = static_cast<double>(X.cols());
      f += c_nl / d * (quad.array() - tr).matrix();
    }
    return f;
  }
};

inline Target make_target(const SimConfig& cfg, NormalRng& rng) {
  Target t;
  t.F0 = cfg.F0;
  t.beta1.resize(cfg.d);
  double nsq = 0.0;
  for (int j = 0; j < cfg.d; ++j) {
    t.beta1(j) = rng.normal();
    nsq += t.beta1(j) * t.beta1(j);
  }
  t.beta1 *= cfg.F1 / std::sqrt(nsq);
  if (cfg.F_star > 0.0) {
    t.G.resize(cfg.d, cfg.d);
    for (int i = 0; i < cfg.d; ++i)
      for (int j = 0; j < cfg.d; ++j) t.G(i, j) = rng.normal();
    // calibrate the surrogate amplitude on 10^4 fresh sphere points
    t.c_nl = 1.0;
    const Eigen::MatrixXd cal = sample_sphere(cfg.d, 10000, rng);
    const double tr = t.G.trace();
    const Eigen::VectorXd quad = ((cal * t.G).cwiseProduct(cal)).rowwise().sum();
    const Eigen::ArrayXd fnl = (quad.array() - tr) / static_cast<double>(cfg.d);
    const double second_moment = (fnl * fnl).mean();
    t.c_nl = cfg.F_star / std::sqrt(second_moment);
  }
  return t;
}

struct Trial {
  Eigen::MatrixXd theta;  // N x d random features
  Target target;
  Eigen::MatrixXd X;      // n x d training inputs
  Eigen::VectorXd y;      // n training labels
};

inline Trial make_trial(const SimConfig& cfg, NormalRng& rng) {
  Trial t;
  t.theta = sample_sphere(cfg.d, cfg.features(), rng);
  t.target = make_target(cfg, rng);
  t.X = sample_sphere(cfg.d, cfg.samples(), rng);
  t.y = t.target.evaluate(t.X);
  for (int i = 0; i < t.y.size(); ++i) t.y(i) += cfg.tau * rng.normal();
  return t;
}

inline Eigen::MatrixXd feature_matrix(const ActivationSpec& af, const Eigen::MatrixXd& X,
                                      const Eigen::MatrixXd& theta) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(X.cols()));
  Eigen::MatrixXd Z = X * theta.transpose() * inv_sqrt_d;
  for (int i = 0; i < Z.rows(); ++i)
    for (int j = 0; j < Z.cols(); ++j) Z(i, j) = af.value(Z(i, j));
  return Z;
}

/// Ridge solution of the training problem; lambda = 0 uses the min-norm solution through
/// an SVD pseudoinverse with relative cutoff 1e-10.
inline Eigen::VectorXd solve_ridge(const SimConfig& cfg, const Eigen::MatrixXd& Z,
                                   const Eigen::VectorXd& y) {
  const int n = static_cast<int>(Z.rows());
  const int N = static_cast<int>(Z.cols());
  if (cfg.lambda > 0.0) {
    Eigen::MatrixXd A = Z.transpose() * Z / static_cast<double>(n);
    A.diagonal().array() += static_cast<double>(N) * cfg.lambda / cfg.d;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SolveFailed("ridge normal equations not SPD");
    return ldlt.solve(Z.transpose() * y / static_cast<double>(n));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SolveFailed("SVD failed on the feature matrix");
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Eigen::VectorXd inv = sv;
  for (int i = 0; i < inv.size(); ++i) inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * y;
}

inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(trial) + 1ull));
}

}  // namespace detail

/// Trains the second-layer weights on a freshly drawn trial (features, target,
/// data); the ridgeless limit goes through the pseudoinverse.
inline Eigen::VectorXd train_rfr(const SimConfig& cfg, NormalRng& rng) {
  cfg.validate();
  const auto trial = detail::make_trial(cfg, rng);
  return detail::solve_ridge(cfg, detail::feature_matrix(cfg.af, trial.X, trial.theta), trial.y);
}

/// Exact pointwise gradient of the trained model,
/// grad f(x) = (1/sqrt d) sum_i a_i sigma'(<theta_i, x>/sqrt d) theta_i.
inline Eigen::VectorXd model_gradient(const ActivationSpec& af, const Eigen::MatrixXd& theta,
                                      const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.size()));
  Eigen::VectorXd u = theta * x * inv_sqrt_d;
  for (int i = 0; i < u.size(); ++i) u(i) = a(i) * af.weak_derivative(u(i));
  return theta.transpose() * u * inv_sqrt_d;
}

inline double model_value(const ActivationSpec& af, const Eigen::MatrixXd& theta,
                          const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.size()));
  Eigen::VectorXd u = theta * x * inv_sqrt_d;
  double f = 0.0;
  for (int i = 0; i < u.size(); ++i) f += a(i) * af.value(u(i));
  return f;
}

/// Monte-Carlo estimate of test error and sensitivity. The error averages
/// (f - f_d)^2 over fresh test points. The sensitivity is the mean-derivative
/// (linear-response) gradient norm mu1^2 ||Theta^T a||^2 / d, the quantity
/// the asymptotic sensitivity formulas describe; the sigma'-fluctuation part
/// of the pointwise gradient is not a function of the Gaussian moments and
/// is deliberately excluded (model_gradient exposes the pointwise object).
inline SimEstimate estimate(const SimConfig& cfg) {
  cfg.validate();
  // mean derivative E sigma'(Z); equals mu1 by Stein's identity and is
  // exactly zero for constant activations
  GaussianQuadrature quad(201, cfg.af.kinks());
  const double mu1 = quad.integrate([&](double x) { return cfg.af.weak_derivative(x); });
  SimEstimate out;
  out.per_trial.reserve(cfg.trials);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    NormalRng rng(detail::trial_seed(cfg.seed, trial));
    const auto tr = detail::make_trial(cfg, rng);
    const Eigen::VectorXd a =
        detail::solve_ridge(cfg, detail::feature_matrix(cfg.af, tr.X, tr.theta), tr.y);

    const Eigen::MatrixXd Xt = sample_sphere(cfg.d, cfg.n_test, rng);
    const Eigen::VectorXd fhat = detail::feature_matrix(cfg.af, Xt, tr.theta) * a;
    const Eigen::VectorXd ftrue = tr.target.evaluate(Xt);
    const double err = (fhat - ftrue).squaredNorm() / cfg.n_test;

    const Eigen::VectorXd lin = tr.theta.transpose() * a;
    const double sens = mu1 * mu1 * lin.squaredNorm() / cfg.d;

    out.per_trial.emplace_back(err, sens);
  }
  double esum = 0.0, ssum = 0.0;
  for (const auto& [e, s] : out.per_trial) {
    esum += e;
    ssum += s;
  }
  out.error_mean = esum / cfg.trials;
  out.sens_mean = ssum / cfg.trials;
  double ev = 0.0, sv = 0.0;
  for (const auto& [e, s] : out.per_trial) {
    ev += (e - out.error_mean) * (e - out.error_mean);
    sv += (s - out.sens_mean) * (s - out.sens_mean);
  }
  if (cfg.trials > 1) {
    out.error_se = std::sqrt(ev / (cfg.trials - 1) / cfg.trials);
    out.sens_se = std::sqrt(sv / (cfg.trials - 1) / cfg.trials);
  }
  return out;
}

}  // namespace rfr
