#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "rfr/asymptotics.hpp"
#include "rfr/simulator.hpp"

using namespace rfr;

TEST_CASE("sphere sampling geometry") {
  NormalRng rng(1);
  const int d = 40;
  const auto m = sample_sphere(d, 2000, rng);
  for (int i = 0; i < m.rows(); ++i)
    CHECK(m.row(i).norm() == Catch::Approx(std::sqrt(static_cast<double>(d))).margin(1e-9));

  // mean normalized inner product of independent pairs ~ 0 within 3 sigma
  double acc = 0.0;
  const int pairs = 1000;
  for (int i = 0; i + 1 < 2 * pairs; i += 2) acc += m.row(i).dot(m.row(i + 1)) / d;
  acc /= pairs;
  CHECK(std::fabs(acc) <= 3.0 / std::sqrt(static_cast<double>(pairs) * d));
}

TEST_CASE("two-dimensional angles pass a uniformity chi-square test") {
  NormalRng rng(7);
  const auto m = sample_sphere(2, 100000, rng);
  const int bins = 16;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < m.rows(); ++i) {
    double a = std::atan2(m(i, 1), m(i, 0)) + std::numbers::pi;
    int b = std::min(bins - 1, static_cast<int>(a / (2.0 * std::numbers::pi) * bins));
    ++count[b];
  }
  const double expect = 100000.0 / bins;
  double chi2 = 0.0;
  for (int b = 0; b < bins; ++b) chi2 += (count[b] - expect) * (count[b] - expect) / expect;
  CHECK(chi2 < 30.58);  // chi-square 15 dof, upper 1% point
}

TEST_CASE("training interpolates a realizable noiseless target") {
  // linear activation, beta1 in the row space of Theta, n >> N, lambda = 0
  NormalRng rng(3);
  const int d = 60, N = 20, n = 400;
  SimConfig cfg;
  cfg.d = d;
  cfg.psi1 = static_cast<double>(N) / d;
  cfg.psi2 = static_cast<double>(n) / d;
  cfg.lambda = 0.0;
  cfg.af = ActivationSpec::linear(1.0, 0.0);
  const auto Theta = sample_sphere(d, N, rng);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) c(i) = rng.normal();
  Eigen::VectorXd beta1 = Theta.transpose() * c;
  beta1 *= 1.0 / beta1.norm();
  const auto X = sample_sphere(d, n, rng);
  const Eigen::VectorXd y = X * beta1;
  const auto Z = detail::feature_matrix(cfg.af, X, Theta);
  const auto a = detail::solve_ridge(cfg, Z, y);
  CHECK((Z * a - y).norm() / std::sqrt(static_cast<double>(n)) <= 1e-8);
}

TEST_CASE("train_rfr returns finite weights of the right size") {
  NormalRng rng(21);
  SimConfig cfg;
  cfg.d = 40;
  cfg.psi1 = 1.5;
  cfg.psi2 = 2.0;
  cfg.lambda = 0.01;
  cfg.af = ActivationSpec::relu();
  cfg.tau = 0.3;
  const auto a = train_rfr(cfg, rng);
  REQUIRE(a.size() == cfg.features());
  CHECK(a.allFinite());
}

TEST_CASE("ridge shrinkage is monotone in lambda") {
  NormalRng rng(4);
  SimConfig cfg;
  cfg.d = 50;
  cfg.psi1 = 1.0;
  cfg.psi2 = 2.0;
  cfg.af = ActivationSpec::relu();
  cfg.tau = 0.5;
  const auto trial = detail::make_trial(cfg, rng);
  const auto Z = detail::feature_matrix(cfg.af, trial.X, trial.theta);
  double prev = kInf;
  for (double lam : {1e-4, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    auto c = cfg;
    c.lambda = lam;
    const double norm = detail::solve_ridge(c, Z, trial.y).norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("trained weights are a local optimum of the ridge objective") {
  NormalRng rng(5);
  SimConfig cfg;
  cfg.d = 40;
  cfg.psi1 = 0.8;
  cfg.psi2 = 1.5;
  cfg.lambda = 0.3;
  cfg.af = ActivationSpec::relu();
  cfg.tau = 0.4;
  const auto trial = detail::make_trial(cfg, rng);
  const auto Z = detail::feature_matrix(cfg.af, trial.X, trial.theta);
  const auto a = detail::solve_ridge(cfg, Z, trial.y);
  const int n = cfg.samples(), N = cfg.features();
  auto ridge_objective = [&](const Eigen::VectorXd& v) {
    return (trial.y - Z * v).squaredNorm() / n + N * cfg.lambda / cfg.d * v.squaredNorm();
  };
  const double at_solution = ridge_objective(a);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd delta(N);
    for (int i = 0; i < N; ++i) delta(i) = 0.01 * rng.normal();
    CHECK(ridge_objective(a + delta) >= at_solution - 1e-12);
  }
}

TEST_CASE("target statistics") {
  SimConfig cfg;
  cfg.d = 80;
  cfg.F1 = 1.0;
  cfg.F0 = 0.0;

  SECTION("affine target variance equals F1^2") {
    NormalRng rng(6);
    cfg.F_star = 0.0;
    const auto t = detail::make_target(cfg, rng);
    const auto X = sample_sphere(cfg.d, 10000, rng);
    const Eigen::VectorXd f = t.evaluate(X);
    const double mean = f.mean();
    const double var = (f.array() - mean).square().mean();
    CHECK(var == Catch::Approx(1.0).epsilon(0.05));
    CHECK(std::fabs(mean) <= 0.05);
  }

  SECTION("surrogate nonlinear part: calibrated magnitude, no linear leakage") {
    NormalRng rng(8);
    cfg.F_star = 0.8;
    cfg.F1 = 1.0;
    const auto t = detail::make_target(cfg, rng);
    const auto X = sample_sphere(cfg.d, 10000, rng);
    // strip the linear part to isolate f_NL
    const Eigen::VectorXd f = t.evaluate(X) - X * t.beta1;
    const double second = f.array().square().mean();
    CHECK(second == Catch::Approx(0.64).epsilon(0.05));
    // correlation with each coordinate within 3 standard errors
    const double se = std::sqrt(second) / std::sqrt(10000.0);
    int bad = 0;
    for (int j = 0; j < cfg.d; ++j) {
      const double corr = (f.array() * X.col(j).array()).mean();
      if (std::fabs(corr) > 3.0 * se) ++bad;
    }
    CHECK(bad <= 2);  // ~0.3% expected per coordinate at 3 sigma
  }
}

TEST_CASE("estimate: realizable linear target drives error to zero") {
  SimConfig cfg;
  cfg.d = 50;
  cfg.psi1 = 4.0;
  cfg.psi2 = 4.0;
  cfg.lambda = 1e-6;
  cfg.af = ActivationSpec::linear(1.0, 0.0);
  cfg.tau = 0.0;
  cfg.F_star = 0.0;
  cfg.trials = 3;
  cfg.n_test = 500;
  cfg.seed = 12;
  const auto est = estimate(cfg);
  CHECK(est.error_mean < 1e-3 * cfg.F1 * cfg.F1);
}

TEST_CASE("estimate is deterministic given the seed") {
  SimConfig cfg;
  cfg.d = 40;
  cfg.psi1 = 0.5;
  cfg.psi2 = 2.0;
  cfg.lambda = 1e-3;
  cfg.af = ActivationSpec::relu();
  cfg.tau = 0.5;
  cfg.trials = 4;
  cfg.n_test = 300;
  cfg.seed = 777;
  const auto a = estimate(cfg);
  const auto b = estimate(cfg);
  CHECK(std::memcmp(&a.error_mean, &b.error_mean, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.sens_mean, &b.sens_mean, sizeof(double)) == 0);
  REQUIRE(a.per_trial.size() == b.per_trial.size());
  for (size_t i = 0; i < a.per_trial.size(); ++i) {
    CHECK(a.per_trial[i].first == b.per_trial[i].first);
    CHECK(a.per_trial[i].second == b.per_trial[i].second);
  }
}

TEST_CASE("constant activation has exactly zero sensitivity") {
  SimConfig cfg;
  cfg.d = 30;
  cfg.psi1 = 0.5;
  cfg.psi2 = 1.0;
  cfg.lambda = 0.1;
  cfg.af = ActivationSpec::linear(0.0, 1.0);
  cfg.trials = 2;
  cfg.n_test = 200;
  cfg.seed = 5;
  const auto est = estimate(cfg);
  CHECK(est.sens_mean == 0.0);
}

TEST_CASE("pointwise gradient matches central finite differences") {
  NormalRng rng(9);
  SimConfig cfg;
  cfg.d = 30;
  cfg.psi1 = 1.2;
  cfg.psi2 = 2.0;
  cfg.lambda = 0.05;
  cfg.af = ActivationSpec::tanh_af();
  cfg.tau = 0.3;
  const auto trial = detail::make_trial(cfg, rng);
  const auto Z = detail::feature_matrix(cfg.af, trial.X, trial.theta);
  const auto a = detail::solve_ridge(cfg, Z, trial.y);
  const auto Xt = sample_sphere(cfg.d, 10, rng);
  for (int i = 0; i < Xt.rows(); ++i) {
    const Eigen::VectorXd x = Xt.row(i);
    const Eigen::VectorXd g = model_gradient(cfg.af, trial.theta, a, x);
    const double h = 1e-5;
    for (int j = 0; j < cfg.d; j += 7) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const double fd = (model_value(cfg.af, trial.theta, a, xp) -
                         model_value(cfg.af, trial.theta, a, xm)) /
                        (2.0 * h);
      CHECK(g(j) == Catch::Approx(fd).epsilon(1e-4).margin(1e-8));
    }
  }
}

TEST_CASE("error approaches the ridgeless formula as d grows") {
  // linear activation, psi1 = 0.5, psi2 = 3: asymptotic error 0.6 F1^2
  const Moments lin = Moments::from_raw(0.0, 1.0, 1.0);
  RegimeParams p;
  p.psi1 = 0.5;
  p.psi2 = 3.0;
  const double asym = error_r1(lin, p);
  double prev_gap = kInf;
  for (int d : {50, 100, 200}) {
    SimConfig cfg;
    cfg.d = d;
    cfg.psi1 = 0.5;
    cfg.psi2 = 3.0;
    cfg.lambda = 0.0;
    cfg.af = ActivationSpec::linear(1.0, 0.0);
    cfg.trials = 8;
    cfg.n_test = 1000;
    cfg.seed = 100 + d;
    const auto est = estimate(cfg);
    const double gap = std::fabs(est.error_mean - asym) / asym;
    CHECK(gap <= prev_gap + 0.05);
    prev_gap = gap;
    if (d == 200) CHECK(gap <= 0.15);
  }
}
