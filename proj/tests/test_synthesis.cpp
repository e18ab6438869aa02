#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rfr/moments.hpp"
#include "rfr/synthesis.hpp"

using namespace rfr;

TEST_CASE("erf wrapper") {
  CHECK(rfr::erf(0.0) == 0.0);
  CHECK(rfr::erf(10.0) == Catch::Approx(1.0).margin(1e-15));
  // P(|Z| <= 1) = erf(1/sqrt 2)
  CHECK(rfr::erf(1.0 / std::numbers::sqrt2) == Catch::Approx(0.6826894921370859).margin(1e-14));
}

TEST_CASE("L2 synthesis closed forms") {
  {
    const auto s = synthesize_l2(Moments::from_raw(0.0, 1.0, 1.0));
    CHECK(s.af.kind() == ActivationSpec::Kind::Linear);
    CHECK(s.af.params()[0] == Catch::Approx(1.0));
    CHECK(s.norm_value == Catch::Approx(1.0).margin(1e-10));
  }
  {
    const auto s = synthesize_l2(Moments::from_raw(0.0, 1.0, 2.0), +1);
    REQUIRE(s.af.kind() == ActivationSpec::Kind::Quadratic);
    CHECK(s.af.params()[0] == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    CHECK(s.af.params()[1] == Catch::Approx(1.0).margin(1e-12));
    CHECK(s.af.params()[2] == Catch::Approx(-1.0 / std::sqrt(2.0)).margin(1e-12));
  }
}

TEST_CASE("L2 synthesis beats relu at relu's own moments") {
  const auto relu_m = compute_moments(ActivationSpec::relu());
  const auto s = synthesize_l2(relu_m);
  const double n2sq = s.norm_value * s.norm_value;
  CHECK(n2sq == Catch::Approx(relu_m.mu1 * relu_m.mu1 + 2.0 * relu_m.mu_star_sq).margin(1e-8));
  CHECK(n2sq == Catch::Approx(0.4316901138162092).margin(1e-6));
  const double relu_n2sq = 0.5;  // E (relu')^2 = P(Z > 0)
  CHECK(n2sq < relu_n2sq);
}

TEST_CASE("L2 norm never exceeds the original activation's norm") {
  for (const auto& af : {ActivationSpec::relu(), ActivationSpec::tanh_af(),
                         ActivationSpec::shifted_relu(1.0)}) {
    const auto m = compute_moments(af);
    const auto s = synthesize_l2(m);
    CHECK(s.norm_value <= functional_norms(af).norm2 + 1e-9);
  }
}

TEST_CASE("L1 synthesis: linear branch at mu_star = 0") {
  const auto s = synthesize_l1(Moments::from_raw(0.0, 1.0, 1.0));
  CHECK(s.af.kind() == ActivationSpec::Kind::Linear);
  CHECK(std::isinf(s.s_param));
  CHECK(s.norm_value == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("L1 synthesis round trip at zeta^2 = 2") {
  const auto target = Moments::from_raw(0.3, 1.0, 0.3 * 0.3 + 1.0 + 0.5);  // zeta^2 = 2
  const auto s = synthesize_l1(target);
  const auto back = compute_moments(s.af);
  CHECK(back.mu0 == Catch::Approx(target.mu0).margin(1e-8));
  CHECK(back.mu1 == Catch::Approx(target.mu1).margin(1e-8));
  CHECK(back.mu2 == Catch::Approx(target.mu2).margin(1e-8));
  CHECK(s.norm_value == Catch::Approx(std::fabs(target.mu1)).margin(1e-8));
}

TEST_CASE("L1 synthesis rejects zeta^2 below the family floor") {
  // the s -> 0 limit of the symmetric family is the sign function with
  // zeta^2 = 2/(pi-2); nothing below that is attainable
  CHECK_THROWS_AS(synthesize_l1(Moments::from_raw(0.0, 1.0, 2.0)), SolverDiverged);
  // near-relu zeta^2 (2.75) round-trips fine
  const auto relu_m = compute_moments(ActivationSpec::relu());
  const auto s = synthesize_l1(relu_m);
  const auto back = compute_moments(s.af);
  CHECK(back.mu1 == Catch::Approx(relu_m.mu1).margin(1e-8));
  CHECK(back.mu2 == Catch::Approx(relu_m.mu2).margin(1e-8));
  CHECK(s.norm_value == Catch::Approx(relu_m.mu1).margin(1e-8));
}

TEST_CASE("saturation equation right side is monotone on [0, 8]") {
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double s = 8.0 * i / 1000.0;
    const double v = detail::satlin_zeta_sq(s);
    CHECK(v >= prev);
    prev = v;
  }
  // anchor: the s -> 0 limit is 2/(pi - 2)
  CHECK(detail::satlin_zeta_sq(0.0) ==
        Catch::Approx(2.0 / (std::numbers::pi - 2.0)).margin(1e-12));
}

TEST_CASE("synthesis round trip over random moment triples") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double mu0 = -1.0 + 2.0 * U(rng);
    double mu1 = -2.0 + 4.0 * U(rng);
    if (std::fabs(mu1) < 0.05) mu1 = 0.05;
    // keep zeta^2 above the saturated-linear floor so both synthesizers apply
    const double mu_star_sq = mu1 * mu1 / (1.76 + 6.0 * U(rng));
    const auto target = Moments::from_raw(mu0, mu1, mu0 * mu0 + mu1 * mu1 + mu_star_sq);

    const auto s2 = synthesize_l2(target, U(rng) < 0.5 ? +1 : -1);
    const auto b2 = compute_moments(s2.af);
    CHECK(b2.mu0 == Catch::Approx(target.mu0).margin(1e-7));
    CHECK(b2.mu1 == Catch::Approx(target.mu1).margin(1e-7));
    CHECK(b2.mu2 == Catch::Approx(target.mu2).margin(1e-7));
    CHECK(s2.norm_value * s2.norm_value ==
          Catch::Approx(mu1 * mu1 + 2.0 * mu_star_sq).margin(1e-8));

    const auto s1 = synthesize_l1(target);
    const auto b1 = compute_moments(s1.af);
    CHECK(b1.mu0 == Catch::Approx(target.mu0).margin(1e-7));
    CHECK(b1.mu1 == Catch::Approx(target.mu1).margin(1e-7));
    CHECK(b1.mu2 == Catch::Approx(target.mu2).margin(1e-7));
    CHECK(s1.norm_value == Catch::Approx(std::fabs(mu1)).margin(1e-8));
  }
}

TEST_CASE("synthesis error paths") {
  // mu1 = 0 with mu_star > 0: no saturated-linear function can reach zeta^2 = 0
  CHECK_THROWS_AS(synthesize_l1(Moments::from_raw(0.0, 0.0, 1.0)), InvalidMoments);
  // zeta^2 effectively zero but mu1 nonzero: below the attainable range
  CHECK_THROWS_AS(synthesize_l1(Moments::from_raw(0.0, 1e-120, 1.0)), SolverDiverged);
}
