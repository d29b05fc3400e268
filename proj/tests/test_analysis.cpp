#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kinetic/analysis.hpp"
#include "kinetic/errors.hpp"

using namespace kinetic;

namespace {

const SpectralTable& table32()
{
  static const SpectralTable t = build_table(CollisionKernel(1.0), 32);
  return t;
}

ModeVector small_data(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ModeVector g = ModeVector::Zero(33);
  for (int n = 2; n <= 32; ++n) {
    g(n) = normal(rng) / (n * n);
  }
  return g * (0.05 / g.norm());
}

Trajectory run(const ModeVector& g0, int steps = 201)
{
  return solve_triangular(table32(), g0, uniform_grid(5.0, steps));
}

}  // namespace

TEST_CASE("weights")
{
  const auto& t = table32();
  CHECK(weight(t, Shubin{2.0}, 3) == doctest::Approx(8.5));
  CHECK(weight(t, Shubin{0.0}, 30) == 1.0);
  CHECK(weight(t, LogExp{0.0, 3.0, 1.0}, 7) == 1.0);
  CHECK(log_weight(t, LogExp{0.2, 3.0, 1.0}, 7) == doctest::Approx(0.6 * std::pow(std::log(16.5), 2)));
  CHECK(weight(t, Semigroup{2.0, 0.0}, 5) == doctest::Approx(std::exp(t.lambda(5))));
  CHECK(weight(t, Semigroup{0.0, 1.0}, 5) == doctest::Approx(t.lambda(5)));
  CHECK(weight(t, Semigroup{1.0, 1.0}, 1) == 0.0);

  SUBCASE("monotone in n and in the weight parameter")
  {
    for (int n = 2; n < 32; ++n) {
      CHECK(weight(t, Shubin{3.0}, n + 1) > weight(t, Shubin{3.0}, n));
      CHECK(weight(t, LogExp{0.1, 1.0, 1.0}, n + 1) > weight(t, LogExp{0.1, 1.0, 1.0}, n));
      CHECK(weight(t, Semigroup{1.0, 0.0}, n + 1) > weight(t, Semigroup{1.0, 0.0}, n));
      CHECK(weight(t, Shubin{4.0}, n) > weight(t, Shubin{3.0}, n));
    }
  }
  SUBCASE("semigroup composition")
  {
    for (int n = 0; n <= 32; ++n) {
      CHECK(weight(t, Semigroup{1.7, 0.0}, n) ==
            doctest::Approx(weight(t, Semigroup{0.5, 0.0}, n) * weight(t, Semigroup{1.2, 0.0}, n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("weighted norms")
{
  const auto& t = table32();
  const ModeVector g = small_data(5);
  CHECK(weighted_norm(t, g, Shubin{0.0}) == doctest::Approx(g.norm()).epsilon(1e-15));
  CHECK(weighted_norm(t, ModeVector::Zero(33), Shubin{4.0}) == 0.0);

  double direct = 0.0;
  for (int n = 0; n <= 32; ++n) {
    direct += std::pow(weight(t, Shubin{3.0}, n) * g(n), 2);
  }
  CHECK(weighted_norm(t, g, Shubin{3.0}) == doctest::Approx(std::sqrt(direct)).epsilon(1e-14));

  // the linear flow e^{-tL} is undone exactly by the semigroup weight
  const double s = 2.5;
  const ModeVector flowed = (-s * t.lambda.array()).exp().matrix().cwiseProduct(g);
  CHECK(weighted_norm(t, flowed, Semigroup{2 * s, 0.0}) == doctest::Approx(g.norm()).epsilon(1e-13));

  // weights far beyond the double range stay finite in log space until the end
  CHECK_THROWS_AS(weighted_norm(t, g, Semigroup{1e4, 0.0}), Overflow);
  CHECK(std::isfinite(weighted_norm(t, 1e-200 * g, Shubin{400.0})));
}

TEST_CASE("energy and monotone certification on a genuine trajectory")
{
  const auto& t = table32();
  const ModeVector g0 = small_data(1);
  const Trajectory traj = run(g0);
  const auto energy = certify_energy_inequality(t, traj, g0.norm());
  CHECK(energy.pass);
  CHECK(energy.worst_margin >= -1e-6);
  CHECK_NOTHROW(require_pass(energy));
  const auto mono = certify_monotone_decay(t, traj);
  CHECK(mono.pass);
  CHECK_FALSE(mono.first_violation_t.has_value());

  const auto integral = dissipation_integrals(t, traj);
  CHECK(integral.front() == 0.0);
  CHECK(std::is_sorted(integral.begin(), integral.end()));
}

TEST_CASE("certification catches tampered trajectories")
{
  const auto& t = table32();
  const ModeVector g0 = small_data(2);
  Trajectory traj = run(g0, 21);
  traj.states[7] = 1.1 * g0;

  const auto energy = certify_energy_inequality(t, traj, g0.norm());
  CHECK_FALSE(energy.pass);
  REQUIRE(energy.first_violation_t.has_value());
  CHECK(*energy.first_violation_t == doctest::Approx(traj.times[7]));
  CHECK(energy.worst_margin < 0.0);
  CHECK_THROWS_AS(require_pass(energy), CertificationFailure);

  const auto mono = certify_monotone_decay(t, traj);
  CHECK_FALSE(mono.pass);
  CHECK(*mono.first_violation_t == doctest::Approx(traj.times[7]));

  const auto j = mono.to_json();
  CHECK(j["check"] == "monotone_decay");
  CHECK(j["pass"] == false);
  CHECK(j.contains("worst_t"));
  CHECK(j.contains("worst_margin"));
  CHECK(j["fitted_constants"].is_object());
}

TEST_CASE("rate certification")
{
  const auto& t = table32();
  const ModeVector g0 = small_data(3);
  const Trajectory traj = run(g0);

  RateOptions opt;
  opt.c0_hat = fit_c0(t);
  CHECK(opt.c0_hat > 0.0);
  for (int n = 2; n <= 32; ++n) {
    CHECK(2 * opt.c0_hat * log_level(n, 2.0) <= t.lambda(n) * (1 + 1e-15));
  }
  const auto ok = certify_rates(t, traj, g0.norm(), opt);
  CHECK(ok.pass);
  CHECK(ok.fitted_constants.at("c0_hat") == opt.c0_hat);
  CHECK(ok.fitted_constants.at("cs_hat") == doctest::Approx(cs_from_c0(opt.c0_hat, 1.0)));
  CHECK(ok.fitted_constants.at("cs_min_observed") <= ok.fitted_constants.at("cs_hat"));

  SUBCASE("an over-sized c0 breaks the log-harmonic bound")
  {
    RateOptions big = opt;
    big.c0_hat = 20 * opt.c0_hat;
    CHECK_FALSE(certify_rates(t, traj, g0.norm(), big).pass);
  }
  SUBCASE("c_s = 0 cannot pay for Q^k smoothing")
  {
    RateOptions zero = opt;
    zero.cs_hat = 0.0;
    const auto r = certify_rates(t, traj, g0.norm(), zero);
    CHECK_FALSE(r.pass);
    CHECK(r.detail.find("(c)") != std::string::npos);
  }
}

TEST_CASE("c_s from c_0")
{
  CHECK(cs_from_c0(0.25, 1.0) == doctest::Approx(0.25));
  CHECK(cs_from_c0(0.1, 0.5) == doctest::Approx(0.375 * std::pow(1.25, 1.0 / 3)));
  CHECK_THROWS_AS(cs_from_c0(0.1, 2.0), DomainError);
  CHECK_THROWS_AS(cs_from_c0(0.1, 0.0), DomainError);
}

TEST_CASE("Young bound")
{
  const auto c = young_bound_check(10.0, 0.5, 3.0, 1.0);
  CHECK(c.log_h == doctest::Approx(std::pow(std::log(10.0), 2) - 3 * std::log(10.0)));
  CHECK(c.log_bound == doctest::Approx(-0.5 * 0.5 * 9.0));
  CHECK(c.holds());

  // equality at the minimizer log x = (k s / (4 τ))^{s/(2-s)}
  const double s = 1.0, tau = 0.3, k = 4.0;
  const double lx = std::pow(k * s / (4 * tau), s / (2 - s));
  const auto eq = young_bound_check(std::exp(lx), tau, k, s);
  CHECK(eq.log_h == doctest::Approx(eq.log_bound).epsilon(1e-13));
  CHECK(eq.holds());

  CHECK_THROWS_AS(young_bound_check(0.5, 0.3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(young_bound_check(2.0, 0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(young_bound_check(2.0, 0.3, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(young_bound_check(2.0, 0.3, 1.0, 2.0), DomainError);

  const auto r = certify_young(2000, 9);
  CHECK(r.pass);
  CHECK(r.fitted_constants.at("violations") == 0.0);
  CHECK(r.fitted_constants.at("samples") == 2000.0);
}

TEST_CASE("trilinear constant probe")
{
  const auto& t = table32();
  const double c1 = trilinear_constant_probe(t, 200, 4);
  CHECK(c1 > 0.0);
  CHECK(std::isfinite(c1));
  CHECK(trilinear_constant_probe(t, 200, 4) == c1);
  CHECK(trilinear_constant_probe(t, 400, 4) >= c1);
  CHECK_THROWS_AS(trilinear_constant_probe(t, 0), DomainError);
}

TEST_CASE("weight identities")
{
  const auto& t = table32();
  SUBCASE("Shubin norms increase with tau")
  {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
      ModeVector g(33);
      for (int n = 0; n <= 32; ++n) {
        g(n) = normal(rng);
      }
      double prev = 0.0;
      for (double tau = 0.0; tau <= 6.0; tau += 0.5) {
        const double v = weighted_norm(t, g, Shubin{tau});
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  SUBCASE("polynomial weight is dominated by the log-harmonic weight away from n = 0")
  {
    // at n = 0, log(5/2) < 1, so the chain only holds from n = 1 on
    for (double s : {0.3, 1.0, 2.0}) {
      for (double c0t : {0.0, 0.1, 1.0, 7.0}) {
        for (int n = 1; n <= 32; ++n) {
          CHECK(log_weight(t, Shubin{2 * c0t}, n) <= log_weight(t, LogExp{c0t, 1.0, s}, n) * (1 + 1e-15));
        }
      }
    }
  }
  SUBCASE("semigroup weight squared")
  {
    for (int n = 2; n <= 32; ++n) {
      const double w = weight(t, Semigroup{1.3, 0.5}, n);
      CHECK(w * w == doctest::Approx(std::exp(1.3 * t.lambda(n)) * t.lambda(n)).epsilon(1e-14));
      CHECK(w * w == doctest::Approx(weight(t, Semigroup{2.6, 1.0}, n)).epsilon(1e-14));
    }
  }
}
