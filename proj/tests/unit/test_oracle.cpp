#include <array>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ldepth/models.hpp"
#include "ldepth/oracle.hpp"

using namespace ldepth;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double phi(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

DensityFn density(const std::string& name) { return named_density(name).to_density_fn(); }

QuadratureConfig tight() {
  QuadratureConfig q;
  q.abs_tol = 1e-13;
  q.rel_tol = 1e-12;
  return q;
}

// Moments of the unit lens region on the line by a midpoint grid:
// returns (area, int y1^2, int y1 y2).
std::array<double, 3> unit_lens_moments(int cells) {
  const double h = 2.0 / cells;
  std::array<double, 3> m{0.0, 0.0, 0.0};
  const double origin = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double y1 = -1.0 + (i + 0.5) * h;
    for (int j = 0; j < cells; ++j) {
      const double y2 = -1.0 + (j + 0.5) * h;
      if (!region::lens(ConstPointRef(&origin, 1), ConstPointRef(&y1, 1), ConstPointRef(&y2, 1), 1.0)) continue;
      m[0] += h * h;
      m[1] += y1 * y1 * h * h;
      m[2] += y1 * y2 * h * h;
    }
  }
  return m;
}

}  // namespace

TEST_CASE("integrate_1d on closed forms") {
  CHECK(integrate_1d([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12, 1e-12, 100000) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate_1d([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12, 1e-12, 100000) ==
        doctest::Approx(0.29).epsilon(1e-10));
  CHECK_THROWS_AS(integrate_1d([](double x) { return x < 1.0 / 3.0 ? 1.0 : 0.0; }, 0.0, 1.0, 1e-14, 1e-14, 200),
                  ConvergenceError);
}

TEST_CASE("benchmark densities integrate to one") {
  for (const auto* name : {"normal", "uniform", "mixture_1d_bimodal", "quadrimodal_1d", "bimodal"}) {
    CHECK_NOTHROW(check_normalized(density(name), {}, 1e-6));
  }
  QuadratureConfig bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("lens depth of the uniform density") {
  const auto f = density("uniform");
  CHECK(population_lld_1d(f, 0.5, 0.2) == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(population_f_tau_1d(f, 0.5, 0.2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(population_lld_1d(f, 0.5, 0.0) == 0.0);
  CHECK(population_lld_1d(f, 10.0, 0.5) == 0.0);
  // At the support edge one point of every straddling pair falls outside.
  CHECK(population_lld_1d(f, 0.0, 0.2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lens depth grows with tau") {
  const auto f = density("normal");
  double prev = 0.0;
  for (double tau : {0.05, 0.1, 0.3, 0.8, 2.0, 6.0}) {
    const double v = population_lld_1d(f, 0.4, tau);
    CHECK(v >= prev);
    prev = v;
  }
  // tau = infinity limit: 2 F(x) (1 - F(x)).
  const double F = 0.5 * std::erfc(-0.4 / std::sqrt(2.0));
  CHECK(population_lld_1d(f, 0.4, 30.0) == doctest::Approx(2.0 * F * (1.0 - F)).epsilon(1e-7));
}

TEST_CASE("Monte Carlo depth agrees with quadrature") {
  const auto f = density("normal");
  QuadratureConfig q;
  q.seed = 5;
  const Point x{0.0};
  const auto mc = population_lgd_mc(f, RegionSpec::lens(1), x, 0.5, q);
  const double exact = population_lld_1d(f, 0.0, 0.5);
  CHECK(mc.standard_error > 0.0);
  CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.standard_error);

  const auto off = population_lgd_mc(density("uniform"), RegionSpec::lens(1), Point{10.0}, 1.0, q);
  CHECK(off.estimate == 0.0);
  CHECK(off.standard_error == 0.0);
  CHECK_THROWS_AS(population_lgd_mc(f, RegionSpec::half_region(1), x, 0.5, q), std::invalid_argument);
}

TEST_CASE("random cross-oracle triples") {
  const std::vector<std::string> names{"normal", "mixture_1d_bimodal", "quadrimodal_1d", "uniform"};
  Rng rng(2024);
  int within = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = density(names[trial % names.size()]);
    const double x = f.lower[0] == 0.0 ? rng.uniform(0.05, 0.95) : rng.uniform(-3.0, 3.0);
    const double tau = rng.uniform(0.05, 1.5);
    QuadratureConfig q;
    q.seed = 100 + static_cast<std::uint64_t>(trial);
    q.mc_budget = 400'000;
    const auto mc = population_lgd_mc(f, RegionSpec::lens(1), Point{x}, tau, q);
    const double exact = population_lld_1d(f, x, tau);
    CAPTURE(f.name);
    CAPTURE(x);
    CAPTURE(tau);
    CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.standard_error + 1e-12);
    within += std::abs(mc.estimate - exact) <= 3.0 * mc.standard_error + 1e-12;
  }
  CHECK(within == 20);
}

TEST_CASE("Monte Carlo depth for other families") {
  // On the line the tuple families coincide with the lens.
  const auto f = density("normal");
  QuadratureConfig q;
  q.seed = 9;
  const double exact = population_lld_1d(f, 0.3, 0.7);
  for (const auto& spec : {RegionSpec::spherical(1), RegionSpec::simplicial(1), RegionSpec::beta_skeleton(1.5, 1)}) {
    const auto mc = population_lgd_mc(f, spec, Point{0.3}, 0.7, q);
    CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.standard_error);
  }
}

TEST_CASE("bimodal depth over tau^2 approaches f^2 at the saddle") {
  const auto f = density("mixture_1d_bimodal");
  const double f0 = std::exp(-2.0) / kSqrt2Pi;
  CHECK(f(0.0) == doctest::Approx(0.0539910).epsilon(1e-6));
  QuadratureConfig q;
  q.seed = 17;
  q.mc_budget = 2'000'000;
  const auto mc = population_lgd_mc(f, RegionSpec::lens(1), Point{0.0}, 0.05, q);
  CHECK(std::abs(mc.estimate / 0.0025 - f0 * f0) <= 0.02 * f0 * f0);
  CHECK(std::abs(population_lld_1d(f, 0.0, 0.05) / 0.0025 - f0 * f0) <= 0.02 * f0 * f0);
}

TEST_CASE("extreme localization error shrinks with tau") {
  const std::vector<std::pair<std::string, std::vector<double>>> cases{
      {"normal", {-1.0, 0.0, 0.5, 1.3}},
      {"mixture_1d_bimodal", {-2.0, -0.7, 0.0, 1.1}},
      {"quadrimodal_1d", {-2.0, 0.0, 1.5, 3.9}},
      {"uniform", {0.3, 0.5, 0.8}},
  };
  for (const auto& [name, xs] : cases) {
    const auto f = density(name);
    for (double x : xs) {
      const double fx = f(x);
      double prev = kInf;
      for (double tau : {0.4, 0.2, 0.1, 0.05}) {
        const double err = std::abs(population_lld_1d(f, x, tau, tight()) / (tau * tau) - fx * fx);
        CAPTURE(name);
        CAPTURE(x);
        CAPTURE(tau);
        CHECK(err <= prev + 1e-10);
        prev = err;
      }
    }
  }
}

TEST_CASE("second order term at the normal mode") {
  // Taylor expansion of f(x + tau y1) f(x + tau y2) over the unit lens region:
  // h(x) = f f'' int y1^2 + f'^2 int y1 y2, with the moments taken on a grid.
  const auto m = unit_lens_moments(4000);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-3));
  const double f0 = phi(0.0);
  const double fpp = -phi(0.0);
  const double h = f0 * fpp * m[1];  // f'(0) = 0
  const double tau = 0.05;
  const auto f = density("normal");
  const double lld = population_lld_1d(f, 0.0, tau, tight());
  const double rate = (lld / (tau * tau) - f0 * f0) / (tau * tau);
  CHECK(h < 0.0);
  CHECK(std::abs(rate - h) <= 0.05 * std::abs(h));
}

TEST_CASE("finite difference of f_tau") {
  CHECK(std::abs(population_f_tau_grad_1d(density("mixture_1d_bimodal"), 0.0, 1.0, 0.01)) < 1e-6);
  CHECK(std::abs(population_f_tau_grad_1d(density("uniform"), 0.5, 0.2, 0.01)) < 1e-8);
  const double g = population_f_tau_grad_1d(density("normal"), 1.0, 0.2, 0.01);
  CHECK(g < 0.0);
  CHECK(std::abs(g + phi(1.0)) <= 0.1 * phi(1.0));
  CHECK_THROWS_AS(population_f_tau_grad_1d(density("normal"), 1.0, 0.2, 0.05), std::invalid_argument);
}

TEST_CASE("b squared for the uniform density") {
  const auto f = density("uniform");
  for (double tau : {0.05, 0.1, 0.2, 0.3}) {
    // J is tau - |x1 - x| on each side, so E J = tau^2 and E J^2 = 2 tau^3 / 3.
    const double exact = 2.0 * tau * tau * tau / 3.0 - tau * tau * tau * tau;
    CHECK(population_b_squared_1d(f, 0.5, tau) == doctest::Approx(exact).epsilon(1e-8));
  }
  const double tau = 0.01;
  CHECK(population_b_squared_1d(f, 0.5, tau) / (tau * tau * tau) == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  CHECK(population_b_squared_1d(f, 10.0, 0.2) == 0.0);
}

TEST_CASE("b squared matches the kernel covariance by simulation") {
  // b^2 = Cov(k(X1, X2), k(X1, X3)) for the pair indicator k.
  const auto f = density("normal");
  const double x = 0.0, tau = 0.5;
  Rng rng(77);
  const std::size_t n = 2'000'000;
  double s12 = 0.0, s13 = 0.0, sprod = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    const double k12 = region::lens(ConstPointRef(&x, 1), ConstPointRef(&a, 1), ConstPointRef(&b, 1), tau);
    const double k13 = region::lens(ConstPointRef(&x, 1), ConstPointRef(&a, 1), ConstPointRef(&c, 1), tau);
    s12 += k12;
    s13 += k13;
    sprod += k12 * k13;
  }
  const double dn = static_cast<double>(n);
  const double cov = sprod / dn - (s12 / dn) * (s13 / dn);
  const double b2 = population_b_squared_1d(f, x, tau);
  CHECK(b2 > 0.0);
  CHECK(std::abs(cov - b2) <= 0.03 * b2);
  CHECK(s12 / dn == doctest::Approx(population_lld_1d(f, x, tau)).epsilon(0.01));
}

TEST_CASE("projection and variance helpers") {
  const auto f = density("uniform");
  CHECK(lens_projection_1d(f, 0.5, 0.2, 0.45) == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(lens_projection_1d(f, 0.5, 0.2, 0.62) == doctest::Approx(0.08).epsilon(1e-9));
  CHECK(lens_projection_1d(f, 0.5, 0.2, 0.9) == 0.0);
  CHECK(population_a_squared(0.25) == doctest::Approx(0.1875));
  CHECK(sample_depth_variance(2, 0.1875, 0.01) == doctest::Approx(0.1875));
  CHECK(sample_depth_variance(10, 0.2, 0.01) == doctest::Approx((0.2 + 16 * 0.01) / 45.0));
}
