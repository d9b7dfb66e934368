#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "ldepth/constants.hpp"

using namespace ldepth;

namespace {

// Section measure of Z_1(0) at a fixed first member, by midpoint counting over
// a fine grid of the second member through the checked predicate.
double lens_section_1d(double x1, int cells) {
  const double h = 4.0 / cells;
  int hits = 0;
  for (int j = 0; j < cells; ++j) {
    const double x2 = -2.0 + (j + 0.5) * h;
    hits += membership(RegionSpec::lens(1), Point{0.0}, {{x1}, {x2}}, 1.0);
  }
  return hits * h;
}

}  // namespace

TEST_CASE("squared section integral for the 1-d lens by quadrature") {
  // The grid section is within one cell of 1 - |x1| away from the null set x1 = 0.
  for (double x1 : {-0.8, -0.25, 0.4, 0.95}) {
    CHECK(std::abs(lens_section_1d(x1, 4000) - (1.0 - std::abs(x1))) <= 2e-3);
  }
  // Midpoint rule on the grid sections over [-1, 1].
  const int m = 400;
  const double h = 2.0 / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double sec = lens_section_1d(-1.0 + (i + 0.5) * h, 4000);
    s += sec * sec * h;
  }
  CHECK(s == doctest::Approx(2.0 / 3.0).epsilon(5e-3));
}

TEST_CASE("lambda1 analytic shortcuts") {
  CHECK(analytic_lambda1(RegionSpec::lens(1)).value() == 1.0);
  CHECK(analytic_lambda1(RegionSpec::simplicial(1)).value() == 1.0);
  CHECK(analytic_lambda1(RegionSpec::halfspace_cube(3)).value() == 1.0);
  CHECK(analytic_lambda1(RegionSpec::half_region(2)).value() == 1.0);
  CHECK_FALSE(analytic_lambda1(RegionSpec::lens(2)).has_value());
}

TEST_CASE("lambda1 Monte Carlo") {
  SUBCASE("lens p = 1 agrees with the exact value") {
    const auto e = estimate_lambda1(RegionSpec::lens(1), 1'000'000, 1);
    CHECK(e.standard_error > 0.0);
    CHECK(std::abs(e.estimate - 1.0) <= 3.0 * e.standard_error);
  }
  SUBCASE("every p = 1 family integrates to one") {
    for (const auto& spec : {RegionSpec::spherical(1), RegionSpec::beta_skeleton(1.5, 1),
                             RegionSpec::beta_skeleton(3.0, 1), RegionSpec::simplicial(1)}) {
      const auto e = estimate_lambda1(spec, 400'000, 2);
      CHECK_MESSAGE(std::abs(e.estimate - 1.0) <= 3.5 * e.standard_error, spec.label());
    }
  }
  SUBCASE("deterministic for a seed and independent across seeds") {
    const auto a = estimate_lambda1(RegionSpec::lens(2), 200'000, 5);
    const auto b = estimate_lambda1(RegionSpec::lens(2), 200'000, 5);
    const auto c = estimate_lambda1(RegionSpec::lens(2), 200'000, 6);
    CHECK(a.estimate == b.estimate);
    CHECK(a.estimate != c.estimate);
    CHECK(std::abs(a.estimate - c.estimate) <= 4.0 * std::hypot(a.standard_error, c.standard_error));
  }
  SUBCASE("cube families skip sampling") {
    const auto e = estimate_lambda1(RegionSpec::half_region(3), 10, 0);
    CHECK(e.estimate == 1.0);
    CHECK(e.standard_error == 0.0);
  }
  CHECK_THROWS_AS(estimate_lambda1(RegionSpec::lens(1), 0, 0), std::invalid_argument);
}

TEST_CASE("lambda1 star squared Monte Carlo") {
  const auto e = estimate_lambda1_star_sq(RegionSpec::lens(1), 20'000, 1'000, 3);
  CHECK(e.standard_error > 0.0);
  CHECK(std::abs(e.estimate - 2.0 / 3.0) <= 3.0 * e.standard_error);

  // the product of two independent inner estimates is unbiased even for a tiny inner budget
  const auto small = estimate_lambda1_star_sq(RegionSpec::lens(1), 200'000, 4, 4);
  CHECK(std::abs(small.estimate - 2.0 / 3.0) <= 3.0 * small.standard_error);

  CHECK_THROWS_AS(estimate_lambda1_star_sq(RegionSpec::lens(1), 100, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_lambda1_star_sq(RegionSpec::lens(1), 1, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_lambda1_star_sq(RegionSpec::half_region(1), 100, 100, 0), std::invalid_argument);
}

TEST_CASE("constants cache round trip") {
  const auto path = std::filesystem::temp_directory_path() / "ldepth_constants_cache_test.json";
  std::filesystem::remove(path);
  ConstantsBudget budget{20'000, 200, 50};
  GeometryConstants first;
  {
    ConstantsCache cache(path.string());
    CHECK(cache.size() == 0);
    first = cache.get_or_compute(RegionSpec::lens(2), budget, 9);
    CHECK(cache.size() == 1);
  }
  ConstantsCache reloaded(path.string());
  REQUIRE(reloaded.size() == 1);
  const auto hit = reloaded.find(RegionSpec::lens(2), budget, 9);
  REQUIRE(hit.has_value());
  CHECK(hit->lambda1 == first.lambda1);
  CHECK(hit->lambda1_star_sq == first.lambda1_star_sq);
  CHECK_FALSE(reloaded.find(RegionSpec::lens(2), budget, 10).has_value());
  CHECK_FALSE(reloaded.find(RegionSpec::beta_skeleton(1.5, 2), budget, 9).has_value());
  std::filesystem::remove(path);
}
