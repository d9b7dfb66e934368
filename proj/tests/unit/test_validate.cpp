#include <sstream>

#include "doctest.h"
#include "ldepth/validate.hpp"

using namespace ldepth;

namespace {

Dataset line_grid(double lo, double hi, int count) {
  Dataset g(1, std::vector<double>{});
  for (int i = 0; i < count; ++i) g.push_back(Point{lo + (hi - lo) * i / (count - 1)});
  return g;
}

MixtureModel pair_on_line(double w0, double sd0) {
  Eigen::MatrixXd a(1, 1), b(1, 1);
  a(0, 0) = sd0 * sd0;
  b(0, 0) = 1.0;
  return MixtureModel({w0, 1.0 - w0}, {{-2.0}, {2.0}}, {a, b});
}

}  // namespace

TEST_CASE("anderson darling separates normal from exponential draws") {
  Rng rng(3);
  std::vector<double> normal(400), expo(400);
  for (auto& v : normal) v = rng.normal();
  for (auto& v : expo) v = -std::log(rng.uniform());
  CHECK(anderson_darling_normal(normal).p_value > 0.01);
  CHECK(anderson_darling_normal(expo).p_value < 1e-4);
  const auto ad = anderson_darling_normal(normal);
  CHECK(ad.a2_star > ad.a2);
  CHECK_THROWS_AS(anderson_darling_normal({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("chi-square tail") {
  CHECK(chi_square_sf(2.0, 2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(0.0, 3.0) == 1.0);
  CHECK_THROWS_AS(chi_square_sf(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("verdict aggregation") {
  ValidationVerdict good;
  good.check_name = "a";
  good.passed = true;
  ValidationVerdict control;
  control.check_name = "b";
  control.expected_fail = true;
  CHECK(good.ok());
  CHECK(control.ok());
  CHECK(exit_code({good, control}) == 0);
  ValidationVerdict bad;
  CHECK(exit_code({good, bad}) == 3);

  std::ostringstream out;
  write_jsonl(out, {good, control});
  std::istringstream in(out.str());
  std::string first, second, rest;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(!std::getline(in, rest));
  const auto j = nlohmann::json::parse(second);
  CHECK(j["check_name"] == "b");
  CHECK(j["ok"] == true);
  CHECK(j["expected_fail"] == true);
}

TEST_CASE("symmetric pair is stationary at its center") {
  const auto v = check_symmetry_stationary(pair_on_line(0.5, 1.0), 1.0, 1);
  CHECK(v.passed);
  CHECK(!v.expected_fail);
  CHECK(v.statistic < 1e-6);
}

TEST_CASE("asymmetric pair is a negative control") {
  const auto unequal_weights = check_symmetry_stationary(pair_on_line(0.3, 1.0), 1.0, 1);
  CHECK(unequal_weights.expected_fail);
  CHECK(!unequal_weights.passed);
  CHECK(unequal_weights.ok());
  const auto unequal_scales = check_symmetry_stationary(pair_on_line(0.5, 0.6), 1.0, 1);
  CHECK(unequal_scales.expected_fail);
  CHECK(unequal_scales.ok());
  CHECK_THROWS_AS(check_symmetry_stationary(pair_on_line(0.5, 1.0), 0.0, 1), std::invalid_argument);
}

TEST_CASE("single gaussian maximizer sits at the mean") {
  const auto m = MixtureModel::isotropic({{1.5}});
  const auto v = check_mode_bracket(m, {1.0, 0.5}, 1);
  CHECK(v.passed);
  CHECK(v.statistic < 1e-3);
  REQUIRE(v.details["modes"].size() == 1);
  CHECK(v.details["modes"][0].get<double>() == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("extreme localization on a reversed ladder fails") {
  // Large tau first means the error must grow along the ladder.
  const auto v = check_extreme_localization("normal", line_grid(-2.0, 2.0, 21), {0.1, 1.0, 3.0}, 2000, 7, 0.5);
  CHECK(!v.passed);
  CHECK(!v.details["strictly_decreasing"].get<bool>());
  CHECK_THROWS_AS(check_extreme_localization("normal", line_grid(-1, 1, 3), {}, 100, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(check_extreme_localization("normal", line_grid(-1, 1, 3), {-0.1}, 100, 1, 0.1),
                  std::invalid_argument);
}

TEST_CASE("clt check rejects exponents at or past one third") {
  GeometryConstants c;
  c.spec = RegionSpec::lens(1);
  c.lambda1 = 1.0;
  c.lambda1_star_sq = 2.0 / 3.0;
  CHECK_THROWS_AS(check_clt_variance("normal", 0.0, 1000, 0.5, 50, 1, c), std::invalid_argument);
  CHECK_THROWS_AS(check_clt_variance("normal", 0.0, 1000, 1.0 / 3.0, 50, 1, c), std::invalid_argument);
  auto wrong = c;
  wrong.spec = RegionSpec::spherical(1);
  CHECK_THROWS_AS(check_clt_variance("normal", 0.0, 1000, 0.25, 50, 1, wrong), std::invalid_argument);
}

TEST_CASE("level sets above the maximum agree everywhere") {
  const auto v = check_level_sets("bimodal", 10.0, {0.5}, {100}, 10, 1, 2);
  CHECK(v.passed);
  CHECK(v.statistic == 1.0);
  CHECK_THROWS_AS(check_level_sets("bimodal", 0.0, {0.5}, {100}, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_level_sets("bimodal", 0.1, {0.5, 0.2}, {100}, 10, 1), std::invalid_argument);
}

TEST_CASE("unbiasedness check passes and repeats under a seed") {
  const auto a = check_unbiasedness_and_variance("normal", 0.0, 0.5, 40, 600, 5);
  const auto b = check_unbiasedness_and_variance("normal", 0.0, 0.5, 40, 600, 5);
  CHECK(a.passed);
  CHECK(a.statistic == b.statistic);
  CHECK(a.details.dump() == b.details.dump());
}

TEST_CASE("depth normality on the uniform") {
  const auto v = check_depth_normality("uniform", 0.5, 0.2, 1000, 200, 2);
  CHECK(v.passed);
  CHECK(v.replications == 200);
}
