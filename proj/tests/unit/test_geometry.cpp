#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ldepth/geometry.hpp"

using namespace ldepth;

namespace {

std::vector<Point> random_tuple(Rng& rng, std::size_t k, std::size_t p, double scale = 1.0) {
  std::vector<Point> t(k, Point(p));
  for (auto& v : t)
    for (auto& c : v) c = scale * rng.normal();
  return t;
}

Point random_point(Rng& rng, std::size_t p, double scale = 1.0) {
  Point x(p);
  for (auto& c : x) c = scale * rng.normal();
  return x;
}

std::vector<RegionSpec> tuple_families(std::size_t p) {
  return {RegionSpec::lens(p), RegionSpec::spherical(p), RegionSpec::beta_skeleton(1.5, p),
          RegionSpec::beta_skeleton(3.0, p), RegionSpec::simplicial(p)};
}

}  // namespace

TEST_CASE("lens membership on the boundary") {
  const auto spec = RegionSpec::lens(2);
  const std::vector<Point> t{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(membership(spec, Point{0.0, 0.0}, t, 2.0));
  CHECK_FALSE(membership(spec, Point{0.0, 0.0}, t, 1.9));
  CHECK(membership(spec, Point{0.0, 0.0}, t, kInf));
}

TEST_CASE("simplicial membership depends on the diameter bound") {
  const auto spec = RegionSpec::simplicial(2);
  const std::vector<Point> t{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  // max pairwise distance is sqrt(2) ~ 1.41421
  CHECK(membership(spec, Point{0.1, 0.1}, t, 1.5));
  CHECK_FALSE(membership(spec, Point{0.1, 0.1}, t, 1.4));
  CHECK(membership(spec, Point{0.1, 0.1}, t, std::sqrt(2.0)));
}

TEST_CASE("spherical is the beta = 1 skeleton") {
  const std::vector<Point> t{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(membership(RegionSpec::beta_skeleton(1.0, 2), Point{0.0, 0.0}, t, 2.0));
  CHECK(membership(RegionSpec::spherical(2), Point{0.0, 0.0}, t, 2.0));
}

TEST_CASE("simplex_contains") {
  const std::vector<Point> tri{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  CHECK(simplex_contains(tri, Point{0.25, 0.25}));
  CHECK_FALSE(simplex_contains(tri, Point{1.0, 1.0}));
  CHECK(simplex_contains(tri, Point{0.5, 0.5}));  // on an edge
  const std::vector<Point> flat{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  CHECK_FALSE(simplex_contains(flat, Point{1.0, 0.0}));
  CHECK_FALSE(simplex_contains(flat, Point{0.5, 0.0}));
  CHECK_THROWS_AS(simplex_contains(tri, Point{0.1, 0.1, 0.1}), std::invalid_argument);

  SUBCASE("general dimension agrees with a direct barycentric solve") {
    // 3-simplex: unit corner tetrahedron, point inside iff coords >= 0 and sum <= 1.
    const std::vector<Point> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
      Point x{rng.uniform(-0.2, 1.0), rng.uniform(-0.2, 1.0), rng.uniform(-0.2, 1.0)};
      const bool inside = x[0] >= 0 && x[1] >= 0 && x[2] >= 0 && x[0] + x[1] + x[2] <= 1.0;
      CHECK(simplex_contains(tet, x) == inside);
    }
  }
}

TEST_CASE("membership preconditions") {
  const auto lens = RegionSpec::lens(2);
  const std::vector<Point> pair{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK_THROWS_AS(membership(lens, Point{0.0, 0.0}, {{1.0, 0.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(membership(lens, Point{0.0, 0.0}, pair, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(membership(lens, Point{NAN, 0.0}, pair, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(membership(lens, Point{0.0, 0.0}, pair, 1.0, RegionAux{Point{1.0, 0.0}, {}}),
                  std::invalid_argument);

  const auto cube = RegionSpec::halfspace_cube(2);
  CHECK_THROWS_AS(membership(cube, Point{0.0, 0.0}, {{0.1, 0.1}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(membership(cube, Point{0.0, 0.0}, {{0.1, 0.1}}, 1.0, RegionAux{Point{1.0, 1.0}, {}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(RegionSpec::beta_skeleton(0.5, 2).validate(), std::invalid_argument);
}

TEST_CASE("hypercube regions") {
  const auto cube = RegionSpec::halfspace_cube(2);
  // cube centered at x + tau/2 u with half side tau/2
  const RegionAux east{Point{1.0, 0.0}, {}};
  CHECK(membership(cube, Point{0.0, 0.0}, {{0.9, 0.4}}, 1.0, east));
  CHECK_FALSE(membership(cube, Point{0.0, 0.0}, {{-0.1, 0.0}}, 1.0, east));
  CHECK_FALSE(membership(cube, Point{0.0, 0.0}, {{0.5, 0.6}}, 1.0, east));

  const auto halves = RegionSpec::half_region(2);
  CHECK(membership(halves, Point{0.0, 0.0}, {{0.3, 0.9}}, 1.0, RegionAux{{}, Orthant::Upper}));
  CHECK_FALSE(membership(halves, Point{0.0, 0.0}, {{0.3, 0.9}}, 1.0, RegionAux{{}, Orthant::Lower}));
  CHECK(membership(halves, Point{0.0, 0.0}, {{-0.3, -0.9}}, 1.0, RegionAux{{}, Orthant::Lower}));
  CHECK_THROWS_AS(membership(halves, Point{0.0, 0.0}, {{0.3, 0.9}}, 1.0), std::invalid_argument);

  SUBCASE("for p = 1 the half-space cube and half-region families coincide") {
    const auto h1 = RegionSpec::halfspace_cube(1);
    const auto r1 = RegionSpec::half_region(1);
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
      const Point x{rng.normal()};
      const std::vector<Point> y{{rng.normal()}};
      const double tau = rng.uniform(0.0, 2.0);
      CHECK(membership(h1, x, y, tau, RegionAux{Point{1.0}, {}}) ==
            membership(r1, x, y, tau, RegionAux{{}, Orthant::Upper}));
      CHECK(membership(h1, x, y, tau, RegionAux{Point{-1.0}, {}}) ==
            membership(r1, x, y, tau, RegionAux{{}, Orthant::Lower}));
    }
  }
}

TEST_CASE("lens and spherical are the beta = 2 and beta = 1 skeletons") {
  Rng rng(11);
  for (std::size_t p : {1u, 2u, 3u}) {
    for (int i = 0; i < 2000; ++i) {
      const auto t = random_tuple(rng, 2, p);
      const auto x = random_point(rng, p, 0.7);
      const double tau = rng.uniform(0.0, 4.0);
      CHECK(membership(RegionSpec::lens(p), x, t, tau) ==
            membership(RegionSpec::beta_skeleton(2.0, p), x, t, tau));
      CHECK(membership(RegionSpec::spherical(p), x, t, tau) ==
            membership(RegionSpec::beta_skeleton(1.0, p), x, t, tau));
    }
  }
}

TEST_CASE("translation and dilation invariance") {
  Rng rng(5);
  for (std::size_t p : {1u, 2u, 3u}) {
    for (const auto& spec : tuple_families(p)) {
      int agree = 0, total = 0;
      for (int i = 0; i < 1000; ++i) {
        const auto t = random_tuple(rng, spec.arity(), p);
        const auto x = random_point(rng, p, 0.5);
        const double tau = rng.uniform(0.1, 4.0);
        std::vector<Point> shifted = t;
        for (auto& v : shifted)
          for (std::size_t k = 0; k < p; ++k) v[k] -= x[k];
        const Point origin(p, 0.0);
        const bool base = membership(spec, x, t, tau);
        agree += base == membership(spec, origin, shifted, tau);
        ++total;

        std::vector<Point> scaled = shifted;
        for (auto& v : scaled)
          for (auto& c : v) c /= tau;
        agree += membership(spec, origin, shifted, tau) == membership(spec, origin, scaled, 1.0);
        ++total;
      }
      CHECK_MESSAGE(agree == total, spec.label() << " p=" << p);
    }
  }
}

TEST_CASE("point reflection and permutation symmetry") {
  Rng rng(7);
  for (std::size_t p : {1u, 2u, 3u}) {
    for (const auto& spec : tuple_families(p)) {
      for (int i = 0; i < 1000; ++i) {
        auto t = random_tuple(rng, spec.arity(), p);
        const Point origin(p, 0.0);
        const double tau = rng.uniform(0.1, 4.0);
        const bool base = membership(spec, origin, t, tau);
        auto neg = t;
        for (auto& v : neg)
          for (auto& c : v) c = -c;
        CHECK(base == membership(spec, origin, neg, tau));
        std::reverse(t.begin(), t.end());
        CHECK(base == membership(spec, origin, t, tau));
        std::rotate(t.begin(), t.begin() + 1, t.end());
        CHECK(base == membership(spec, origin, t, tau));
      }
    }
  }
}

TEST_CASE("families coincide in one dimension") {
  Rng rng(13);
  for (int i = 0; i < 5000; ++i) {
    const auto t = random_tuple(rng, 2, 1);
    const auto x = random_point(rng, 1);
    const double tau = rng.uniform(0.0, 3.0);
    const bool lens = membership(RegionSpec::lens(1), x, t, tau);
    CHECK(lens == membership(RegionSpec::spherical(1), x, t, tau));
    CHECK(lens == membership(RegionSpec::beta_skeleton(1.5, 1), x, t, tau));
    CHECK(lens == membership(RegionSpec::beta_skeleton(1.0, 1), x, t, tau));
    CHECK(lens == membership(RegionSpec::simplicial(1), x, t, tau));
  }
}

TEST_CASE("membership is monotone in tau") {
  Rng rng(19);
  for (std::size_t p : {1u, 2u}) {
    for (const auto& spec : tuple_families(p)) {
      for (int i = 0; i < 1000; ++i) {
        const auto t = random_tuple(rng, spec.arity(), p);
        const auto x = random_point(rng, p, 0.5);
        const double t1 = rng.uniform(0.0, 3.0);
        const double t2 = t1 + rng.uniform(0.0, 3.0);
        if (membership(spec, x, t, t1)) {
          CHECK(membership(spec, x, t, t2));
          CHECK(membership(spec, x, t, kInf));
        }
      }
    }
  }
}
