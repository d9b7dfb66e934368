#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "doctest.h"
#include "ldepth/models.hpp"

using namespace ldepth;

namespace {

constexpr double kTwoPi = 6.283185307179586;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Probability of [a, b] under the k-th marginal of the density.
double marginal_mass(const AnalyticDensity& d, std::size_t k, double a, double b) {
  if (const auto* m = d.mixture_model()) {
    double s = 0.0;
    for (std::size_t c = 0; c < m->components(); ++c) {
      const double mu = m->means()[c][k];
      const double sd = std::sqrt(m->covariances()[c](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
      s += m->weights()[c] * (normal_cdf((b - mu) / sd) - normal_cdf((a - mu) / sd));
    }
    return s;
  }
  if (d.kind() == DensityKind::Uniform) {
    const double lo = std::max(a, d.lower()[k]), hi = std::min(b, d.upper()[k]);
    return hi > lo ? (hi - lo) / (d.upper()[k] - d.lower()[k]) : 0.0;
  }
  const std::size_t other = 1 - k;
  return integrate_1d(
      [&](double u) {
        return integrate_1d(
            [&](double v) {
              Point x(2);
              x[k] = u;
              x[other] = v;
              return d(x);
            },
            d.lower()[other], d.upper()[other], 1e-10, 1e-9, 10'000'000);
      },
      a, b, 1e-9, 1e-8, 10'000'000);
}

// Chi-square goodness of fit of one marginal on equal-width bins, tails
// folded into the end bins. Returns the upper-tail p-value.
double marginal_chi_square(const AnalyticDensity& d, const Dataset& x, std::size_t k, int bins) {
  double lo = d.lower()[k], hi = d.upper()[k];
  if (const auto* m = d.mixture_model()) {
    lo = kInf;
    hi = -kInf;
    for (std::size_t c = 0; c < m->components(); ++c) {
      const double sd = std::sqrt(m->covariances()[c](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
      lo = std::min(lo, m->means()[c][k] - 3 * sd);
      hi = std::max(hi, m->means()[c][k] + 3 * sd);
    }
  }
  std::vector<double> observed(static_cast<std::size_t>(bins), 0.0);
  const double w = (hi - lo) / bins;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int b = std::clamp(static_cast<int>((x.row(i)[k] - lo) / w), 0, bins - 1);
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  double stat = 0.0;
  const double n = static_cast<double>(x.size());
  for (int b = 0; b < bins; ++b) {
    const double a = b == 0 ? -1e6 : lo + b * w;
    const double c = b == bins - 1 ? 1e6 : lo + (b + 1) * w;
    const double lo_clip = d.kind() == DensityKind::Mixture ? a : std::max(a, d.lower()[k]);
    const double hi_clip = d.kind() == DensityKind::Mixture ? c : std::min(c, d.upper()[k]);
    const double e = n * marginal_mass(d, k, lo_clip, hi_clip);
    stat += (observed[static_cast<std::size_t>(b)] - e) * (observed[static_cast<std::size_t>(b)] - e) / e;
  }
  return boost::math::gamma_q(0.5 * (bins - 1), 0.5 * stat);
}

Point central_grad(const AnalyticDensity& d, const Point& x, double h) {
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Point a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (d(a) - d(b)) / (2 * h);
  }
  return g;
}

// Root of the axial derivative of the bimodal density between a and b.
double axial_stationary_point(const AnalyticDensity& d, double a, double b) {
  auto slope = [&](double t) { return d.density_and_grad(Point{t, 0.0}).second[0]; };
  double fa = slope(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = slope(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("bimodal density values") {
  const auto d = named_density("bimodal");
  const auto [f, g] = d.density_and_grad(Point{0.0, 0.0});
  CHECK(f == doctest::Approx(std::exp(-2.0) / kTwoPi).epsilon(1e-12));
  CHECK(f == doctest::Approx(0.0215393).epsilon(1e-6));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(named_density("mixture_1d_bimodal")(Point{0.0}) == doctest::Approx(0.0539910).epsilon(1e-6));
}

TEST_CASE("gradient at a dominant component mean") {
  const MixtureModel m({0.999, 0.001}, {{0.0}, {10.0}}, {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)});
  Point g(1);
  m.density_and_grad(Point{0.0}, g);
  // The far component contributes w * 10 * phi(10).
  const double bound = 0.001 * 10.0 * std::exp(-50.0) / std::sqrt(kTwoPi);
  CHECK(std::abs(g[0]) <= bound * (1 + 1e-12));
  CHECK(g[0] > 0.0);
}

TEST_CASE("mixture validation") {
  const auto id = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(MixtureModel({0.5, 0.6}, {{0, 0}, {1, 1}}, {id, id}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureModel({1.0}, {{0, 0}}, {-id}), std::invalid_argument);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(MixtureModel({1.0}, {{0, 0}}, {asym}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureModel({1.0}, {{0, 0, 0}}, {id}), std::invalid_argument);
  CHECK_THROWS_AS(named_density("nope"), std::invalid_argument);
}

TEST_CASE("closed form gradients and Hessians match finite differences") {
  Rng rng(3);
  for (const auto& name : density_names()) {
    const auto d = named_density(name);
    if (d.kind() != DensityKind::Mixture) continue;
    for (int t = 0; t < 10; ++t) {
      Point x(d.dim());
      for (auto& v : x) v = rng.uniform(-2.5, 2.5);
      const auto [f, g] = d.density_and_grad(x);
      const auto fd = central_grad(d, x, 1e-5);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-6).scale(f));
      const auto h = d.hessian(x);
      for (std::size_t j = 0; j < x.size(); ++j) {
        Point a = x, b = x;
        a[j] += 1e-5;
        b[j] -= 1e-5;
        const auto ga = d.density_and_grad(a).second, gb = d.density_and_grad(b).second;
        for (std::size_t i = 0; i < x.size(); ++i) {
          CHECK(h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                doctest::Approx((ga[i] - gb[i]) / 2e-5).epsilon(1e-5).scale(f));
        }
      }
    }
  }
}

TEST_CASE("circular densities are normalized on their box") {
  for (const auto* name : {"circular2", "circular2_cauchy", "circular3", "circular4_cauchy"}) {
    const auto d = named_density(name);
    CHECK(d.normalizer() > 0.0);
    QuadratureConfig q;
    q.abs_tol = 1e-9;
    q.rel_tol = 1e-9;
    CHECK_NOTHROW(check_normalized(d.to_density_fn(), q, 1e-6));
    CHECK(d(Point{5.0, 0.0}) == 0.0);
    const Point x{0.7, -1.1};
    CHECK(d(x) == doctest::Approx(d.raw(x) / d.normalizer()));
    const auto g = d.density_and_grad(x).second;
    const auto fd = central_grad(d, x, 1e-4);
    CHECK(g[0] == doctest::Approx(fd[0]).epsilon(1e-5));
    CHECK(g[1] == doctest::Approx(fd[1]).epsilon(1e-5));
  }
}

TEST_CASE("sampler basics") {
  const auto d = named_density("bimodal");
  CHECK(sample(d, 0, 1).empty());
  const auto x = sample(d, 100'000, 42);
  REQUIRE(x.size() == 100'000);
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m0 += x.row(i)[0];
    m1 += x.row(i)[1];
  }
  CHECK(std::abs(m0 / 1e5) < 0.05);
  CHECK(std::abs(m1 / 1e5) < 0.05);
  const auto again = sample(d, 100'000, 42);
  CHECK(again.values() == x.values());
  const auto u = sample(named_density("uniform"), 1000, 3);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(u.row(i)[0] >= 0.0);
    CHECK(u.row(i)[0] <= 1.0);
  }
}

TEST_CASE("sampled marginals pass chi-square goodness of fit") {
  std::uint64_t seed = 1000;
  for (const auto& name : density_names()) {
    const auto d = named_density(name);
    const auto x = sample(d, 100'000, ++seed);
    const std::size_t coords = std::min<std::size_t>(d.dim(), 2);
    for (std::size_t k = 0; k < coords; ++k) {
      const double pv = marginal_chi_square(d, x, k, 50);
      CAPTURE(name);
      CAPTURE(k);
      CHECK(pv > 0.001);
    }
  }
}

TEST_CASE("gradient flow reaches the bimodal modes") {
  const auto d = named_density("bimodal");
  const double mode = axial_stationary_point(d, 1.5, 2.5);
  GradientFlowConfig cfg;
  const auto right = gradient_flow(d, Point{1.0, 0.0}, cfg, true);
  CHECK(right.status == FlowStatus::Converged);
  CHECK(std::abs(right.terminal[0] - mode) < cfg.merge_radius);
  CHECK(std::abs(right.terminal[1]) < cfg.merge_radius);
  const auto left = gradient_flow(d, Point{-1.0, 0.0}, cfg);
  CHECK(std::abs(left.terminal[0] + mode) < cfg.merge_radius);
  CHECK(gradient_flow(d, Point{0.0, 0.0}, cfg).status == FlowStatus::Saddle);
  for (std::size_t i = 1; i < right.trace.size(); ++i) CHECK(right.trace[i] >= right.trace[i - 1]);
  CHECK_THROWS_AS(gradient_flow(named_density("uniform"), Point{3.0}, cfg), DataError);
}

TEST_CASE("flow ascent is monotone on every benchmark") {
  Rng rng(8);
  GradientFlowConfig cfg;
  cfg.step = 0.2;
  for (const auto& name : density_names()) {
    const auto d = named_density(name);
    if (d.kind() == DensityKind::Uniform) continue;
    Point x(d.dim());
    for (auto& v : x) v = rng.uniform(-1.5, 1.5);
    const auto r = gradient_flow(d, x, cfg, true);
    CAPTURE(name);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
  }
}

TEST_CASE("mode counts from a grid of starts") {
  const auto count_modes = [](const AnalyticDensity& d, double half) {
    ModeSet modes(1e-3);
    GradientFlowConfig cfg;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const Point x{-half + 2 * half * (i + 0.5) / 20, -half + 2 * half * (j + 0.5) / 20};
        const auto t = true_cluster(d, x, cfg, modes);
        CHECK(t.status == FlowStatus::Converged);
      }
    }
    return modes.modes().size();
  };
  CHECK(count_modes(named_density("bimodal"), 4.0) == 2);
  CHECK(count_modes(named_density("fountain10"), 2.0) == 5);
  CHECK(count_modes(named_density("quadrimodal"), 4.0) == 4);
}

TEST_CASE("true partitions follow the symmetry of the mixture") {
  GradientFlowConfig cfg;
  const auto bi = named_density("bimodal");
  const auto x = sample(bi, 1000, 5);
  const auto part = true_partition(bi, x, cfg);
  CHECK(part.clusters.size() == 2);
  CHECK(part.modes.size() == 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x.row(i)[0]) < 1e-3) continue;
    const int side = x.row(i)[0] > 0 ? 1 : 0;
    const int mode_side = part.modes[static_cast<std::size_t>(part.labels[i])][0] > 0 ? 1 : 0;
    CHECK(side == mode_side);
  }

  const auto quad = named_density("quadrimodal");
  const auto y = sample(quad, 1000, 6);
  const auto qp = true_partition(quad, y, cfg);
  CHECK(qp.clusters.size() == 4);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y.row(i)[0]) < 1e-3 || std::abs(y.row(i)[1]) < 1e-3) continue;
    const auto& m = qp.modes[static_cast<std::size_t>(qp.labels[i])];
    CHECK((y.row(i)[0] > 0) == (m[0] > 0));
    CHECK((y.row(i)[1] > 0) == (m[1] > 0));
  }

  const auto one = named_density("normal");
  const auto z = sample(one, 200, 7);
  CHECK(true_partition(one, z, cfg).clusters.size() == 1);
}

TEST_CASE("flow on the saddle is flagged and joins the nearest mode") {
  const auto bi = named_density("bimodal");
  Dataset x(2, std::vector<double>{0.0, 0.0, 1.5, 0.3, -1.2, -0.4});
  const auto part = true_partition(bi, x, GradientFlowConfig{});
  REQUIRE(part.flagged.size() == 1);
  CHECK(part.flagged[0] == 0);
  CHECK(part.labels[0] >= 0);
  CHECK(part.clusters.size() == 2);
}
