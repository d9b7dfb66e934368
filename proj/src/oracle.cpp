#include "ldepth/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ldepth {

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("QuadratureConfig: tolerances must be > 0");
  if (max_evals == 0) throw std::invalid_argument("QuadratureConfig: max_evals must be positive");
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel panel(const std::function<double(double)>& g, double a, double b) {
  double err = 0.0;
  const double v = GK::integrate(g, a, b, 0, 0.0, &err);
  return {a, b, v, err};
}

void require_1d(const DensityFn& f, const char* who) {
  if (f.dim != 1) throw std::invalid_argument(std::string(who) + ": density must be one-dimensional");
  if (f.lower.size() != 1 || f.upper.size() != 1) {
    throw std::invalid_argument(std::string(who) + ": density needs a bounding interval");
  }
}

// Integral of f over [a, b] clipped to the support box; 0 if empty.
double mass_on(const DensityFn& f, double a, double b, double abs_tol, double rel_tol, std::size_t max_evals) {
  a = std::max(a, f.lower[0]);
  b = std::min(b, f.upper[0]);
  if (!(b > a)) return 0.0;
  return integrate_1d([&](double t) { return f(t); }, a, b, abs_tol, rel_tol, max_evals);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& g, double a, double b, double abs_tol, double rel_tol,
                    std::size_t max_evals) {
  if (a == b) return 0.0;
  if (a > b) return -integrate_1d(g, b, a, abs_tol, rel_tol, max_evals);
  std::priority_queue<Panel> heap;
  heap.push(panel(g, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  std::size_t evals = 15;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (evals + 30 > max_evals) {
      throw ConvergenceError("integrate_1d: no convergence within " + std::to_string(max_evals) +
                             " evaluations (error estimate " + std::to_string(error) + ")");
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in floating point; accept it.
      error -= worst.error;
      Panel frozen = worst;
      frozen.error = 0.0;
      heap.push(frozen);
      continue;
    }
    const Panel left = panel(g, worst.a, mid);
    const Panel right = panel(g, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to avoid drift from incremental updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

double total_mass(const DensityFn& f, const QuadratureConfig& quad) {
  quad.validate();
  if (f.lower.size() != f.dim || f.upper.size() != f.dim) {
    throw std::invalid_argument("total_mass: density needs a bounding box");
  }
  if (f.dim == 1) return mass_on(f, f.lower[0], f.upper[0], quad.abs_tol, quad.rel_tol, quad.max_evals);
  if (f.dim == 2) {
    return integrate_1d(
        [&](double u) {
          return integrate_1d(
              [&](double v) {
                const double pt[2] = {u, v};
                return f(ConstPointRef(pt, 2));
              },
              f.lower[1], f.upper[1], 0.01 * quad.abs_tol, quad.rel_tol, quad.max_evals);
        },
        f.lower[0], f.upper[0], quad.abs_tol, quad.rel_tol, quad.max_evals);
  }
  throw std::invalid_argument("total_mass: quadrature only for p <= 2");
}

void check_normalized(const DensityFn& f, const QuadratureConfig& quad, double tol) {
  const double m = total_mass(f, quad);
  if (std::abs(m - 1.0) > tol) {
    throw DataError("density '" + f.name + "' integrates to " + std::to_string(m) + " over its box");
  }
}

double population_lld_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad) {
  require_1d(f, "population_lld_1d");
  quad.validate();
  if (std::isnan(tau) || tau < 0.0) throw std::invalid_argument("population_lld_1d: tau must be >= 0");
  if (tau == 0.0) return 0.0;
  const double lo = f.lower[0], hi = f.upper[0];
  const double s_lo = std::max(0.0, lo - x);
  const double s_hi = std::min(tau, hi - x);
  if (!(s_hi > s_lo)) return 0.0;
  const double inner_tol = 0.01 * quad.abs_tol / std::max(1.0, tau);
  auto outer = [&](double s) {
    const double fs = f(x + s);
    if (fs == 0.0) return 0.0;
    // t ranges over [0, tau - s] with x - t inside the box
    const double t_lo = std::max(0.0, x - hi);
    const double t_hi = std::min(tau - s, x - lo);
    if (!(t_hi > t_lo)) return 0.0;
    return fs * integrate_1d([&](double t) { return f(x - t); }, t_lo, t_hi, inner_tol, quad.rel_tol, quad.max_evals);
  };
  return 2.0 * integrate_1d(outer, s_lo, s_hi, 0.5 * quad.abs_tol, quad.rel_tol, quad.max_evals);
}

double population_f_tau_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad) {
  if (!(tau > 0.0) || tau == kInf) throw std::invalid_argument("population_f_tau_1d: tau must be positive and finite");
  return std::sqrt(population_lld_1d(f, x, tau, quad)) / tau;
}

McEstimate population_lgd_mc(const DensityFn& f, const RegionSpec& spec, ConstPointRef x, double tau,
                             const QuadratureConfig& quad) {
  spec.validate();
  quad.validate();
  if (spec.is_cube_family()) throw std::invalid_argument("population_lgd_mc: tuple families only");
  if (x.size() != spec.dim || f.dim != spec.dim) throw std::invalid_argument("population_lgd_mc: dimension mismatch");
  if (!(tau > 0.0) || tau == kInf) throw std::invalid_argument("population_lgd_mc: tau must be positive and finite");
  if (quad.mc_budget < 2) throw std::invalid_argument("population_lgd_mc: mc_budget must be >= 2");

  const std::size_t p = spec.dim;
  const std::size_t k = spec.arity();
  const double radius = lambda1_envelope_radius(spec);
  const double scale = ball_volume(p * k, radius) * std::pow(tau, static_cast<double>(p * k));
  constexpr std::uint64_t chunk = 1u << 14;
  const std::uint64_t n = quad.mc_budget;
  const std::uint64_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> sum(chunks, 0.0), sum2(chunks, 0.0);

  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(quad.seed, c);
    std::vector<double> y(p * k), pt(p);
    std::vector<const double*> ptrs(k);
    const std::vector<double> origin(p, 0.0);
    const std::uint64_t end = std::min(n, (c + 1) * chunk);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = c * chunk; i < end; ++i) {
      rng.in_ball(y, radius);
      bool inside;
      if (spec.is_pair_family()) {
        inside = region::pair(spec, origin, {y.data(), p}, {y.data() + p, p}, 1.0);
      } else {
        for (std::size_t j = 0; j < k; ++j) ptrs[j] = y.data() + j * p;
        inside = region::simplicial(ptrs, p, origin.data(), 1.0);
      }
      if (!inside) continue;
      double g = 1.0;
      for (std::size_t j = 0; j < k && g != 0.0; ++j) {
        for (std::size_t d = 0; d < p; ++d) pt[d] = x[d] + tau * y[j * p + d];
        g *= f(pt);
      }
      s += g;
      s2 += g * g;
    }
    sum[c] = s;
    sum2[c] = s2;
  });

  double s = 0.0, s2 = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    s += sum[c];
    s2 += sum2[c];
  }
  if (s == 0.0) return {0.0, 0.0};
  const double nn = static_cast<double>(n);
  const double mean = s / nn;
  const double var = std::max(0.0, (s2 / nn - mean * mean) * nn / (nn - 1.0));
  return {scale * mean, scale * std::sqrt(var / nn)};
}

double population_f_tau_grad_1d(const DensityFn& f, double x, double tau, double h, const QuadratureConfig& quad) {
  if (!(h > 0.0) || !(h < tau / 10.0)) {
    throw std::invalid_argument("population_f_tau_grad_1d: need 0 < h < tau / 10");
  }
  return (population_f_tau_1d(f, x + h, tau, quad) - population_f_tau_1d(f, x - h, tau, quad)) / (2.0 * h);
}

double lens_projection_1d(const DensityFn& f, double x, double tau, double x1, const QuadratureConfig& quad) {
  require_1d(f, "lens_projection_1d");
  if (std::abs(x1 - x) > tau) return 0.0;
  double a, b;
  if (x1 < x) {
    a = x;
    b = x1 + tau;
  } else if (x1 > x) {
    a = x1 - tau;
    b = x;
  } else {
    a = x - tau;
    b = x + tau;
  }
  return mass_on(f, a, b, quad.abs_tol, quad.rel_tol, quad.max_evals);
}

double population_b_squared_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad) {
  require_1d(f, "population_b_squared_1d");
  quad.validate();
  if (!(tau > 0.0) || tau == kInf) {
    throw std::invalid_argument("population_b_squared_1d: tau must be positive and finite");
  }
  QuadratureConfig inner = quad;
  inner.abs_tol = 0.01 * quad.abs_tol / std::max(1.0, tau);
  double first = 0.0, second = 0.0;
  // The projection jumps at x1 = x, so integrate each side separately.
  for (auto [a, b] : {std::pair{x - tau, x}, std::pair{x, x + tau}}) {
    a = std::max(a, f.lower[0]);
    b = std::min(b, f.upper[0]);
    if (!(b > a)) continue;
    first += integrate_1d([&](double t) { return f(t) * lens_projection_1d(f, x, tau, t, inner); }, a, b,
                          0.25 * quad.abs_tol, quad.rel_tol, quad.max_evals);
    second += integrate_1d(
        [&](double t) {
          const double j = lens_projection_1d(f, x, tau, t, inner);
          return f(t) * j * j;
        },
        a, b, 0.25 * quad.abs_tol, quad.rel_tol, quad.max_evals);
  }
  return std::max(0.0, second - first * first);
}

double population_a_squared(double lld) { return lld * (1.0 - lld); }

double sample_depth_variance(std::size_t n, double a2, double b2) {
  if (n < 2) throw std::invalid_argument("sample_depth_variance: n must be >= 2");
  const double nn = static_cast<double>(n);
  return (a2 + 2.0 * (nn - 2.0) * b2) / (nn * (nn - 1.0) / 2.0);
}

}  // namespace ldepth
