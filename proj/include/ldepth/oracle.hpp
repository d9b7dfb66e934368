#pragma once

#include <functional>
#include <string>

#include "ldepth/constants.hpp"

namespace ldepth {

/// A known density with a bounding box outside of which it is negligible.
struct DensityFn {
  std::function<double(ConstPointRef)> eval;
  std::size_t dim = 1;
  Point lower;
  Point upper;
  std::string name;

  double operator()(ConstPointRef x) const { return eval(x); }
  double operator()(double x) const { return eval(ConstPointRef(&x, 1)); }
};

struct QuadratureConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  std::size_t max_evals = 5'000'000;
  std::uint64_t mc_budget = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adaptive Gauss-Kronrod on [a, b]. Stops when the summed error estimate is
/// below max(abs_tol, rel_tol * |I|); throws ConvergenceError past max_evals.
double integrate_1d(const std::function<double(double)>& g, double a, double b, double abs_tol, double rel_tol,
                    std::size_t max_evals);

/// Integral of f over its bounding box (p <= 2 by nested quadrature).
double total_mass(const DensityFn& f, const QuadratureConfig& quad);

/// Throws DataError unless f integrates to 1 within tol over its box.
void check_normalized(const DensityFn& f, const QuadratureConfig& quad, double tol = 1e-6);

/// Population lens depth on the line, as twice the integral of
/// f(x + s) f(x - t) over s, t >= 0, s + t <= tau.
double population_lld_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad = {});

/// f_tau(x) = sqrt(LLD(x, tau)) / tau on the line.
double population_f_tau_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad = {});

/// Monte-Carlo population depth for any tuple family: tau^{p k} times the
/// integral of the product density over Z_1(0), sampled uniformly in the
/// lambda1 envelope ball.
McEstimate population_lgd_mc(const DensityFn& f, const RegionSpec& spec, ConstPointRef x, double tau,
                             const QuadratureConfig& quad = {});

/// Central difference of f_tau; requires h < tau / 10.
double population_f_tau_grad_1d(const DensityFn& f, double x, double tau, double h,
                                const QuadratureConfig& quad = {});

/// Projection J(x1) = P(X2 : (x1, X2) in Z_tau(x)) for the lens on the line.
double lens_projection_1d(const DensityFn& f, double x, double tau, double x1, const QuadratureConfig& quad = {});

/// b^2(x, tau) = Var J(X1), by nested quadrature.
double population_b_squared_1d(const DensityFn& f, double x, double tau, const QuadratureConfig& quad = {});

/// a^2(x, tau) = LLD (1 - LLD).
double population_a_squared(double lld);

/// Exact variance of the sample lens depth from n points.
double sample_depth_variance(std::size_t n, double a2, double b2);

}  // namespace ldepth
