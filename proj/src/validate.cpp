#include "ldepth/validate.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/statistics/anderson_darling.hpp>
#include <boost/math/tools/minima.hpp>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "ldepth/depth.hpp"

namespace ldepth {

nlohmann::json ValidationVerdict::to_json() const {
  return {{"check_name", check_name},     {"statistic", statistic},
          {"target", target},             {"tolerance", tolerance},
          {"passed", passed},             {"expected_fail", expected_fail},
          {"ok", ok()},                   {"replications", replications},
          {"seed", seed},                 {"runtime_seconds", runtime_seconds},
          {"details", details}};
}

void write_jsonl(std::ostream& out, const std::vector<ValidationVerdict>& verdicts) {
  for (const auto& v : verdicts) out << v.to_json().dump() << '\n';
}

int exit_code(const std::vector<ValidationVerdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.ok(); }) ? 0 : 3;
}

AndersonDarling anderson_darling_normal(std::vector<double> values) {
  if (values.size() < 8) throw std::invalid_argument("anderson_darling_normal: need at least 8 values");
  std::sort(values.begin(), values.end());
  AndersonDarling r;
  r.a2 = boost::math::statistics::anderson_darling_normality_statistic(values);
  const double n = static_cast<double>(values.size());
  const double a = r.a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
  r.a2_star = a;
  // D'Agostino and Stephens (1986), case of estimated mean and variance.
  if (a >= 0.6) {
    r.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    r.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    r.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    r.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

double chi_square_sf(double statistic, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // n - 1 denominator
  double m4 = 0.0;        // central fourth moment, n denominator
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  m.variance = s2 / (n - 1.0);
  m.m4 = s4 / n;
  return m;
}

const MixtureModel& require_1d_mixture(const MixtureModel& m) {
  if (m.dim() != 1) throw std::invalid_argument("validate: mixture must be one-dimensional");
  return m;
}

AnalyticDensity line_density(const std::string& name) {
  auto d = named_density(name);
  if (d.dim() != 1) throw std::invalid_argument("validate: " + name + " is not a density on the line");
  return d;
}

GeometryConstants lens_lambda1(std::size_t p, std::uint64_t seed) {
  return lambda1_only(RegionSpec::lens(p), 1'000'000, seed);
}

// Square box holding the bulk of the density, for grids.
std::pair<Point, Point> plot_box(const AnalyticDensity& d) {
  if (const auto* m = d.mixture_model()) {
    Point lo(d.dim(), kInf), hi(d.dim(), -kInf);
    for (std::size_t c = 0; c < m->components(); ++c) {
      for (std::size_t k = 0; k < d.dim(); ++k) {
        const double sd = std::sqrt(m->covariances()[c](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
        lo[k] = std::min(lo[k], m->means()[c][k] - 3.5 * sd);
        hi[k] = std::max(hi[k], m->means()[c][k] + 3.5 * sd);
      }
    }
    return {lo, hi};
  }
  return {d.lower(), d.upper()};
}

}  // namespace

ValidationVerdict check_extreme_localization(const std::string& density_name, const Dataset& grid,
                                             const std::vector<double>& taus, std::size_t n, std::uint64_t seed,
                                             double tolerance) {
  const auto t0 = Clock::now();
  const auto d = named_density(density_name);
  if (d.dim() > 2) throw std::invalid_argument("check_extreme_localization: p must be 1 or 2");
  if (grid.dim() != d.dim() || grid.empty()) throw std::invalid_argument("check_extreme_localization: bad grid");
  if (taus.empty()) throw std::invalid_argument("check_extreme_localization: empty tau ladder");
  for (double t : taus)
    if (!(t > 0.0) || t == kInf) throw std::invalid_argument("check_extreme_localization: taus must be positive");

  const auto data = sample(d, n, seed);
  const auto constants = lens_lambda1(d.dim(), seed);
  std::vector<double> truth(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) truth[i] = d(grid.row(i));

  std::vector<double> sups;
  for (double tau : taus) {
    DepthConfig cfg;
    cfg.spec = RegionSpec::lens(d.dim());
    cfg.tau = tau;
    cfg.seed = seed;
    const auto est = tau_approximation(data, grid, cfg, constants);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(est[i] - truth[i]));
    sups.push_back(sup);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < sups.size(); ++i) decreasing = decreasing && sups[i] < sups[i - 1];

  ValidationVerdict v;
  v.check_name = "extreme_localization";
  v.statistic = sups.back();
  v.target = 0.0;
  v.tolerance = tolerance;
  v.passed = decreasing && sups.back() <= tolerance;
  v.replications = 1;
  v.seed = seed;
  v.details = {{"density", density_name}, {"n", n},      {"taus", taus}, {"sup_errors", sups},
               {"strictly_decreasing", decreasing}, {"grid_points", grid.size()}, {"lambda1", constants.lambda1}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

ValidationVerdict check_clt_variance(const std::string& density_name, double x, std::size_t n, double tau_exponent,
                                     std::size_t reps, std::uint64_t seed, const GeometryConstants& constants,
                                     double rel_tolerance) {
  const auto t0 = Clock::now();
  const auto d = line_density(density_name);
  const double p = 1.0;
  if (!(tau_exponent > 0.0 && tau_exponent < 1.0 / (3.0 * p))) {
    throw std::invalid_argument("check_clt_variance: exponent must lie in (0, 1/(3p)) so that sqrt(n) tau^{3p/2} grows");
  }
  if (!(constants.spec == RegionSpec::lens(1))) throw std::invalid_argument("check_clt_variance: lens constants for p = 1 required");
  if (!(constants.lambda1_star_sq > 0.0)) throw std::invalid_argument("check_clt_variance: lambda1*^2 missing");
  if (reps < 8 || n < 2) throw std::invalid_argument("check_clt_variance: need reps >= 8 and n >= 2");

  const double tau = std::pow(static_cast<double>(n), -tau_exponent);
  const double lld = population_lld_1d(d.to_density_fn(), x, tau);
  const double f_tau = std::sqrt(lld / constants.lambda1) / tau;
  const double scale = std::sqrt(static_cast<double>(n)) * std::sqrt(tau);

  std::vector<double> stats(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto data = sample(d, n, substream_seed(seed, r));
    DepthConfig cfg;
    cfg.spec = RegionSpec::lens(1);
    cfg.tau = tau;
    const double depth = sample_local_depth(data, Point{x}, cfg);
    stats[r] = scale * (std::sqrt(depth_to_density(depth, tau, constants)) - std::sqrt(f_tau));
  });
  const auto m = moments(stats);
  const auto ad = anderson_darling_normal(stats);
  const double target = constants.lambda1_star_sq / (4.0 * constants.lambda1 * constants.lambda1);

  ValidationVerdict v;
  v.check_name = "clt_variance";
  v.statistic = m.variance;
  v.target = target;
  v.tolerance = rel_tolerance * target;
  const bool variance_ok = std::abs(m.variance - target) <= v.tolerance;
  v.passed = variance_ok && ad.p_value > 0.001;
  v.replications = reps;
  v.seed = seed;
  v.details = {{"density", density_name}, {"x", x},
               {"n", n},                  {"tau", tau},
               {"tau_exponent", tau_exponent}, {"f_tau", f_tau},
               {"mean", m.mean},          {"variance_ok", variance_ok},
               {"anderson_darling_a2", ad.a2}, {"anderson_darling_p", ad.p_value},
               {"normality_level", 0.001}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

ValidationVerdict check_symmetry_stationary(const MixtureModel& mixture, double tau, std::uint64_t seed,
                                            double tolerance) {
  const auto t0 = Clock::now();
  require_1d_mixture(mixture);
  if (mixture.components() != 2) throw std::invalid_argument("check_symmetry_stationary: two components required");
  if (!(tau > 0.0) || tau == kInf) throw std::invalid_argument("check_symmetry_stationary: tau must be positive");
  const double center = 0.5 * (mixture.means()[0][0] + mixture.means()[1][0]);
  const bool symmetric = std::abs(mixture.weights()[0] - mixture.weights()[1]) < 1e-12 &&
                         std::abs(mixture.covariances()[0](0, 0) - mixture.covariances()[1](0, 0)) < 1e-12;
  QuadratureConfig quad;
  quad.abs_tol = 1e-13;
  quad.rel_tol = 1e-12;
  const auto f = AnalyticDensity::mixture(mixture).to_density_fn();
  const double grad = population_f_tau_grad_1d(f, center, tau, tau / 100.0, quad);

  ValidationVerdict v;
  v.check_name = "symmetry_stationary";
  v.statistic = std::abs(grad);
  v.target = 0.0;
  v.tolerance = tolerance;
  v.passed = std::abs(grad) < tolerance;
  v.expected_fail = !symmetric;
  v.replications = 1;
  v.seed = seed;
  v.details = {{"center", center}, {"tau", tau}, {"gradient", grad}, {"symmetric", symmetric}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

ValidationVerdict check_mode_bracket(const MixtureModel& mixture, const std::vector<double>& taus,
                                     std::uint64_t seed) {
  const auto t0 = Clock::now();
  require_1d_mixture(mixture);
  if (taus.empty()) throw std::invalid_argument("check_mode_bracket: empty tau ladder");
  for (double t : taus)
    if (!(t > 0.0) || t == kInf) throw std::invalid_argument("check_mode_bracket: taus must be positive");

  const auto density = AnalyticDensity::mixture(mixture);
  GradientFlowConfig flow;
  ModeSet found(flow.merge_radius);
  for (const auto& mu : mixture.means()) {
    const auto r = gradient_flow(density, mu, flow);
    if (r.status == FlowStatus::Converged) found.label(r.terminal);
  }
  std::vector<double> modes;
  for (const auto& m : found.modes()) modes.push_back(m[0]);
  std::sort(modes.begin(), modes.end());

  const auto f = density.to_density_fn();
  QuadratureConfig quad;
  quad.abs_tol = 1e-12;
  quad.rel_tol = 1e-11;
  nlohmann::json rows = nlohmann::json::array();
  double worst = 0.0;
  bool all_inside = true;
  for (double tau : taus) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const double m = modes[i];
      double lo = m - 2.0 * tau, hi = m + 2.0 * tau;
      if (i > 0) lo = std::max(lo, 0.5 * (modes[i - 1] + m));
      if (i + 1 < modes.size()) hi = std::min(hi, 0.5 * (m + modes[i + 1]));
      const auto best = boost::math::tools::brent_find_minima(
          [&](double t) { return -population_f_tau_1d(f, t, tau, quad); }, lo, hi, 40);
      const double m_tau = best.first;
      const double ratio = std::abs(m_tau - m) / tau;
      const bool inside = ratio < 1.0;
      all_inside = all_inside && inside;
      worst = std::max(worst, ratio);
      rows.push_back({{"tau", tau}, {"mode", m}, {"maximizer", m_tau}, {"inside", inside}});
    }
  }

  ValidationVerdict v;
  v.check_name = "mode_bracket";
  v.statistic = worst;
  v.target = 0.0;
  v.tolerance = 1.0;
  v.passed = all_inside && !modes.empty();
  v.replications = 1;
  v.seed = seed;
  v.details = {{"comparator", "max |m_tau - m| / tau < 1"}, {"modes", modes}, {"ladder", rows}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

ValidationVerdict check_level_sets(const std::string& density_name, double alpha, const std::vector<double>& taus,
                                   const std::vector<std::size_t>& ns, std::size_t grid_per_axis,
                                   std::uint64_t seed, std::size_t reps, double min_agreement) {
  const auto t0 = Clock::now();
  if (!(alpha > 0.0)) throw std::invalid_argument("check_level_sets: alpha must be positive");
  if (taus.empty() || taus.size() != ns.size()) throw std::invalid_argument("check_level_sets: ladder lengths differ");
  if (grid_per_axis < 1) throw std::invalid_argument("check_level_sets: empty grid");
  if (reps < 1) throw std::invalid_argument("check_level_sets: reps must be >= 1");
  const auto d = named_density(density_name);
  if (d.dim() > 2) throw std::invalid_argument("check_level_sets: p must be 1 or 2");

  const auto [lo, hi] = plot_box(d);
  const std::size_t p = d.dim();
  const std::size_t points = p == 1 ? grid_per_axis : grid_per_axis * grid_per_axis;
  Dataset grid(points, p);
  auto coord = [&](std::size_t k, std::size_t i) {
    return grid_per_axis == 1 ? 0.5 * (lo[k] + hi[k])
                              : lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / static_cast<double>(grid_per_axis - 1);
  };
  for (std::size_t g = 0; g < points; ++g) {
    grid.row(g)[0] = coord(0, g % grid_per_axis);
    if (p == 2) grid.row(g)[1] = coord(1, g / grid_per_axis);
  }
  std::vector<char> truth(points);
  for (std::size_t g = 0; g < points; ++g) truth[g] = d(grid.row(g)) >= alpha;

  const auto constants = lens_lambda1(p, seed);
  std::vector<double> agreement;
  nlohmann::json per_rep = nlohmann::json::array();
  for (std::size_t step = 0; step < taus.size(); ++step) {
    std::vector<double> fractions(reps);
    parallel_for(reps, [&](std::size_t r) {
      const auto data = sample(d, ns[step], substream_seed(seed, step * reps + r));
      DepthConfig cfg;
      cfg.spec = RegionSpec::lens(p);
      cfg.tau = taus[step];
      cfg.seed = seed;
      const auto est = tau_approximation(data, grid, cfg, constants);
      std::size_t same = 0;
      for (std::size_t g = 0; g < points; ++g) same += (est[g] >= alpha) == static_cast<bool>(truth[g]);
      fractions[r] = static_cast<double>(same) / static_cast<double>(points);
    });
    agreement.push_back(std::accumulate(fractions.begin(), fractions.end(), 0.0) / static_cast<double>(reps));
    per_rep.push_back(fractions);
  }
  bool nondecreasing = true;
  for (std::size_t i = 1; i < agreement.size(); ++i) nondecreasing = nondecreasing && agreement[i] >= agreement[i - 1];

  ValidationVerdict v;
  v.check_name = "level_sets";
  v.statistic = agreement.back();
  v.target = 1.0;
  v.tolerance = 1.0 - min_agreement;
  v.passed = nondecreasing && agreement.back() >= min_agreement;
  v.replications = reps;
  v.seed = seed;
  v.details = {{"density", density_name}, {"alpha", alpha},           {"taus", taus},
               {"ns", ns},                {"agreement", agreement},   {"nondecreasing", nondecreasing},
               {"grid_per_axis", grid_per_axis}, {"box_lower", lo}, {"box_upper", hi},
               {"agreement_per_rep", per_rep}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

namespace {

std::vector<double> replicate_lld(const AnalyticDensity& d, double x, double tau, std::size_t n, std::size_t reps,
                                  std::uint64_t seed) {
  std::vector<double> out(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto data = sample(d, n, substream_seed(seed, r));
    DepthConfig cfg;
    cfg.spec = RegionSpec::lens(1);
    cfg.tau = tau;
    out[r] = sample_local_depth(data, Point{x}, cfg);
  });
  return out;
}

}  // namespace

ValidationVerdict check_unbiasedness_and_variance(const std::string& density_name, double x, double tau,
                                                  std::size_t n, std::size_t reps, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto d = line_density(density_name);
  if (n < 2 || reps < 8) throw std::invalid_argument("check_unbiasedness_and_variance: need n >= 2 and reps >= 8");
  if (!(tau > 0.0)) throw std::invalid_argument("check_unbiasedness_and_variance: tau must be positive");
  const auto f = d.to_density_fn();
  const double lld = population_lld_1d(f, x, tau);
  const double a2 = population_a_squared(lld);
  const double b2 = population_b_squared_1d(f, x, tau);
  const double var_exact = sample_depth_variance(n, a2, b2);

  const auto values = replicate_lld(d, x, tau, n, reps, seed);
  const auto m = moments(values);
  const double r = static_cast<double>(reps);
  const double mean_se = std::sqrt(m.variance / r);
  const double var_se = std::sqrt(std::max(0.0, (m.m4 - m.variance * m.variance * (r - 3.0) / (r - 1.0)) / r));
  const bool mean_ok = std::abs(m.mean - lld) <= 3.0 * mean_se;
  const bool var_ok = std::abs(m.variance - var_exact) <= 5.0 * var_se;

  ValidationVerdict v;
  v.check_name = "unbiasedness_and_variance";
  v.statistic = m.variance;
  v.target = var_exact;
  v.tolerance = 5.0 * var_se;
  v.passed = mean_ok && var_ok;
  v.replications = reps;
  v.seed = seed;
  v.details = {{"density", density_name}, {"x", x},         {"tau", tau},           {"n", n},
               {"mean", m.mean},          {"lld", lld},     {"mean_se", mean_se},   {"mean_ok", mean_ok},
               {"a2", a2},                {"b2", b2},       {"variance_se", var_se}, {"variance_ok", var_ok}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

ValidationVerdict check_depth_normality(const std::string& density_name, double x, double tau, std::size_t n,
                                        std::size_t reps, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto d = line_density(density_name);
  const auto f = d.to_density_fn();
  const double lld = population_lld_1d(f, x, tau);
  const double b = std::sqrt(population_b_squared_1d(f, x, tau));
  if (!(b > 0.0)) throw std::invalid_argument("check_depth_normality: degenerate kernel projection (b = 0)");
  auto values = replicate_lld(d, x, tau, n, reps, seed);
  for (auto& v : values) v = std::sqrt(static_cast<double>(n)) * (v - lld) / (2.0 * b);
  const auto ad = anderson_darling_normal(values);
  const auto m = moments(values);

  ValidationVerdict v;
  v.check_name = "depth_normality";
  v.statistic = ad.p_value;
  v.target = 1.0;
  v.tolerance = 1.0 - 0.001;
  v.passed = ad.p_value > 0.001;
  v.replications = reps;
  v.seed = seed;
  v.details = {{"density", density_name}, {"x", x}, {"tau", tau}, {"n", n}, {"a2", ad.a2},
               {"mean", m.mean}, {"variance", m.variance}};
  v.runtime_seconds = seconds_since(t0);
  return v;
}

}  // namespace ldepth
