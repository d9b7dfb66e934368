#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldepth/models.hpp"

namespace ldepth {

/// Outcome of one seeded statistical check.
struct ValidationVerdict {
  std::string check_name;
  double statistic = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Negative controls: the check is expected to fail, and the suite is fine when it does.
  bool expected_fail = false;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  /// Ladders, secondary statistics and resolved parameters.
  nlohmann::json details = nlohmann::json::object();

  /// True when the outcome is the intended one.
  bool ok() const { return passed != expected_fail; }
  nlohmann::json to_json() const;
};

void write_jsonl(std::ostream& out, const std::vector<ValidationVerdict>& verdicts);
/// 0 when every verdict is ok(), 3 otherwise.
int exit_code(const std::vector<ValidationVerdict>& verdicts);

struct AndersonDarling {
  double a2 = 0.0;
  /// Small-sample modification A2 (1 + 0.75/n + 2.25/n^2).
  double a2_star = 0.0;
  double p_value = 1.0;
};

/// Normality test with mean and variance estimated from the data.
AndersonDarling anderson_darling_normal(std::vector<double> values);

/// Upper-tail probability of a chi-square variable with df degrees of freedom.
double chi_square_sf(double statistic, double df);

/// Sup over the grid of |f_{tau,n} - f| for each tau of the ladder, with one
/// sample of size n. Passes when the sup strictly decreases along the ladder
/// and the last one is at most tolerance.
ValidationVerdict check_extreme_localization(const std::string& density_name, const Dataset& grid,
                                             const std::vector<double>& taus, std::size_t n, std::uint64_t seed,
                                             double tolerance);

/// Variance of sqrt(n) tau^{p/2} (sqrt f_{tau,n}(x) - sqrt f_tau(x)) over
/// replications with tau = n^{-exponent}, against the limit
/// lambda1*^2 / (4 lambda1^2) within rel_tolerance, plus an Anderson-Darling
/// check at level 0.001. Lens family on the line.
ValidationVerdict check_clt_variance(const std::string& density_name, double x, std::size_t n, double tau_exponent,
                                     std::size_t reps, std::uint64_t seed, const GeometryConstants& constants,
                                     double rel_tolerance = 0.25);

/// |f_tau'(center)| for a two-component mixture on the line. Unequal weights or
/// scales make the check a negative control.
ValidationVerdict check_symmetry_stationary(const MixtureModel& mixture, double tau, std::uint64_t seed,
                                            double tolerance = 1e-6);

/// Locates the maximizer of the population f_tau near each mode of a mixture on
/// the line for every tau, and passes when each lies strictly within tau of the mode.
ValidationVerdict check_mode_bracket(const MixtureModel& mixture, const std::vector<double>& taus,
                                     std::uint64_t seed);

/// Grid agreement between {f_{tau,n} >= alpha} and {f >= alpha} along the
/// zipped (tau, n) ladder, averaged over reps samples per rung. Passes when
/// the mean agreement never drops and ends at or above min_agreement.
ValidationVerdict check_level_sets(const std::string& density_name, double alpha, const std::vector<double>& taus,
                                   const std::vector<std::size_t>& ns, std::size_t grid_per_axis,
                                   std::uint64_t seed, std::size_t reps = 20, double min_agreement = 0.95);

/// Mean of LLD_n(x, tau) within 3 SE of the population value, and its variance
/// within 5 SE of [a^2 + 2(n-2) b^2] / C(n, 2). Lens family on the line.
ValidationVerdict check_unbiasedness_and_variance(const std::string& density_name, double x, double tau,
                                                  std::size_t n, std::size_t reps, std::uint64_t seed);

/// Anderson-Darling normality of sqrt(n) (LLD_n - LLD) / (2 b) over replications.
ValidationVerdict check_depth_normality(const std::string& density_name, double x, double tau, std::size_t n,
                                        std::size_t reps, std::uint64_t seed);

}  // namespace ldepth
