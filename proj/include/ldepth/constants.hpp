#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ldepth/geometry.hpp"

namespace ldepth {

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

struct ConstantsBudget {
  std::uint64_t n_samples = 10'000'000;  // lambda1
  std::uint64_t n_outer = 100'000;       // lambda1*^2
  std::uint64_t n_inner = 10'000;
};

/// Lebesgue measure of the unit region Z_1(0) and the integral of its squared
/// sections, with their Monte-Carlo standard errors.
struct GeometryConstants {
  RegionSpec spec;
  double lambda1 = 1.0;
  double lambda1_se = 0.0;
  double lambda1_star_sq = 0.0;
  double lambda1_star_sq_se = 0.0;
  ConstantsBudget budget;
  std::uint64_t seed = 0;
};

/// Exact value of lambda1 where one is known: every skeleton/simplicial family
/// has lambda1 = 1 for p = 1 and the hypercube families have lambda1 = 1 in any
/// dimension.
std::optional<double> analytic_lambda1(const RegionSpec& spec);

/// Hit-or-miss estimate over the smallest centered ball containing Z_1(0).
/// Cube families return (1, 0) without sampling.
McEstimate estimate_lambda1(const RegionSpec& spec, std::uint64_t n_samples, std::uint64_t seed);

/// Nested estimate: outer draws of the first tuple member, each paired with two
/// independent inner estimates of the section measure whose product is unbiased
/// for the squared section measure.
McEstimate estimate_lambda1_star_sq(const RegionSpec& spec, std::uint64_t n_outer, std::uint64_t n_inner,
                                    std::uint64_t seed);

/// Radius of the centered ball (in R^{p*arity}) used as the lambda1 sampling envelope.
double lambda1_envelope_radius(const RegionSpec& spec);

GeometryConstants compute_constants(const RegionSpec& spec, const ConstantsBudget& budget, std::uint64_t seed);

/// Constants with lambda1 taken from analytic_lambda1 when available (the
/// section integral is left at 0); used where only lambda1 matters.
GeometryConstants lambda1_only(const RegionSpec& spec, std::uint64_t n_samples, std::uint64_t seed);

/// JSON-file cache keyed by (family, beta, p, budgets, seed).
class ConstantsCache {
public:
  explicit ConstantsCache(std::string path);

  std::optional<GeometryConstants> find(const RegionSpec& spec, const ConstantsBudget& budget,
                                        std::uint64_t seed) const;
  void store(const GeometryConstants& c);
  /// Returns the cached entry or computes, stores and saves a new one.
  GeometryConstants get_or_compute(const RegionSpec& spec, const ConstantsBudget& budget, std::uint64_t seed);

  void save() const;
  std::size_t size() const { return entries_.size(); }

private:
  std::string path_;
  std::vector<GeometryConstants> entries_;
};

}  // namespace ldepth
