#pragma once

#include <cstdint>
#include <optional>

#include "ldepth/constants.hpp"
#include "ldepth/geometry.hpp"

namespace ldepth {

inline constexpr std::uint64_t kDefaultSimplexBudget = 1'000'000;

struct DepthConfig {
  RegionSpec spec;
  double tau = kInf;
  /// Simplicial only: tuples are enumerated exactly while their count stays
  /// within this budget, otherwise this many tuples are sampled. nullopt forces
  /// exact enumeration.
  std::optional<std::uint64_t> simplex_budget = kDefaultSimplexBudget;
  /// HalfspaceCube only; 0 selects 100 * p.
  std::size_t direction_count = 0;
  std::uint64_t seed = 0;
  /// Restrict tuple enumeration to points that can belong to a region around
  /// the query. Gives the same integer hit count as the full loop.
  bool prune = true;
};

enum class EstimatorKind { Exact, Subsampled };

struct DepthResult {
  std::vector<double> values;
  EstimatorKind estimator_kind = EstimatorKind::Exact;
  std::uint64_t tuples_used = 0;
};

/// Sample local depth LGD_n(x, tau) for every query.
DepthResult sample_local_depth(const Dataset& data, const Dataset& queries, const DepthConfig& cfg);
double sample_local_depth(const Dataset& data, ConstPointRef query, const DepthConfig& cfg);

/// Nearest-rank quantile (index max(1, ceil(q m))) of the m pairwise distances,
/// or of the simplex diameters for the simplicial family.
double tau_from_quantile(const Dataset& data, double q, const RegionSpec& spec,
                         std::uint64_t budget = kDefaultSimplexBudget, std::uint64_t seed = 0);

/// Power applied to the depth before differencing or rescaling: 1/arity for the
/// tuple families, 1 for the hypercube families.
double depth_root(const RegionSpec& spec);

/// Rescales depth values into the sample tau-approximation f_{tau,n}.
double depth_to_density(double depth, double tau, const GeometryConstants& constants);

std::vector<double> tau_approximation(const Dataset& data, const Dataset& queries, const DepthConfig& cfg,
                                      const GeometryConstants& constants);

/// d_{tau,n}(x; y): difference of rooted depths over the step length.
/// `precomputed` supplies (depth at x, depth at y) when already known.
double finite_difference(const Dataset& data, ConstPointRef x, ConstPointRef y, const DepthConfig& cfg,
                         std::optional<std::pair<double, double>> precomputed = std::nullopt);

/// Same difference from known depth values.
double finite_difference_from_depths(const RegionSpec& spec, double depth_x, double depth_y, double step);

/// Number of k-subsets of an n-set, as a double (exact below 2^53).
double binomial(std::uint64_t n, std::uint64_t k);

}  // namespace ldepth
