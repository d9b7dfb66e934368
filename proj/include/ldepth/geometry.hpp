#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ldepth/common.hpp"

namespace ldepth {

enum class Family { Lens, Spherical, BetaSkeleton, Simplicial, HalfspaceCube, HalfRegionCubes };

std::string to_string(Family f);
Family family_from_string(std::string_view name);

/// Which localized region Z_tau(x) a depth is built on.
struct RegionSpec {
  Family family = Family::Lens;
  double beta = 2.0;  // only read for BetaSkeleton
  std::size_t dim = 1;

  static RegionSpec lens(std::size_t p) { return {Family::Lens, 2.0, p}; }
  static RegionSpec spherical(std::size_t p) { return {Family::Spherical, 1.0, p}; }
  static RegionSpec beta_skeleton(double beta, std::size_t p) { return {Family::BetaSkeleton, beta, p}; }
  static RegionSpec simplicial(std::size_t p) { return {Family::Simplicial, 2.0, p}; }
  static RegionSpec halfspace_cube(std::size_t p) { return {Family::HalfspaceCube, 2.0, p}; }
  static RegionSpec half_region(std::size_t p) { return {Family::HalfRegionCubes, 2.0, p}; }

  /// Number of sample points in one tuple of the underlying U-statistic.
  std::size_t arity() const;
  /// Every tuple member of a region containing x lies within radius_factor() * tau of x.
  double radius_factor() const;
  bool is_pair_family() const;
  bool is_cube_family() const;
  /// Short label used in tables ("LLD", "LSD", "LK1.5D", ...).
  std::string label() const;

  void validate() const;

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

enum class Orthant { Lower, Upper };

/// Extra data some families need: the direction u for HalfspaceCube, the
/// orthant for HalfRegionCubes.
struct RegionAux {
  std::optional<Point> direction;
  std::optional<Orthant> orthant;
};

/// Checked membership test: true iff the tuple lies in the closed set Z_tau(x).
/// tau may be +infinity for all families except HalfspaceCube.
bool membership(const RegionSpec& spec, ConstPointRef x, const std::vector<Point>& tuple, double tau,
                const RegionAux& aux = {});

/// Barycentric containment with tolerance; degenerate simplices contain nothing.
bool simplex_contains(const std::vector<Point>& vertices, ConstPointRef x, double tol = 1e-12);

inline constexpr double kBarycentricTol = 1e-12;

/// Unchecked predicates shared by estimators and oracles. Callers guarantee
/// arity and dimensions.
namespace region {

bool skeleton(double beta, ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau);
bool lens(ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau);
bool spherical(ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau);
bool simplex_contains(std::span<const double* const> vertices, std::size_t p, const double* x,
                      double tol = kBarycentricTol);
bool simplicial(std::span<const double* const> vertices, std::size_t p, const double* x, double tau);
bool halfspace_cube(ConstPointRef x, ConstPointRef y, ConstPointRef u, double tau);
bool half_region(ConstPointRef x, ConstPointRef y, Orthant side, double tau);

/// Pair predicate for the arity-2 families selected by spec.
bool pair(const RegionSpec& spec, ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau);

}  // namespace region

}  // namespace ldepth
