#include "ldepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace ldepth {

std::string to_string(Family f) {
  switch (f) {
    case Family::Lens: return "lens";
    case Family::Spherical: return "spherical";
    case Family::BetaSkeleton: return "beta";
    case Family::Simplicial: return "simplicial";
    case Family::HalfspaceCube: return "halfspace";
    case Family::HalfRegionCubes: return "halfregion";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "lens" || name == "LLD") return Family::Lens;
  if (name == "spherical" || name == "LBD") return Family::Spherical;
  if (name == "beta" || name == "beta-skeleton" || name == "LKD") return Family::BetaSkeleton;
  if (name == "simplicial" || name == "LSD") return Family::Simplicial;
  if (name == "halfspace" || name == "LHD") return Family::HalfspaceCube;
  if (name == "halfregion" || name == "LRD") return Family::HalfRegionCubes;
  throw std::invalid_argument("unknown depth family '" + std::string(name) + "'");
}

std::size_t RegionSpec::arity() const {
  switch (family) {
    case Family::Lens:
    case Family::Spherical:
    case Family::BetaSkeleton: return 2;
    case Family::Simplicial: return dim + 1;
    case Family::HalfspaceCube:
    case Family::HalfRegionCubes: return 1;
  }
  return 0;
}

double RegionSpec::radius_factor() const {
  switch (family) {
    case Family::BetaSkeleton: return std::max(1.0, beta);
    case Family::HalfspaceCube:
    case Family::HalfRegionCubes: return std::sqrt(static_cast<double>(dim));
    default: return 1.0;
  }
}

bool RegionSpec::is_pair_family() const {
  return family == Family::Lens || family == Family::Spherical || family == Family::BetaSkeleton;
}

bool RegionSpec::is_cube_family() const {
  return family == Family::HalfspaceCube || family == Family::HalfRegionCubes;
}

std::string RegionSpec::label() const {
  switch (family) {
    case Family::Lens: return "LLD";
    case Family::Spherical: return "LBD";
    case Family::BetaSkeleton: {
      std::ostringstream os;
      os << "LK" << beta << "D";
      return os.str();
    }
    case Family::Simplicial: return "LSD";
    case Family::HalfspaceCube: return "LHD";
    case Family::HalfRegionCubes: return "LRD";
  }
  return "L?D";
}

void RegionSpec::validate() const {
  if (dim == 0) throw std::invalid_argument("RegionSpec: dimension must be positive");
  if (family == Family::BetaSkeleton && !(beta >= 1.0 && std::isfinite(beta))) {
    throw std::invalid_argument("RegionSpec: beta-skeleton requires finite beta >= 1");
  }
}

namespace region {

bool skeleton(double beta, ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau) {
  const double d = distance(a, b);
  if (d > tau) return false;
  const double c = 2.0 / beta - 1.0;
  const double s = 2.0 / beta;
  double ea = 0.0;
  double eb = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double va = (a[k] + c * b[k]) - s * x[k];
    const double vb = (b[k] + c * a[k]) - s * x[k];
    ea += va * va;
    eb += vb * vb;
  }
  return std::sqrt(ea) <= d && std::sqrt(eb) <= d;
}

bool lens(ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau) {
  const double d = distance(a, b);
  return d <= tau && distance(x, a) <= d && distance(x, b) <= d;
}

bool spherical(ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau) {
  const double d = distance(a, b);
  if (d > tau) return false;
  double e = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = 2.0 * x[k] - (a[k] + b[k]);
    e += v * v;
  }
  return std::sqrt(e) <= d;
}

bool pair(const RegionSpec& spec, ConstPointRef x, ConstPointRef a, ConstPointRef b, double tau) {
  switch (spec.family) {
    case Family::Lens: return lens(x, a, b, tau);
    case Family::Spherical: return spherical(x, a, b, tau);
    case Family::BetaSkeleton: return skeleton(spec.beta, x, a, b, tau);
    default: throw std::logic_error("region::pair called for a non-pair family");
  }
}

bool simplex_contains(std::span<const double* const> vertices, std::size_t p, const double* x, double tol) {
  const double* v0 = vertices[0];
  if (p == 1) {
    const double len = vertices[1][0] - v0[0];
    if (len == 0.0) return false;
    const double mu = (x[0] - v0[0]) / len;
    return mu >= -tol && 1.0 - mu >= -tol;
  }
  if (p == 2) {
    const double* v1 = vertices[1];
    const double* v2 = vertices[2];
    const double e00 = v1[0] - v0[0], e01 = v2[0] - v0[0];
    const double e10 = v1[1] - v0[1], e11 = v2[1] - v0[1];
    const double det = e00 * e11 - e01 * e10;
    const double scale = std::max({std::abs(e00), std::abs(e01), std::abs(e10), std::abs(e11)});
    if (!(std::abs(det) > 1e-12 * scale * scale)) return false;
    const double r0 = x[0] - v0[0], r1 = x[1] - v0[1];
    const double mu1 = (r0 * e11 - e01 * r1) / det;
    const double mu2 = (e00 * r1 - r0 * e10) / det;
    return mu1 >= -tol && mu2 >= -tol && 1.0 - mu1 - mu2 >= -tol;
  }
  Eigen::MatrixXd edges(p, p);
  Eigen::VectorXd rhs(p);
  double scale = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      edges(k, j) = vertices[j + 1][k] - v0[k];
      scale = std::max(scale, std::abs(edges(k, j)));
    }
    rhs(j) = x[j] - v0[j];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(edges);
  const double det = lu.determinant();
  if (!(std::abs(det) > 1e-12 * std::pow(scale, static_cast<double>(p)))) return false;
  const Eigen::VectorXd mu = lu.solve(rhs);
  double rest = 1.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (mu(j) < -tol) return false;
    rest -= mu(j);
  }
  return rest >= -tol;
}

bool simplicial(std::span<const double* const> vertices, std::size_t p, const double* x, double tau) {
  if (tau != kInf) {
    const double tau2 = tau * tau;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (squared_distance({vertices[i], p}, {vertices[j], p}) > tau2) {
          // Re-check with the rooted norm so the boundary matches max-distance <= tau exactly.
          if (distance({vertices[i], p}, {vertices[j], p}) > tau) return false;
        }
      }
    }
  }
  return simplex_contains(vertices, p, x, kBarycentricTol);
}

bool halfspace_cube(ConstPointRef x, ConstPointRef y, ConstPointRef u, double tau) {
  const double half = 0.5 * tau;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::abs(x[k] + half * u[k] - y[k]) > half) return false;
  }
  return true;
}

bool half_region(ConstPointRef x, ConstPointRef y, Orthant side, double tau) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = y[k] - x[k];
    if (side == Orthant::Lower) {
      if (d > 0.0 || d < -tau) return false;
    } else {
      if (d < 0.0 || d > tau) return false;
    }
  }
  return true;
}

}  // namespace region

bool simplex_contains(const std::vector<Point>& vertices, ConstPointRef x, double tol) {
  const std::size_t p = x.size();
  if (vertices.size() != p + 1) {
    throw std::invalid_argument("simplex_contains: need p+1 vertices");
  }
  std::vector<const double*> ptrs;
  for (const auto& v : vertices) {
    if (v.size() != p) throw std::invalid_argument("simplex_contains: vertex dimension mismatch");
    ptrs.push_back(v.data());
  }
  return region::simplex_contains(ptrs, p, x.data(), tol);
}

bool membership(const RegionSpec& spec, ConstPointRef x, const std::vector<Point>& tuple, double tau,
                const RegionAux& aux) {
  spec.validate();
  if (std::isnan(tau) || tau < 0.0) throw std::invalid_argument("membership: tau must be >= 0");
  if (x.size() != spec.dim) throw std::invalid_argument("membership: query dimension mismatch");
  if (!all_finite(x)) throw std::invalid_argument("membership: non-finite query coordinate");
  if (tuple.size() != spec.arity()) {
    throw std::invalid_argument("membership: tuple arity " + std::to_string(tuple.size()) +
                                " does not match " + std::to_string(spec.arity()));
  }
  for (const auto& t : tuple) {
    if (t.size() != spec.dim) throw std::invalid_argument("membership: tuple dimension mismatch");
    if (!all_finite(t)) throw std::invalid_argument("membership: non-finite tuple coordinate");
  }
  const bool wants_direction = spec.family == Family::HalfspaceCube;
  if (wants_direction != aux.direction.has_value()) {
    throw std::invalid_argument("membership: a direction u is required for, and only for, HalfspaceCube");
  }

  switch (spec.family) {
    case Family::Lens:
    case Family::Spherical:
    case Family::BetaSkeleton: return region::pair(spec, x, tuple[0], tuple[1], tau);
    case Family::Simplicial: {
      std::vector<const double*> ptrs;
      for (const auto& t : tuple) ptrs.push_back(t.data());
      return region::simplicial(ptrs, spec.dim, x.data(), tau);
    }
    case Family::HalfspaceCube: {
      const Point& u = *aux.direction;
      if (u.size() != spec.dim || std::abs(norm(u) - 1.0) > 1e-12) {
        throw std::invalid_argument("membership: direction u must be a unit vector of dimension p");
      }
      if (tau == kInf) throw std::invalid_argument("membership: HalfspaceCube requires finite tau");
      return region::halfspace_cube(x, tuple[0], u, tau);
    }
    case Family::HalfRegionCubes: {
      if (!aux.orthant) throw std::invalid_argument("membership: HalfRegionCubes requires an orthant");
      return region::half_region(x, tuple[0], *aux.orthant, tau);
    }
  }
  return false;
}

}  // namespace ldepth
