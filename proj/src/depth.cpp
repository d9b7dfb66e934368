#include "ldepth/depth.hpp"

#include <algorithm>
#include <cmath>

namespace ldepth {

double binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

double depth_root(const RegionSpec& spec) {
  return spec.is_cube_family() ? 1.0 : 1.0 / static_cast<double>(spec.arity());
}

namespace {

void check_inputs(const Dataset& data, const DepthConfig& cfg, std::size_t query_dim) {
  cfg.spec.validate();
  if (std::isnan(cfg.tau) || cfg.tau < 0.0) throw std::invalid_argument("local depth: tau must be >= 0");
  if (data.dim() != cfg.spec.dim) throw std::invalid_argument("local depth: data dimension does not match spec");
  if (query_dim != cfg.spec.dim) throw std::invalid_argument("local depth: query dimension does not match spec");
  if (data.size() < cfg.spec.arity()) {
    throw std::invalid_argument("local depth: need at least " + std::to_string(cfg.spec.arity()) +
                                " data points, got " + std::to_string(data.size()));
  }
  if (cfg.spec.family == Family::HalfspaceCube && cfg.tau == kInf) {
    throw std::invalid_argument("local depth: HalfspaceCube requires finite tau");
  }
}

std::vector<std::size_t> candidate_points(const Dataset& data, ConstPointRef x, const DepthConfig& cfg) {
  std::vector<std::size_t> idx;
  idx.reserve(data.size());
  if (!cfg.prune || cfg.tau == kInf) {
    for (std::size_t i = 0; i < data.size(); ++i) idx.push_back(i);
    return idx;
  }
  // Slightly widened so that rounding in the region predicates can never be
  // excluded by this filter.
  const double reach = cfg.spec.radius_factor() * cfg.tau * (1.0 + 1e-9) + 1e-300;
  const double reach2 = reach * reach;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (squared_distance(x, data.row(i)) <= reach2) idx.push_back(i);
  }
  return idx;
}

struct QueryDepth {
  double value = 0.0;
  bool subsampled = false;
  std::uint64_t tuples = 0;
};

QueryDepth pair_depth(const Dataset& data, ConstPointRef x, const DepthConfig& cfg) {
  const auto idx = candidate_points(data, x, cfg);
  std::uint64_t hits = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto pa = data.row(idx[a]);
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      if (region::pair(cfg.spec, x, pa, data.row(idx[b]), cfg.tau)) ++hits;
    }
  }
  const double total = binomial(data.size(), 2);
  return {static_cast<double>(hits) / total, false, static_cast<std::uint64_t>(total)};
}

// Depth-first enumeration of index tuples whose pairwise distances stay within tau.
class SimplexCounter {
public:
  SimplexCounter(const Dataset& data, const std::vector<std::size_t>& idx, ConstPointRef x, double tau)
      : data_(data), idx_(idx), x_(x), tau_(tau), k_(data.dim() + 1), chosen_(k_), ptrs_(k_) {}

  std::uint64_t count() {
    hits_ = 0;
    recurse(0, 0);
    return hits_;
  }

private:
  void recurse(std::size_t depth, std::size_t start) {
    const std::size_t p = data_.dim();
    if (depth == k_) {
      for (std::size_t i = 0; i < k_; ++i) ptrs_[i] = data_.row(chosen_[i]).data();
      if (region::simplex_contains(ptrs_, p, x_.data())) ++hits_;
      return;
    }
    for (std::size_t a = start; a + (k_ - depth) <= idx_.size(); ++a) {
      const std::size_t i = idx_[a];
      bool ok = true;
      if (tau_ != kInf) {
        for (std::size_t m = 0; m < depth && ok; ++m) {
          ok = distance(data_.row(i), data_.row(chosen_[m])) <= tau_;
        }
      }
      if (!ok) continue;
      chosen_[depth] = i;
      recurse(depth + 1, a + 1);
    }
  }

  const Dataset& data_;
  const std::vector<std::size_t>& idx_;
  ConstPointRef x_;
  double tau_;
  std::size_t k_;
  std::vector<std::size_t> chosen_;
  std::vector<const double*> ptrs_;
  std::uint64_t hits_ = 0;
};

// Draws k distinct positions out of m.
void draw_distinct(Rng& rng, std::size_t m, std::vector<std::size_t>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool fresh = false;
    while (!fresh) {
      out[i] = rng.index(m);
      fresh = std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(i), out[i]) ==
              out.begin() + static_cast<std::ptrdiff_t>(i);
    }
  }
}

QueryDepth simplicial_depth(const Dataset& data, ConstPointRef x, const DepthConfig& cfg, std::uint64_t stream) {
  const std::size_t p = data.dim();
  const std::size_t k = p + 1;
  const auto idx = candidate_points(data, x, cfg);
  const double total = binomial(data.size(), k);
  if (idx.size() < k) return {0.0, false, static_cast<std::uint64_t>(total)};

  const double local = binomial(idx.size(), k);
  if (!cfg.simplex_budget || local <= static_cast<double>(*cfg.simplex_budget)) {
    SimplexCounter counter(data, idx, x, cfg.tau);
    return {static_cast<double>(counter.count()) / total, false, static_cast<std::uint64_t>(total)};
  }

  // Uniform with-replacement draws among the k-subsets of the candidate set;
  // tuples outside it cannot contain x, so rescaling keeps the estimate unbiased.
  const std::uint64_t budget = *cfg.simplex_budget;
  Rng rng(cfg.seed, stream);
  std::vector<std::size_t> pick(k);
  std::vector<const double*> ptrs(k);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < budget; ++t) {
    draw_distinct(rng, idx.size(), pick);
    for (std::size_t i = 0; i < k; ++i) ptrs[i] = data.row(idx[pick[i]]).data();
    if (region::simplicial(ptrs, p, x.data(), cfg.tau)) ++hits;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(budget);
  return {std::min(1.0, frac * (local / total)), true, budget};
}

std::vector<Point> halfspace_directions(const DepthConfig& cfg) {
  const std::size_t p = cfg.spec.dim;
  if (p == 1) return {{1.0}, {-1.0}};
  const std::size_t count = cfg.direction_count == 0 ? 100 * p : cfg.direction_count;
  Rng rng(cfg.seed, 0xd1ec7104ULL);
  std::vector<Point> dirs(count, Point(p));
  for (auto& u : dirs) rng.on_sphere(u);
  return dirs;
}

QueryDepth cube_depth(const Dataset& data, ConstPointRef x, const DepthConfig& cfg,
                      const std::vector<Point>& directions) {
  const double n = static_cast<double>(data.size());
  const auto idx = candidate_points(data, x, cfg);
  if (cfg.spec.family == Family::HalfRegionCubes) {
    std::uint64_t lower = 0, upper = 0;
    for (auto i : idx) {
      if (region::half_region(x, data.row(i), Orthant::Lower, cfg.tau)) ++lower;
      if (region::half_region(x, data.row(i), Orthant::Upper, cfg.tau)) ++upper;
    }
    return {static_cast<double>(std::min(lower, upper)) / n, false, data.size()};
  }
  std::uint64_t best = data.size();
  for (const auto& u : directions) {
    std::uint64_t c = 0;
    for (auto i : idx) {
      if (region::halfspace_cube(x, data.row(i), u, cfg.tau)) ++c;
    }
    best = std::min(best, c);
  }
  return {static_cast<double>(best) / n, false, data.size()};
}

}  // namespace

DepthResult sample_local_depth(const Dataset& data, const Dataset& queries, const DepthConfig& cfg) {
  check_inputs(data, cfg, queries.empty() ? cfg.spec.dim : queries.dim());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (!all_finite(queries.row(q))) throw std::invalid_argument("local depth: non-finite query coordinate");
  }
  std::vector<QueryDepth> out(queries.size());
  std::vector<Point> directions;
  if (cfg.spec.family == Family::HalfspaceCube) directions = halfspace_directions(cfg);

  parallel_for(queries.size(), [&](std::size_t q) {
    const auto x = queries.row(q);
    switch (cfg.spec.family) {
      case Family::Lens:
      case Family::Spherical:
      case Family::BetaSkeleton: out[q] = pair_depth(data, x, cfg); break;
      case Family::Simplicial: out[q] = simplicial_depth(data, x, cfg, q); break;
      case Family::HalfspaceCube:
      case Family::HalfRegionCubes: out[q] = cube_depth(data, x, cfg, directions); break;
    }
  });

  DepthResult result;
  result.values.reserve(out.size());
  result.tuples_used = out.empty() ? 0 : out.front().tuples;
  for (const auto& d : out) {
    result.values.push_back(d.value);
    if (d.subsampled) result.estimator_kind = EstimatorKind::Subsampled;
    result.tuples_used = std::min(result.tuples_used, d.tuples);
  }
  return result;
}

double sample_local_depth(const Dataset& data, ConstPointRef query, const DepthConfig& cfg) {
  Dataset q(query.size(), std::vector<double>(query.begin(), query.end()));
  return sample_local_depth(data, q, cfg).values.front();
}

double tau_from_quantile(const Dataset& data, double q, const RegionSpec& spec, std::uint64_t budget,
                         std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("tau_from_quantile: q must lie in [0, 1]");
  spec.validate();
  const std::size_t n = data.size();
  std::vector<double> stats;
  if (spec.family == Family::Simplicial) {
    const std::size_t k = spec.dim + 1;
    if (n < k) throw std::invalid_argument("tau_from_quantile: no simplices (n < p + 1)");
    auto diameter = [&](const std::vector<std::size_t>& t) {
      double m = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) m = std::max(m, distance(data.row(t[i]), data.row(t[j])));
      }
      return m;
    };
    const double total = binomial(n, k);
    std::vector<std::size_t> t(k);
    if (total <= static_cast<double>(budget)) {
      stats.reserve(static_cast<std::size_t>(total));
      for (std::size_t i = 0; i < k; ++i) t[i] = i;
      while (true) {
        stats.push_back(diameter(t));
        std::size_t i = k;
        while (i > 0 && t[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++t[i - 1];
        for (std::size_t j = i; j < k; ++j) t[j] = t[j - 1] + 1;
      }
    } else {
      Rng rng(seed, 0x9a4e71ULL);
      stats.reserve(budget);
      for (std::uint64_t b = 0; b < budget; ++b) {
        draw_distinct(rng, n, t);
        stats.push_back(diameter(t));
      }
    }
  } else {
    if (n < 2) throw std::invalid_argument("tau_from_quantile: no pairwise distances (n < 2)");
    stats.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) stats.push_back(distance(data.row(i), data.row(j)));
    }
  }
  const std::size_t m = stats.size();
  const double raw = std::ceil(q * static_cast<double>(m) - 1e-9);
  const std::size_t rank = std::clamp<std::size_t>(raw < 1.0 ? 1 : static_cast<std::size_t>(raw), 1, m);
  std::nth_element(stats.begin(), stats.begin() + static_cast<std::ptrdiff_t>(rank - 1), stats.end());
  return stats[rank - 1];
}

double depth_to_density(double depth, double tau, const GeometryConstants& constants) {
  const auto& spec = constants.spec;
  const double root = depth_root(spec);
  const double scale = std::pow(tau, static_cast<double>(spec.dim)) * std::pow(constants.lambda1, root);
  return std::pow(depth, root) / scale;
}

std::vector<double> tau_approximation(const Dataset& data, const Dataset& queries, const DepthConfig& cfg,
                                      const GeometryConstants& constants) {
  if (!(cfg.tau > 0.0) || cfg.tau == kInf) {
    throw std::invalid_argument("tau_approximation: tau must be positive and finite");
  }
  if (!(constants.spec == cfg.spec)) {
    throw std::invalid_argument("tau_approximation: constants were computed for a different region");
  }
  const auto depth = sample_local_depth(data, queries, cfg);
  std::vector<double> out;
  out.reserve(depth.values.size());
  for (double d : depth.values) out.push_back(depth_to_density(d, cfg.tau, constants));
  return out;
}

double finite_difference_from_depths(const RegionSpec& spec, double depth_x, double depth_y, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference: y must differ from x");
  const double root = depth_root(spec);
  return (std::pow(depth_y, root) - std::pow(depth_x, root)) / step;
}

double finite_difference(const Dataset& data, ConstPointRef x, ConstPointRef y, const DepthConfig& cfg,
                         std::optional<std::pair<double, double>> precomputed) {
  if (x.size() != y.size()) throw std::invalid_argument("finite_difference: dimension mismatch");
  const double step = distance(x, y);
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference: y must differ from x");
  if (!precomputed) {
    Dataset q(x.size(), std::vector<double>{});
    q.push_back(x);
    q.push_back(y);
    const auto d = sample_local_depth(data, q, cfg);
    precomputed = {d.values[0], d.values[1]};
  }
  return finite_difference_from_depths(cfg.spec, precomputed->first, precomputed->second, step);
}

}  // namespace ldepth
