#include "ldepth/constants.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ldepth {

namespace {

constexpr std::uint64_t kLambdaChunk = 1u << 16;
constexpr std::uint64_t kOuterChunk = 256;

void require_tuple_family(const RegionSpec& spec, const char* who) {
  spec.validate();
  if (spec.is_cube_family()) {
    throw std::invalid_argument(std::string(who) + ": hypercube families have no sampled constant");
  }
}

// Membership of a flat tuple (arity * p values) in Z_1(0).
bool in_unit_region(const RegionSpec& spec, const std::vector<double>& tuple, std::vector<const double*>& ptrs,
                    const std::vector<double>& origin) {
  const std::size_t p = spec.dim;
  if (spec.is_pair_family()) {
    return region::pair(spec, origin, {tuple.data(), p}, {tuple.data() + p, p}, 1.0);
  }
  for (std::size_t i = 0; i < ptrs.size(); ++i) ptrs[i] = tuple.data() + i * p;
  return region::simplicial(ptrs, p, origin.data(), 1.0);
}

}  // namespace

std::optional<double> analytic_lambda1(const RegionSpec& spec) {
  if (spec.is_cube_family()) return 1.0;
  if (spec.dim == 1) return 1.0;
  return std::nullopt;
}

double lambda1_envelope_radius(const RegionSpec& spec) {
  return spec.radius_factor() * std::sqrt(static_cast<double>(spec.arity()));
}

McEstimate estimate_lambda1(const RegionSpec& spec, std::uint64_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("estimate_lambda1: n_samples must be positive");
  spec.validate();
  if (spec.is_cube_family()) return {1.0, 0.0};

  const std::size_t p = spec.dim;
  const std::size_t k = spec.arity();
  const double radius = lambda1_envelope_radius(spec);
  const double volume = ball_volume(p * k, radius);
  const std::uint64_t chunks = (n_samples + kLambdaChunk - 1) / kLambdaChunk;
  std::vector<std::uint64_t> hits(chunks, 0);

  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(seed, c);
    std::vector<double> tuple(p * k);
    std::vector<const double*> ptrs(k);
    const std::vector<double> origin(p, 0.0);
    const std::uint64_t begin = c * kLambdaChunk;
    const std::uint64_t end = std::min(n_samples, begin + kLambdaChunk);
    std::uint64_t h = 0;
    for (std::uint64_t s = begin; s < end; ++s) {
      rng.in_ball(tuple, radius);
      if (in_unit_region(spec, tuple, ptrs, origin)) ++h;
    }
    hits[c] = h;
  });

  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(n_samples);
  const double frac = static_cast<double>(total) / n;
  return {volume * frac, volume * std::sqrt(frac * (1.0 - frac) / n)};
}

McEstimate estimate_lambda1_star_sq(const RegionSpec& spec, std::uint64_t n_outer, std::uint64_t n_inner,
                                    std::uint64_t seed) {
  if (n_outer < 2 || n_inner < 2) {
    throw std::invalid_argument("estimate_lambda1_star_sq: n_outer and n_inner must be >= 2");
  }
  require_tuple_family(spec, "estimate_lambda1_star_sq");

  const std::size_t p = spec.dim;
  const std::size_t k = spec.arity();
  const double radius = spec.radius_factor();
  const double outer_volume = ball_volume(p, radius);
  const double section_volume = std::pow(ball_volume(p, radius), static_cast<double>(k - 1));
  const std::uint64_t chunks = (n_outer + kOuterChunk - 1) / kOuterChunk;
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> sums_sq(chunks, 0.0);

  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(seed, c);
    std::vector<double> tuple(p * k);
    std::vector<const double*> ptrs(k);
    const std::vector<double> origin(p, 0.0);
    const std::span<double> first(tuple.data(), p);
    const std::span<double> rest(tuple.data() + p, p * (k - 1));
    auto section_estimate = [&] {
      std::uint64_t h = 0;
      for (std::uint64_t i = 0; i < n_inner; ++i) {
        for (std::size_t m = 0; m + 1 < k; ++m) rng.in_ball(rest.subspan(m * p, p), radius);
        if (in_unit_region(spec, tuple, ptrs, origin)) ++h;
      }
      return section_volume * static_cast<double>(h) / static_cast<double>(n_inner);
    };
    const std::uint64_t begin = c * kOuterChunk;
    const std::uint64_t end = std::min(n_outer, begin + kOuterChunk);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t o = begin; o < end; ++o) {
      rng.in_ball(first, radius);
      const double a = section_estimate();
      const double b = section_estimate();
      const double prod = outer_volume * a * b;
      s += prod;
      s2 += prod * prod;
    }
    sums[c] = s;
    sums_sq[c] = s2;
  });

  double s = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sums[c];
    s2 += sums_sq[c];
  }
  const double n = static_cast<double>(n_outer);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

GeometryConstants compute_constants(const RegionSpec& spec, const ConstantsBudget& budget, std::uint64_t seed) {
  GeometryConstants c;
  c.spec = spec;
  c.budget = budget;
  c.seed = seed;
  if (auto exact = analytic_lambda1(spec)) {
    c.lambda1 = *exact;
    c.lambda1_se = 0.0;
  } else {
    const auto l = estimate_lambda1(spec, budget.n_samples, seed);
    c.lambda1 = l.estimate;
    c.lambda1_se = l.standard_error;
  }
  if (!spec.is_cube_family()) {
    const auto l2 = estimate_lambda1_star_sq(spec, budget.n_outer, budget.n_inner, substream_seed(seed, 1));
    c.lambda1_star_sq = l2.estimate;
    c.lambda1_star_sq_se = l2.standard_error;
  }
  return c;
}

GeometryConstants lambda1_only(const RegionSpec& spec, std::uint64_t n_samples, std::uint64_t seed) {
  GeometryConstants c;
  c.spec = spec;
  c.seed = seed;
  c.budget.n_samples = n_samples;
  c.budget.n_outer = 0;
  c.budget.n_inner = 0;
  if (auto exact = analytic_lambda1(spec)) {
    c.lambda1 = *exact;
  } else {
    const auto l = estimate_lambda1(spec, n_samples, seed);
    c.lambda1 = l.estimate;
    c.lambda1_se = l.standard_error;
  }
  return c;
}

// ---- cache ----

namespace {

nlohmann::json key_json(const RegionSpec& spec, const ConstantsBudget& b, std::uint64_t seed) {
  return {{"family", to_string(spec.family)},
          {"beta", spec.family == Family::BetaSkeleton ? spec.beta : 0.0},
          {"p", spec.dim},
          {"budgets", {{"n_samples", b.n_samples}, {"n_outer", b.n_outer}, {"n_inner", b.n_inner}}},
          {"seed", seed}};
}

}  // namespace

ConstantsCache::ConstantsCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("constants cache '" + path_ + "' is not valid JSON: " + e.what());
  }
  for (const auto& entry : doc.at("entries")) {
    const auto& k = entry.at("key");
    const auto& v = entry.at("value");
    GeometryConstants c;
    c.spec.family = family_from_string(k.at("family").get<std::string>());
    c.spec.beta = c.spec.family == Family::BetaSkeleton ? k.at("beta").get<double>()
                  : c.spec.family == Family::Spherical   ? 1.0
                                                         : 2.0;
    c.spec.dim = k.at("p").get<std::size_t>();
    c.budget.n_samples = k.at("budgets").at("n_samples").get<std::uint64_t>();
    c.budget.n_outer = k.at("budgets").at("n_outer").get<std::uint64_t>();
    c.budget.n_inner = k.at("budgets").at("n_inner").get<std::uint64_t>();
    c.seed = k.at("seed").get<std::uint64_t>();
    c.lambda1 = v.at("lambda1").get<double>();
    c.lambda1_se = v.at("lambda1_se").get<double>();
    c.lambda1_star_sq = v.at("lambda1_star_sq").get<double>();
    c.lambda1_star_sq_se = v.at("lambda1_star_sq_se").get<double>();
    entries_.push_back(c);
  }
}

std::optional<GeometryConstants> ConstantsCache::find(const RegionSpec& spec, const ConstantsBudget& budget,
                                                      std::uint64_t seed) const {
  const auto key = key_json(spec, budget, seed);
  for (const auto& e : entries_) {
    if (key_json(e.spec, e.budget, e.seed) == key) return e;
  }
  return std::nullopt;
}

void ConstantsCache::store(const GeometryConstants& c) {
  const auto key = key_json(c.spec, c.budget, c.seed);
  for (auto& e : entries_) {
    if (key_json(e.spec, e.budget, e.seed) == key) {
      e = c;
      return;
    }
  }
  entries_.push_back(c);
}

GeometryConstants ConstantsCache::get_or_compute(const RegionSpec& spec, const ConstantsBudget& budget,
                                                 std::uint64_t seed) {
  if (auto hit = find(spec, budget, seed)) return *hit;
  auto c = compute_constants(spec, budget, seed);
  store(c);
  save();
  return c;
}

void ConstantsCache::save() const {
  nlohmann::json doc;
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    doc["entries"].push_back({{"key", key_json(e.spec, e.budget, e.seed)},
                              {"value",
                               {{"lambda1", e.lambda1},
                                {"lambda1_se", e.lambda1_se},
                                {"lambda1_star_sq", e.lambda1_star_sq},
                                {"lambda1_star_sq_se", e.lambda1_star_sq_se}}}});
  }
  std::ofstream out(path_);
  if (!out) throw DataError("cannot write constants cache '" + path_ + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace ldepth
