#include "ldepth/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "ldepth/experiment.hpp"
#include "ldepth/validate.hpp"

#ifndef LDEPTH_RECIPE_DIR
#define LDEPTH_RECIPE_DIR "recipes"
#endif

namespace ldepth {

namespace fs = std::filesystem;

bool Criterion::holds(double measured) const {
  if (comparator == "<") return measured < threshold;
  if (comparator == "<=") return measured <= threshold;
  if (comparator == ">") return measured > threshold;
  if (comparator == ">=") return measured >= threshold;
  if (comparator == "==") return measured == threshold;
  throw std::invalid_argument("unknown comparator '" + comparator + "'");
}

Recipe Recipe::from_json(const nlohmann::json& j) {
  Recipe r;
  try {
    r.id = j.at("id").get<std::string>();
    r.version = j.value("version", 1);
    r.anchor = j.value("anchor", "");
    r.kind = j.at("kind").get<std::string>();
    r.config = j.value("config", nlohmann::json::object());
    for (const auto& c : j.value("acceptance", nlohmann::json::array())) {
      Criterion k{c.at("metric").get<std::string>(), c.at("comparator").get<std::string>(),
                  c.at("threshold").get<double>()};
      k.holds(0.0);  // rejects unknown comparators early
      r.acceptance.push_back(k);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("recipe: ") + e.what());
  }
  return r;
}

std::string default_recipe_dir() {
  if (const char* env = std::getenv("LDEPTH_RECIPES"); env && *env) return env;
  return LDEPTH_RECIPE_DIR;
}

std::vector<std::string> recipe_ids(const std::string& dir) {
  std::vector<std::string> ids;
  if (!fs::is_directory(dir)) throw std::invalid_argument("recipe directory '" + dir + "' not found");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Recipe load_recipe(const std::string& id, const std::string& dir) {
  const auto path = fs::path(dir) / (id + ".json");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("unknown recipe id '" + id + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("recipe '" + id + "' is not valid JSON: " + e.what());
  }
  auto r = Recipe::from_json(j);
  if (r.id != id) throw std::invalid_argument("recipe file '" + path.string() + "' declares id '" + r.id + "'");
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

void set_seeds(nlohmann::json& j, std::uint64_t seed) {
  if (j.is_object()) {
    for (auto& [key, value] : j.items()) {
      if (key == "seed") {
        value = seed;
      } else {
        set_seeds(value, seed);
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) set_seeds(v, seed);
  }
}

MixtureModel mixture_from(const nlohmann::json& params) {
  const auto weights = params.at("weights").get<std::vector<double>>();
  const auto means = params.at("means").get<std::vector<double>>();
  const auto sds = params.at("sds").get<std::vector<double>>();
  if (means.size() != weights.size() || sds.size() != weights.size()) {
    throw std::invalid_argument("recipe: weights, means and sds differ in length");
  }
  std::vector<Point> mu;
  std::vector<Eigen::MatrixXd> cov;
  for (std::size_t k = 0; k < means.size(); ++k) {
    mu.push_back({means[k]});
    cov.push_back(Eigen::MatrixXd::Constant(1, 1, sds[k] * sds[k]));
  }
  return MixtureModel(weights, mu, cov);
}

// Highest density value over the modes reached from the component means.
double mode_height(const AnalyticDensity& d) {
  const auto* m = d.mixture_model();
  if (!m) throw std::invalid_argument("recipe: mode height needs a mixture density");
  double best = 0.0;
  for (const auto& mu : m->means()) best = std::max(best, d(gradient_flow(d, mu, GradientFlowConfig{}).terminal));
  return best;
}

ValidationVerdict run_check(const std::string& check, const nlohmann::json& p, std::uint64_t seed) {
  if (check == "extreme_localization") {
    const auto g = p.at("grid");
    Dataset grid(1, std::vector<double>{});
    const double lo = g.at("lower"), hi = g.at("upper");
    const int count = g.at("count");
    for (int i = 0; i < count; ++i) grid.push_back(Point{lo + (hi - lo) * i / std::max(1, count - 1)});
    return check_extreme_localization(p.at("density"), grid, p.at("taus"), p.at("n"), seed, p.at("tolerance"));
  }
  if (check == "clt_variance") {
    GeometryConstants c;
    c.spec = RegionSpec::lens(1);
    const auto& k = p.at("constants");
    if (k.contains("lambda1")) {
      c.lambda1 = k.at("lambda1");
      c.lambda1_star_sq = k.at("lambda1_star_sq");
    } else {
      ConstantsBudget b;
      b.n_samples = k.at("n_samples");
      b.n_outer = k.at("n_outer");
      b.n_inner = k.at("n_inner");
      c = compute_constants(c.spec, b, seed);
    }
    return check_clt_variance(p.at("density"), p.at("x"), p.at("n"), p.at("tau_exponent"), p.at("reps"), seed, c,
                              p.value("rel_tolerance", 0.25));
  }
  if (check == "symmetry_stationary") {
    return check_symmetry_stationary(mixture_from(p), p.at("tau"), seed, p.value("tolerance", 1e-6));
  }
  if (check == "mode_bracket") return check_mode_bracket(mixture_from(p), p.at("taus"), seed);
  if (check == "level_sets") {
    const std::string name = p.at("density");
    const double alpha = p.contains("alpha") ? p.at("alpha").get<double>()
                                             : p.at("alpha_mode_fraction").get<double>() * mode_height(named_density(name));
    return check_level_sets(name, alpha, p.at("taus"), p.at("ns"), p.at("grid"), seed, p.value("reps", 20),
                            p.value("min_agreement", 0.95));
  }
  if (check == "unbiasedness_and_variance") {
    return check_unbiasedness_and_variance(p.at("density"), p.at("x"), p.at("tau"), p.at("n"), p.at("reps"), seed);
  }
  if (check == "depth_normality") {
    return check_depth_normality(p.at("density"), p.at("x"), p.at("tau"), p.at("n"), p.at("reps"), seed);
  }
  throw std::invalid_argument("unknown check '" + check + "'");
}

void add_bench_metrics(nlohmann::json& out, const std::string& prefix, const BenchResult& b) {
  out[prefix + "exact_count"] = b.counts.exact;
  out[prefix + "lower_count"] = b.counts.lower;
  out[prefix + "higher_count"] = b.counts.higher;
  out[prefix + "true_k"] = b.true_k;
  out[prefix + "hausdorff_mean"] = b.hausdorff.mean;
  out[prefix + "hausdorff_sd"] = b.hausdorff.sd;
  for (std::size_t e = 0; e < b.eta.size(); ++e) {
    out[prefix + "prob_distance_mean_eta_" + format_double(b.eta[e])] = b.prob_distance[e].mean;
  }
}

nlohmann::json measure_bench(const nlohmann::json& config, std::uint64_t seed, nlohmann::json& extra) {
  auto base = config.at("experiment");
  base["seed"] = seed;
  nlohmann::json out = nlohmann::json::object();
  extra["tables"] = nlohmann::json::array();
  if (!config.contains("grid")) {
    const auto b = run_bench(ExperimentConfig::from_json(base));
    add_bench_metrics(out, "", b);
    extra["tables"].push_back(b.to_json());
    return out;
  }
  const auto qs = config.at("grid").at("q").get<std::vector<double>>();
  const auto ss = config.at("grid").at("s").get<std::vector<std::size_t>>();
  for (double q : qs) {
    for (std::size_t s : ss) {
      auto j = base;
      j["q"] = q;
      j["s"] = s;
      const auto b = run_bench(ExperimentConfig::from_json(j));
      add_bench_metrics(out, b.method + ".", b);
      extra["tables"].push_back(b.to_json());
    }
  }
  return out;
}

nlohmann::json measure_validate(const nlohmann::json& config, std::uint64_t seed, nlohmann::json& extra) {
  nlohmann::json out = nlohmann::json::object();
  extra["verdicts"] = nlohmann::json::array();
  for (const auto& c : config.at("checks")) {
    const std::string label = c.at("label");
    const auto v = run_check(c.at("check"), c.value("params", nlohmann::json::object()), seed);
    out[label + ".passed"] = v.passed ? 1 : 0;
    out[label + ".ok"] = v.ok() ? 1 : 0;
    out[label + ".expected_fail"] = v.expected_fail ? 1 : 0;
    out[label + ".statistic"] = v.statistic;
    if (v.target != 0.0) out[label + ".relative_error"] = std::abs(v.statistic - v.target) / std::abs(v.target);
    for (const auto& [key, value] : v.details.items()) {
      if (value.is_number()) out[label + "." + key] = value;
      if (value.is_boolean()) out[label + "." + key] = value.get<bool>() ? 1 : 0;
    }
    extra["verdicts"].push_back(v.to_json());
  }
  return out;
}

nlohmann::json measure_plotdata(const nlohmann::json& config, std::uint64_t seed, nlohmann::json& extra) {
  auto j = config.at("experiment");
  j["seed"] = seed;
  const auto cfg = ExperimentConfig::from_json(j);
  const auto data = load_or_sample(cfg);
  const auto plot = run_plotdata(cfg, data);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& c : plot.curves) out["maxima_tau_" + format_double(c.tau)] = c.local_maxima;
  extra["grid_points"] = plot.grid.size();
  return out;
}

// Exact agreement of the pair families and the 1-d simplicial depth on random data.
nlohmann::json measure_coincidence(const nlohmann::json& config, std::uint64_t seed, nlohmann::json& extra) {
  const std::size_t datasets = config.value("datasets", 100);
  const std::size_t max_n = config.value("max_n", 60);
  const std::size_t points = config.value("points", 20);
  const double beta = config.value("beta", 1.5);
  const std::vector<RegionSpec> others{RegionSpec::spherical(1), RegionSpec::beta_skeleton(beta, 1),
                                       RegionSpec::simplicial(1)};
  std::vector<std::size_t> mismatches(datasets, 0);
  parallel_for(datasets, [&](std::size_t d) {
    Rng rng(seed, d);
    const std::size_t n = 2 + rng.index(max_n - 1);
    Dataset data(n, 1);
    for (auto& v : data.values()) v = rng.normal();
    for (std::size_t k = 0; k < points; ++k) {
      const Point x{rng.uniform(-3.0, 3.0)};
      DepthConfig cfg;
      cfg.tau = k % 10 == 9 ? kInf : rng.uniform(0.01, 4.0);
      cfg.spec = RegionSpec::lens(1);
      const double lens = sample_local_depth(data, x, cfg);
      for (const auto& spec : others) {
        cfg.spec = spec;
        mismatches[d] += sample_local_depth(data, x, cfg) != lens;
      }
    }
  });
  extra["families"] = {"LLD", "LBD", RegionSpec::beta_skeleton(beta, 1).label(), "LSD"};
  return {{"mismatches", std::accumulate(mismatches.begin(), mismatches.end(), std::size_t{0})},
          {"comparisons", datasets * points * others.size()}};
}

nlohmann::json measure_constants(const nlohmann::json& config, std::uint64_t seed, nlohmann::json& extra) {
  const std::uint64_t n1 = config.value("p1_samples", std::uint64_t{1'000'000});
  const std::uint64_t outer = config.value("p1_outer", std::uint64_t{20'000});
  const std::uint64_t inner = config.value("p1_inner", std::uint64_t{2'000});
  const std::uint64_t n2 = config.value("p2_samples", std::uint64_t{10'000'000});
  const double star_target = config.value("lambda1_star_sq_target", 2.0 / 3.0);

  const auto lens1 = RegionSpec::lens(1);
  const auto l1 = estimate_lambda1(lens1, n1, substream_seed(seed, 0));
  const auto star = estimate_lambda1_star_sq(lens1, outer, inner, substream_seed(seed, 1));
  const auto a = estimate_lambda1(RegionSpec::lens(2), n2, substream_seed(seed, 2));
  const auto b = estimate_lambda1(RegionSpec::lens(2), n2, substream_seed(seed, 3));
  extra["estimates"] = {{"lambda1_p1", {l1.estimate, l1.standard_error}},
                        {"lambda1_star_sq_p1", {star.estimate, star.standard_error}},
                        {"lambda1_p2_seed_a", {a.estimate, a.standard_error}},
                        {"lambda1_p2_seed_b", {b.estimate, b.standard_error}}};
  const auto analytic = analytic_lambda1(lens1);
  return {{"lambda1_p1_analytic", analytic ? *analytic : -1.0},
          {"lambda1_p1_z", std::abs(l1.estimate - 1.0) / l1.standard_error},
          {"lambda1_star_sq_p1_z", std::abs(star.estimate - star_target) / star.standard_error},
          {"lambda1_p2_relative_difference", std::abs(a.estimate - b.estimate) / (0.5 * (a.estimate + b.estimate))}};
}

ClusterSet random_blocks(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.index(k));
  return ClusterSet::from_labels(labels);
}

nlohmann::json measure_metrics_oracle(const nlohmann::json& config, std::uint64_t seed, nlohmann::json&) {
  const std::size_t instances = config.value("instances", 500);
  const std::size_t max_blocks = config.value("max_blocks", 6);
  const std::size_t max_n = config.value("max_n", 40);
  Rng rng(seed);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 2 + rng.index(max_n - 1);
    const auto c = random_blocks(n, 1 + rng.index(max_blocks), rng);
    const auto d = random_blocks(n, 1 + rng.index(max_blocks), rng);
    const double eta = i % 4 == 0 ? 0.0 : rng.uniform(0.0, 2.0);
    mismatches += probability_distance_assignment(c, d, eta) != probability_distance_brute_force(c, d, eta);
  }

  auto blocks = [](std::vector<std::vector<std::size_t>> b) {
    ClusterSet c;
    c.n = 4;
    c.blocks = std::move(b);
    return c;
  };
  const auto pairs = blocks({{0, 1}, {2, 3}});
  const auto split = blocks({{0}, {1, 2, 3}});
  const auto whole = blocks({{0, 1, 2, 3}});
  const auto singles = blocks({{0}, {1}, {2}, {3}});
  std::size_t hand_failures = 0;
  hand_failures += probability_distance(pairs, split) != 0.25;
  hand_failures += hausdorff_distance(pairs, split) != 0.25;
  hand_failures += probability_distance(whole, pairs, 1.0) != 0.5;
  hand_failures += probability_distance(whole, pairs, 0.0) != 0.25;
  hand_failures += hausdorff_distance(whole, singles) != 0.75;
  return {{"mismatches", mismatches}, {"instances", instances}, {"hand_example_failures", hand_failures}};
}

}  // namespace

nlohmann::json measure(const std::string& kind, const nlohmann::json& config, std::uint64_t seed) {
  nlohmann::json extra = nlohmann::json::object();
  nlohmann::json metrics;
  if (kind == "bench") {
    metrics = measure_bench(config, seed, extra);
  } else if (kind == "validate") {
    metrics = measure_validate(config, seed, extra);
  } else if (kind == "plotdata") {
    metrics = measure_plotdata(config, seed, extra);
  } else if (kind == "coincidence") {
    metrics = measure_coincidence(config, seed, extra);
  } else if (kind == "constants") {
    metrics = measure_constants(config, seed, extra);
  } else if (kind == "metrics_oracle") {
    metrics = measure_metrics_oracle(config, seed, extra);
  } else {
    throw std::invalid_argument("unknown recipe kind '" + kind + "'");
  }
  return {{"metrics", metrics}, {"details", extra}};
}

nlohmann::json run_recipe(const Recipe& recipe, std::uint64_t seed) {
  const auto t0 = Clock::now();
  auto resolved = recipe.config;
  set_seeds(resolved, seed);
  const auto measured = measure(recipe.kind, resolved, seed);
  const auto& metrics = measured.at("metrics");

  nlohmann::json criteria = nlohmann::json::array();
  bool all = true;
  for (const auto& c : recipe.acceptance) {
    nlohmann::json row = {{"metric", c.metric}, {"comparator", c.comparator}, {"threshold", c.threshold}};
    if (!metrics.contains(c.metric)) {
      row["measured"] = nullptr;
      row["passed"] = false;
      row["error"] = "metric not produced";
      all = false;
    } else {
      const double v = metrics.at(c.metric).get<double>();
      const bool ok = c.holds(v);
      row["measured"] = v;
      row["passed"] = ok;
      all = all && ok;
    }
    criteria.push_back(row);
  }
  return {{"id", recipe.id},
          {"version", recipe.version},
          {"anchor", recipe.anchor},
          {"kind", recipe.kind},
          {"seed", seed},
          {"config", resolved},
          {"metrics", metrics},
          {"details", measured.at("details")},
          {"criteria", criteria},
          {"passed", all},
          {"runtime_seconds", std::chrono::duration<double>(Clock::now() - t0).count()}};
}

nlohmann::json run_recipe(const std::string& id, std::uint64_t seed, const std::string& dir) {
  return run_recipe(load_recipe(id, dir), seed);
}

}  // namespace ldepth
