#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ldepth {

/// Threshold on one measured quantity of a recipe run.
struct Criterion {
  std::string metric;
  std::string comparator;  // <, <=, >, >=, ==
  double threshold = 0.0;

  bool holds(double measured) const;
};

/// A recipe binds a kind of run (bench, validate, plotdata, coincidence,
/// constants, metrics_oracle), its parameters and acceptance thresholds.
struct Recipe {
  std::string id;
  int version = 1;
  std::string anchor;
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Criterion> acceptance;

  static Recipe from_json(const nlohmann::json& j);
};

/// Directory holding the bundled recipe files; LDEPTH_RECIPES overrides it.
std::string default_recipe_dir();
std::vector<std::string> recipe_ids(const std::string& dir = default_recipe_dir());
/// Throws std::invalid_argument for an unknown id.
Recipe load_recipe(const std::string& id, const std::string& dir = default_recipe_dir());

/// Runs the recipe with every seed in its configuration replaced by `seed`.
/// The report holds the resolved configuration, the measured metrics and one
/// entry per criterion; "passed" is true when all criteria hold.
nlohmann::json run_recipe(const Recipe& recipe, std::uint64_t seed);
nlohmann::json run_recipe(const std::string& id, std::uint64_t seed, const std::string& dir = default_recipe_dir());

/// Measured metrics for each kind, before thresholds are applied.
nlohmann::json measure(const std::string& kind, const nlohmann::json& config, std::uint64_t seed);

}  // namespace ldepth
