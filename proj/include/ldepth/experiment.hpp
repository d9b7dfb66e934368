#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldepth/clustering.hpp"
#include "ldepth/models.hpp"

namespace ldepth {

/// Settings shared by the command-line tools and the recipes. The JSON form
/// uses the field names below; unknown keys are rejected.
struct ExperimentConfig {
  std::optional<std::string> density;
  std::optional<std::string> input;
  /// Query points for the depth command (CSV); nullopt uses the "x" list.
  std::optional<std::string> queries;
  std::vector<double> x;

  std::string family = "lens";
  double beta = 2.0;
  double q = 0.05;
  std::size_t s = 30;
  double r = 0.05;
  std::optional<std::size_t> max_iters;
  std::uint64_t simplex_budget = kDefaultSimplexBudget;

  std::size_t n = 500;
  std::size_t replications = 1;
  std::uint64_t seed = 1;

  ConstantsBudget constants_budget;
  std::optional<std::string> constants_cache;

  /// Localization for depth and plotdata; the clustering command picks its own from q.
  std::vector<double> taus = {1.0};
  std::vector<double> eta = {1.0};
  /// Points per axis for plotdata.
  std::size_t grid = 200;
  /// Smoothing window for the local-maxima counts of plotdata.
  std::size_t smooth_window = 5;

  std::optional<std::string> output;
  std::optional<std::string> summary;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  /// Validates and additionally requires a named density.
  void require_density() const;

  RegionSpec region(std::size_t p) const;
  ClusterParams cluster_params(std::size_t p) const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Parses comma-separated numeric data. A first row without any numeric cell
/// is taken as a header. Throws DataError naming the line and column.
Dataset read_csv(std::istream& in, std::vector<std::string>* header = nullptr);
Dataset read_csv_file(const std::string& path, std::vector<std::string>* header = nullptr);

/// %.17g, which round-trips every double.
std::string format_double(double v);
void write_csv_row(std::ostream& out, const std::vector<double>& values);
void write_csv_header(std::ostream& out, const std::vector<std::string>& names);

/// Data for a command: the input file, or a sample of n points from the density.
Dataset load_or_sample(const ExperimentConfig& cfg);

/// Lambda1 for the configured family. Monte Carlo (optionally cached) is used
/// only when no analytic value exists.
GeometryConstants constants_for(const ExperimentConfig& cfg, std::size_t p);

struct BenchReplication {
  std::uint64_t seed = 0;
  std::size_t estimated_k = 0;
  std::size_t true_k = 0;
  double tau_used = 0.0;
  double hausdorff = 0.0;
  std::vector<double> prob_distance;  // one per eta
  std::size_t flagged = 0;
  std::size_t true_flagged = 0;
};

struct BenchResult {
  std::string density;
  std::string method;  // e.g. "LLD-0.1-50"
  std::size_t true_k = 0;
  std::vector<double> eta;
  std::vector<BenchReplication> reps;
  MeanSd hausdorff;
  std::vector<MeanSd> prob_distance;
  CountSummary counts;

  /// Table layout: method, Hausdorff "mean (sd)", one probability column per
  /// eta, count triple. The sd is left empty for a single replication.
  std::vector<std::string> table_row() const;
  static std::vector<std::string> table_header(const std::vector<double>& eta);
  nlohmann::json to_json() const;
};

/// Replication study comparing the clustering of each sample with its
/// gradient-flow partition.
/// Replication k uses the seed substream_seed(cfg.seed, k).
BenchResult run_bench(const ExperimentConfig& cfg);

std::vector<double> moving_average(const std::vector<double>& v, std::size_t window);
/// Interior strict maxima, counted as +/- sign changes of the successive
/// differences; flat steps are skipped.
std::size_t count_local_maxima(const std::vector<double>& v);

struct PlotCurve {
  double tau = 0.0;
  std::vector<double> values;
  std::size_t local_maxima = 0;  // after smoothing; 1-D only
};

struct PlotData {
  Dataset grid;
  /// Analytic density on the grid, when a named density is used.
  std::vector<double> density;
  std::vector<PlotCurve> curves;
};

/// f_{tau,n} on a regular grid for each tau. p must be 1 or 2; a named density
/// sets the box, otherwise the data range does.
PlotData run_plotdata(const ExperimentConfig& cfg, const Dataset& data);
void write_plotdata(std::ostream& out, const PlotData& plot);

}  // namespace ldepth
