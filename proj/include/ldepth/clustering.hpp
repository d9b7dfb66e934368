#pragma once

#include <optional>

#include "ldepth/depth.hpp"
#include "ldepth/metrics.hpp"

namespace ldepth {

struct ClusterParams {
  double q = 0.05;
  std::size_t s = 30;
  double r = 0.05;
  /// tau is overwritten with the order-q quantile at run time.
  DepthConfig depth;
  /// Move cap per input; nullopt means n.
  std::optional<std::size_t> max_iters;
  bool keep_trace = false;

  void validate() const;
};

struct ClusterAssignment {
  std::size_t n_data = 0;
  /// Per input (data rows first, then extra points): index of the terminal data point.
  std::vector<std::size_t> terminal;
  std::vector<int> cluster_id;
  /// Accepted moves per input.
  std::vector<std::size_t> iterations;
  /// Distinct terminals in order of cluster id.
  std::vector<std::size_t> mode_index;
  std::vector<Point> modes;
  /// Visited data indices per input, when requested.
  std::vector<std::vector<std::size_t>> trace;
  /// Inputs that hit the move cap, or extra points with zero depth everywhere reachable.
  std::vector<std::size_t> flagged;
  double tau_used = 0.0;
  std::vector<double> depth_values;

  std::size_t cluster_count() const { return modes.size(); }
};

/// Candidate moves from z: every data point within r (excluding exact
/// duplicates of z) when there are at least s of them, otherwise the s nearest.
std::vector<std::size_t> candidate_neighbors(const Dataset& data, ConstPointRef z, std::size_t s, double r);

/// Local-depth mode ascent over the data points, plus one entry step for
/// each extra point.
ClusterAssignment cluster(const Dataset& data, const Dataset& extra, const ClusterParams& params);
ClusterAssignment cluster(const Dataset& data, const ClusterParams& params);

/// Indices of terminals that have a strictly improving candidate; empty when
/// every terminal is a local maximum of the rooted depth.
std::vector<std::size_t> terminal_violations(const Dataset& data, const ClusterAssignment& a,
                                             const ClusterParams& params);

/// Groups inputs by cluster id; extra points are dropped when restrict_to_data.
ClusterSet assignment_to_clusterset(const ClusterAssignment& a, bool restrict_to_data = true);

}  // namespace ldepth
