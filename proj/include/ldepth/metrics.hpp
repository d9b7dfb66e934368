#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ldepth {

/// Disjoint blocks of sample indices in [0, n).
struct ClusterSet {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> blocks;

  /// Groups indices by label; negative labels are left out.
  static ClusterSet from_labels(const std::vector<int>& labels);

  /// Throws std::invalid_argument unless blocks are nonempty, in range and disjoint.
  void validate() const;
  /// Throws std::invalid_argument unless the blocks cover every index.
  void require_cover() const;
  std::size_t size() const { return blocks.size(); }
};

/// Empirical probability distance: optimal injective matching of the smaller
/// family into the larger, symmetric differences summed, plus eta times the
/// sizes of unmatched blocks, all over 2n.
double probability_distance(const ClusterSet& c, const ClusterSet& d, double eta = 1.0);

/// The two evaluation paths behind probability_distance, which enumerates
/// injections up to 8 blocks in the larger family and solves an assignment
/// problem beyond that.
double probability_distance_brute_force(const ClusterSet& c, const ClusterSet& d, double eta = 1.0);
double probability_distance_assignment(const ClusterSet& c, const ClusterSet& d, double eta = 1.0);

/// Empirical Hausdorff distance between the two block families, over n.
double hausdorff_distance(const ClusterSet& c, const ClusterSet& d);

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Returns the column picked for each row.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost);

struct CountSummary {
  std::size_t lower = 0;
  std::size_t exact = 0;
  std::size_t higher = 0;

  /// Table layout "(lower) exact (higher)".
  std::string format() const;
};

CountSummary count_summary(std::size_t true_k, const std::vector<std::size_t>& estimated);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::string format(int precision = 2) const;
};

MeanSd mean_sd(const std::vector<double>& values);

struct ErrorReport {
  MeanSd hausdorff;
  MeanSd prob_distance;
  double eta = 1.0;
  CountSummary counts;
};

}  // namespace ldepth
