#include "ldepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ldepth {

ClusterSet ClusterSet::from_labels(const std::vector<int>& labels) {
  ClusterSet out;
  out.n = labels.size();
  std::map<int, std::size_t> slot;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, fresh] = slot.try_emplace(labels[i], out.blocks.size());
    if (fresh) out.blocks.emplace_back();
    out.blocks[it->second].push_back(i);
  }
  return out;
}

void ClusterSet::validate() const {
  std::vector<char> seen(n, 0);
  for (const auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("ClusterSet: empty block");
    for (auto i : b) {
      if (i >= n) throw std::invalid_argument("ClusterSet: index " + std::to_string(i) + " out of range");
      if (seen[i]) throw std::invalid_argument("ClusterSet: index " + std::to_string(i) + " in two blocks");
      seen[i] = 1;
    }
  }
}

void ClusterSet::require_cover() const {
  validate();
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  if (total != n) {
    throw std::invalid_argument("ClusterSet: blocks cover " + std::to_string(total) + " of " + std::to_string(n) +
                                " points; metrics need a full partition");
  }
}

namespace {

// |A delta B| for every pair of blocks.
std::vector<std::vector<std::size_t>> delta_matrix(const ClusterSet& c, const ClusterSet& d) {
  std::vector<std::size_t> label_d(d.n, 0);
  for (std::size_t j = 0; j < d.blocks.size(); ++j)
    for (auto i : d.blocks[j]) label_d[i] = j;
  std::vector<std::vector<std::size_t>> m(c.blocks.size(), std::vector<std::size_t>(d.blocks.size(), 0));
  for (std::size_t a = 0; a < c.blocks.size(); ++a) {
    std::vector<std::size_t> overlap(d.blocks.size(), 0);
    for (auto i : c.blocks[a]) ++overlap[label_d[i]];
    for (std::size_t b = 0; b < d.blocks.size(); ++b) {
      m[a][b] = c.blocks[a].size() + d.blocks[b].size() - 2 * overlap[b];
    }
  }
  return m;
}

struct Matching {
  std::vector<std::vector<std::size_t>> delta;  // small x large
  std::vector<std::size_t> large_sizes;
  std::size_t n;
};

Matching prepare(const ClusterSet& c, const ClusterSet& d, double eta) {
  if (c.n != d.n) throw std::invalid_argument("probability_distance: partitions of different sample sizes");
  if (std::isnan(eta) || eta < 0.0) throw std::invalid_argument("probability_distance: eta must be >= 0");
  c.require_cover();
  d.require_cover();
  const bool swap = c.blocks.size() > d.blocks.size();
  const ClusterSet& small = swap ? d : c;
  const ClusterSet& large = swap ? c : d;
  Matching m{delta_matrix(small, large), {}, c.n};
  for (const auto& b : large.blocks) m.large_sizes.push_back(b.size());
  return m;
}

// Objective for a given injection small -> large.
double objective(const Matching& m, const std::vector<std::size_t>& pick, double eta) {
  std::vector<char> used(m.large_sizes.size(), 0);
  double matched = 0.0;
  for (std::size_t i = 0; i < pick.size(); ++i) {
    matched += static_cast<double>(m.delta[i][pick[i]]);
    used[pick[i]] = 1;
  }
  double unmatched = 0.0;
  for (std::size_t j = 0; j < used.size(); ++j)
    if (!used[j]) unmatched += static_cast<double>(m.large_sizes[j]);
  return (matched + eta * unmatched) / (2.0 * static_cast<double>(m.n));
}

}  // namespace

double probability_distance_brute_force(const ClusterSet& c, const ClusterSet& d, double eta) {
  const Matching m = prepare(c, d, eta);
  const std::size_t l = m.delta.size();
  const std::size_t s = m.large_sizes.size();
  // Enumerate injections as the first l entries of every permutation of the columns.
  std::vector<std::size_t> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<std::size_t> pick(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(l));
    best = std::min(best, objective(m, pick, eta));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double probability_distance_assignment(const ClusterSet& c, const ClusterSet& d, double eta) {
  const Matching m = prepare(c, d, eta);
  const std::size_t l = m.delta.size();
  const std::size_t s = m.large_sizes.size();
  if (l == 0) return objective(m, {}, eta);
  // Matching column j removes eta |D_j| from the unmatched penalty.
  std::vector<std::vector<double>> cost(l, std::vector<double>(s));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < s; ++j)
      cost[i][j] = static_cast<double>(m.delta[i][j]) - eta * static_cast<double>(m.large_sizes[j]);
  return objective(m, solve_assignment(cost), eta);
}

double probability_distance(const ClusterSet& c, const ClusterSet& d, double eta) {
  if (std::max(c.blocks.size(), d.blocks.size()) <= 8) return probability_distance_brute_force(c, d, eta);
  return probability_distance_assignment(c, d, eta);
}

std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost) {
  // Shortest augmenting path Hungarian method with potentials, 1-based internally.
  const std::size_t rows = cost.size();
  if (rows == 0) return {};
  const std::size_t cols = cost.front().size();
  if (rows > cols) throw std::invalid_argument("solve_assignment: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> owner(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> pick(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j)
    if (owner[j] != 0) pick[owner[j] - 1] = j - 1;
  return pick;
}

double hausdorff_distance(const ClusterSet& c, const ClusterSet& d) {
  if (c.n != d.n) throw std::invalid_argument("hausdorff_distance: partitions of different sample sizes");
  if (c.blocks.empty() || d.blocks.empty()) throw std::invalid_argument("hausdorff_distance: empty cluster set");
  c.require_cover();
  d.require_cover();
  const auto m = delta_matrix(c, d);
  std::size_t worst = 0;
  for (std::size_t a = 0; a < m.size(); ++a) worst = std::max(worst, *std::min_element(m[a].begin(), m[a].end()));
  for (std::size_t b = 0; b < d.blocks.size(); ++b) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t a = 0; a < m.size(); ++a) best = std::min(best, m[a][b]);
    worst = std::max(worst, best);
  }
  return static_cast<double>(worst) / static_cast<double>(c.n);
}

std::string CountSummary::format() const {
  std::ostringstream os;
  os << "(" << lower << ") " << exact << " (" << higher << ")";
  return os.str();
}

CountSummary count_summary(std::size_t true_k, const std::vector<std::size_t>& estimated) {
  CountSummary s;
  for (auto k : estimated) {
    if (k < true_k) ++s.lower;
    else if (k == true_k) ++s.exact;
    else ++s.higher;
  }
  return s;
}

std::string MeanSd::format(int precision) const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << mean << " (" << sd << ")";
  return os.str();
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

}  // namespace ldepth
