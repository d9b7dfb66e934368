#include "ldepth/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ldepth {

void ClusterParams::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("ClusterParams: q must lie in [0, 1]");
  if (s < 1) throw std::invalid_argument("ClusterParams: s must be >= 1");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ClusterParams: r must be positive");
  if (max_iters && *max_iters == 0) throw std::invalid_argument("ClusterParams: max_iters must be positive");
}

std::vector<std::size_t> candidate_neighbors(const Dataset& data, ConstPointRef z, std::size_t s, double r) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d2 = squared_distance(z, data.row(i));
    if (d2 > 0.0) dist.emplace_back(d2, i);
  }
  const double r2 = r * r;
  std::vector<std::size_t> out;
  const std::size_t within = static_cast<std::size_t>(
      std::count_if(dist.begin(), dist.end(), [&](const auto& e) { return e.first <= r2; }));
  if (within >= s) {
    for (const auto& [d2, i] : dist)
      if (d2 <= r2) out.push_back(i);
    return out;
  }
  const std::size_t k = std::min(s, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  for (std::size_t j = 0; j < k; ++j) out.push_back(dist[j].second);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Smallest index carrying the same coordinates, for every row.
std::vector<std::size_t> representatives(const Dataset& data) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a), rb = data.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<std::size_t> rep(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = order[j];
    if (j > 0 && std::equal(data.row(i).begin(), data.row(i).end(), data.row(order[j - 1]).begin())) {
      rep[i] = rep[order[j - 1]];
    } else {
      rep[i] = i;
    }
  }
  return rep;
}

struct Step {
  std::size_t target = 0;
  double gain = 0.0;
  bool found = false;
};

// Best candidate by finite difference of rooted depths; ties to the smallest index.
Step best_move(const Dataset& data, ConstPointRef z, double rooted_z, const std::vector<double>& rooted,
               const ClusterParams& params) {
  Step best;
  for (auto w : candidate_neighbors(data, z, params.s, params.r)) {
    const double d = (rooted[w] - rooted_z) / distance(z, data.row(w));
    if (!best.found || d > best.gain || (d == best.gain && w < best.target)) {
      best = {w, d, true};
    }
  }
  return best;
}

}  // namespace

ClusterAssignment cluster(const Dataset& data, const Dataset& extra, const ClusterParams& params) {
  params.validate();
  if (!extra.empty() && extra.dim() != data.dim()) throw std::invalid_argument("cluster: extra point dimension");
  const std::size_t n = data.size();
  if (n < params.depth.spec.arity()) {
    throw std::invalid_argument("cluster: need at least " + std::to_string(params.depth.spec.arity()) +
                                " data points");
  }

  DepthConfig cfg = params.depth;
  cfg.tau = tau_from_quantile(data, params.q, cfg.spec, cfg.simplex_budget.value_or(kDefaultSimplexBudget),
                              cfg.seed);
  ClusterAssignment out;
  out.n_data = n;
  out.tau_used = cfg.tau;
  out.depth_values = sample_local_depth(data, data, cfg).values;

  const double root = depth_root(cfg.spec);
  std::vector<double> rooted(n);
  for (std::size_t i = 0; i < n; ++i) rooted[i] = std::pow(out.depth_values[i], root);

  const auto rep = representatives(data);
  std::vector<std::size_t> next(n);
  parallel_for(n, [&](std::size_t i) {
    next[i] = i;
    if (rep[i] != i) return;
    const Step s = best_move(data, data.row(i), rooted[i], rooted, params);
    if (s.found && s.gain > 0.0) next[i] = rep[s.target];
  });

  const std::size_t cap = params.max_iters.value_or(n);
  const std::size_t total = n + extra.size();
  out.terminal.assign(total, 0);
  out.iterations.assign(total, 0);
  if (params.keep_trace) out.trace.assign(total, {});

  auto ascend = [&](std::size_t input, std::size_t start, std::size_t moves_so_far) {
    std::size_t z = start;
    std::size_t moves = moves_so_far;
    if (params.keep_trace) out.trace[input].push_back(z);
    bool capped = false;
    while (next[z] != z) {
      if (moves >= cap) {
        capped = true;
        break;
      }
      z = next[z];
      ++moves;
      if (params.keep_trace) out.trace[input].push_back(z);
    }
    out.terminal[input] = z;
    out.iterations[input] = moves;
    return capped;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (ascend(i, rep[i], 0)) out.flagged.push_back(i);
  }

  if (!extra.empty()) {
    const auto extra_depth = sample_local_depth(data, extra, cfg).values;
    for (std::size_t e = 0; e < extra.size(); ++e) {
      const std::size_t input = n + e;
      const auto x = extra.row(e);
      std::size_t nearest = 0;
      double nd = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(x, data.row(i));
        if (d < nd) {
          nd = d;
          nearest = i;
        }
      }
      if (nd == 0.0) {
        if (ascend(input, rep[nearest], 0)) out.flagged.push_back(input);
        continue;
      }
      const double rx = std::pow(extra_depth[e], root);
      const Step s = best_move(data, x, rx, rooted, params);
      std::size_t start = rep[nearest];
      if (s.found && s.gain > 0.0) {
        start = rep[s.target];
      } else if (extra_depth[e] == 0.0 && (!s.found || rooted[s.target] == 0.0)) {
        out.flagged.push_back(input);
      }
      if (ascend(input, start, 1) && (out.flagged.empty() || out.flagged.back() != input)) {
        out.flagged.push_back(input);
      }
    }
  }

  std::map<std::size_t, int> id_of;
  out.cluster_id.assign(total, -1);
  for (std::size_t i = 0; i < total; ++i) {
    auto [it, fresh] = id_of.try_emplace(out.terminal[i], static_cast<int>(out.mode_index.size()));
    if (fresh) {
      out.mode_index.push_back(out.terminal[i]);
      out.modes.push_back(data.point(out.terminal[i]));
    }
    out.cluster_id[i] = it->second;
  }
  return out;
}

ClusterAssignment cluster(const Dataset& data, const ClusterParams& params) {
  return cluster(data, Dataset(data.dim(), std::vector<double>{}), params);
}

std::vector<std::size_t> terminal_violations(const Dataset& data, const ClusterAssignment& a,
                                             const ClusterParams& params) {
  const double root = depth_root(params.depth.spec);
  std::vector<double> rooted(a.depth_values.size());
  for (std::size_t i = 0; i < rooted.size(); ++i) rooted[i] = std::pow(a.depth_values[i], root);
  std::vector<std::size_t> bad;
  for (auto t : a.mode_index) {
    for (auto w : candidate_neighbors(data, data.row(t), params.s, params.r)) {
      if ((rooted[w] - rooted[t]) / distance(data.row(t), data.row(w)) > 0.0) {
        bad.push_back(t);
        break;
      }
    }
  }
  return bad;
}

ClusterSet assignment_to_clusterset(const ClusterAssignment& a, bool restrict_to_data) {
  std::vector<int> labels = a.cluster_id;
  if (restrict_to_data) labels.resize(a.n_data);
  ClusterSet set = ClusterSet::from_labels(labels);
  return set;
}

}  // namespace ldepth
