#include "ldepth/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ldepth {

namespace {

template <class T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

std::string eta_label(double eta) {
  std::ostringstream s;
  s << "prob_eta_" << eta;
  return s.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (density.has_value() == input.has_value()) {
    throw std::invalid_argument("config: exactly one of 'density' and 'input' must be given");
  }
  if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (density && n < 1) throw std::invalid_argument("config: n must be >= 1");
  region(1).validate();
  cluster_params(1).validate();
  for (double t : taus)
    if (!(t > 0.0)) throw std::invalid_argument("config: taus must be positive");
  for (double e : eta)
    if (!(e >= 0.0)) throw std::invalid_argument("config: eta values must be >= 0");
  if (eta.empty()) throw std::invalid_argument("config: eta list is empty");
  if (grid < 1) throw std::invalid_argument("config: grid must be >= 1");
  if (smooth_window < 1) throw std::invalid_argument("config: smooth_window must be >= 1");
}

void ExperimentConfig::require_density() const {
  validate();
  if (!density) throw std::invalid_argument("config: a named density is required");
}

RegionSpec ExperimentConfig::region(std::size_t p) const {
  switch (family_from_string(family)) {
    case Family::Lens: return RegionSpec::lens(p);
    case Family::Spherical: return RegionSpec::spherical(p);
    case Family::BetaSkeleton: return RegionSpec::beta_skeleton(beta, p);
    case Family::Simplicial: return RegionSpec::simplicial(p);
    case Family::HalfspaceCube: return RegionSpec::halfspace_cube(p);
    case Family::HalfRegionCubes: return RegionSpec::half_region(p);
  }
  throw std::logic_error("unreachable family");
}

ClusterParams ExperimentConfig::cluster_params(std::size_t p) const {
  ClusterParams c;
  c.q = q;
  c.s = s;
  c.r = r;
  c.max_iters = max_iters;
  c.depth.spec = region(p);
  c.depth.simplex_budget = simplex_budget;
  c.depth.seed = seed;
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"density", optional_json(density)},
          {"input", optional_json(input)},
          {"queries", optional_json(queries)},
          {"x", x},
          {"family", family},
          {"beta", beta},
          {"q", q},
          {"s", s},
          {"r", r},
          {"max_iters", optional_json(max_iters)},
          {"simplex_budget", simplex_budget},
          {"n", n},
          {"replications", replications},
          {"seed", seed},
          {"constants",
           {{"n_samples", constants_budget.n_samples},
            {"n_outer", constants_budget.n_outer},
            {"n_inner", constants_budget.n_inner},
            {"cache", optional_json(constants_cache)}}},
          {"taus", taus},
          {"eta", eta},
          {"grid", grid},
          {"smooth_window", smooth_window},
          {"output", optional_json(output)},
          {"summary", optional_json(summary)}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"density", "input",        "queries",      "x",        "family",
                                           "beta",    "q",            "s",            "r",        "max_iters",
                                           "simplex_budget", "n",     "replications", "seed",     "constants",
                                           "taus",    "eta",          "grid",         "smooth_window", "output",
                                           "summary"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    read_optional(j, "density", c.density);
    read_optional(j, "input", c.input);
    read_optional(j, "queries", c.queries);
    read_field(j, "x", c.x);
    read_field(j, "family", c.family);
    read_field(j, "beta", c.beta);
    read_field(j, "q", c.q);
    read_field(j, "s", c.s);
    read_field(j, "r", c.r);
    read_optional(j, "max_iters", c.max_iters);
    read_field(j, "simplex_budget", c.simplex_budget);
    read_field(j, "n", c.n);
    read_field(j, "replications", c.replications);
    read_field(j, "seed", c.seed);
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      read_field(k, "n_samples", c.constants_budget.n_samples);
      read_field(k, "n_outer", c.constants_budget.n_outer);
      read_field(k, "n_inner", c.constants_budget.n_inner);
      read_optional(k, "cache", c.constants_cache);
    }
    read_field(j, "taus", c.taus);
    read_field(j, "eta", c.eta);
    read_field(j, "grid", c.grid);
    read_field(j, "smooth_window", c.smooth_window);
    read_optional(j, "output", c.output);
    read_optional(j, "summary", c.summary);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

Dataset read_csv(std::istream& in, std::vector<std::string>* header) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t p = 0;
  bool first = true;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (first) {
      first = false;
      p = cells.size();
      const bool any_numeric = std::any_of(cells.begin(), cells.end(), [](const auto& c) { return parse_number(c).has_value(); });
      if (!any_numeric) {
        if (header) *header = cells;
        continue;
      }
    }
    if (cells.size() != p) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(p) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto v = parse_number(cells[k]);
      if (!v || !std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(k + 1) +
                        ": not a finite number: '" + cells[k] + "'");
      }
      values.push_back(*v);
    }
  }
  if (p == 0) throw DataError("empty CSV input");
  return Dataset(p, std::move(values));
}

Dataset read_csv_file(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return read_csv(in, header);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << format_double(values[k]);
  out << '\n';
}

void write_csv_header(std::ostream& out, const std::vector<std::string>& names) {
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
}

Dataset load_or_sample(const ExperimentConfig& cfg) {
  if (cfg.input) {
    auto d = read_csv_file(*cfg.input);
    d.check_finite();
    return d;
  }
  if (!cfg.density) throw std::invalid_argument("config: no data source");
  return sample(named_density(*cfg.density), cfg.n, cfg.seed);
}

GeometryConstants constants_for(const ExperimentConfig& cfg, std::size_t p) {
  const auto spec = cfg.region(p);
  if (analytic_lambda1(spec) || !cfg.constants_cache) {
    return lambda1_only(spec, cfg.constants_budget.n_samples, cfg.seed);
  }
  ConstantsCache cache(*cfg.constants_cache);
  return cache.get_or_compute(spec, cfg.constants_budget, cfg.seed);
}

std::vector<std::string> BenchResult::table_header(const std::vector<double>& eta) {
  std::vector<std::string> h{"method", "hausdorff"};
  for (double e : eta) h.push_back(eta_label(e));
  h.push_back("counts");
  return h;
}

std::vector<std::string> BenchResult::table_row() const {
  auto cell = [&](const MeanSd& m) {
    if (reps.size() > 1) return m.format();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", m.mean);
    return std::string(buf);
  };
  std::vector<std::string> row{method, cell(hausdorff)};
  for (const auto& p : prob_distance) row.push_back(cell(p));
  row.push_back(counts.format());
  return row;
}

nlohmann::json BenchResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reps) {
    rows.push_back({{"seed", r.seed},
                    {"estimated_k", r.estimated_k},
                    {"true_k", r.true_k},
                    {"tau_used", r.tau_used},
                    {"hausdorff", r.hausdorff},
                    {"prob_distance", r.prob_distance},
                    {"flagged", r.flagged},
                    {"true_flagged", r.true_flagged}});
  }
  nlohmann::json prob = nlohmann::json::array();
  for (std::size_t k = 0; k < eta.size(); ++k) {
    prob.push_back({{"eta", eta[k]}, {"mean", prob_distance[k].mean}, {"sd", prob_distance[k].sd}});
  }
  return {{"density", density},
          {"method", method},
          {"true_k", true_k},
          {"hausdorff", {{"mean", hausdorff.mean}, {"sd", hausdorff.sd}}},
          {"prob_distance", prob},
          {"counts", {{"lower", counts.lower}, {"exact", counts.exact}, {"higher", counts.higher}}},
          {"table_row", table_row()},
          {"replications", rows}};
}

BenchResult run_bench(const ExperimentConfig& cfg) {
  cfg.require_density();
  const auto density = named_density(*cfg.density);
  const auto params = cfg.cluster_params(density.dim());
  params.validate();

  BenchResult out;
  out.density = *cfg.density;
  std::ostringstream label;
  label << params.depth.spec.label() << '-' << cfg.q << '-' << cfg.s;
  out.method = label.str();
  out.eta = cfg.eta;
  out.reps.resize(cfg.replications);

  // Replications run one after another; clustering and the flows parallelize inside.
  const GradientFlowConfig flow;
  for (std::size_t k = 0; k < cfg.replications; ++k) {
    auto& rep = out.reps[k];
    rep.seed = substream_seed(cfg.seed, k);
    const auto data = sample(density, cfg.n, rep.seed);
    const auto assignment = cluster(data, params);
    const auto truth = true_partition(density, data, flow);
    const auto estimated = assignment_to_clusterset(assignment);
    rep.estimated_k = assignment.cluster_count();
    rep.true_k = truth.modes.size();
    rep.tau_used = assignment.tau_used;
    rep.hausdorff = hausdorff_distance(estimated, truth.clusters);
    for (double e : cfg.eta) rep.prob_distance.push_back(probability_distance(estimated, truth.clusters, e));
    rep.flagged = assignment.flagged.size();
    rep.true_flagged = truth.flagged.size();
  }

  std::vector<double> h;
  std::vector<std::size_t> ks;
  for (const auto& r : out.reps) {
    h.push_back(r.hausdorff);
    ks.push_back(r.estimated_k);
    out.true_k = std::max(out.true_k, r.true_k);
  }
  out.hausdorff = mean_sd(h);
  for (std::size_t e = 0; e < cfg.eta.size(); ++e) {
    std::vector<double> v;
    for (const auto& r : out.reps) v.push_back(r.prob_distance[e]);
    out.prob_distance.push_back(mean_sd(v));
  }
  out.counts = count_summary(out.true_k, ks);
  return out;
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  const std::size_t half = window / 2;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t a = i < half ? 0 : i - half;
    const std::size_t b = std::min(v.size() - 1, i + half);
    double total = 0.0;
    for (std::size_t j = a; j <= b; ++j) total += v[j];
    out[i] = total / static_cast<double>(b - a + 1);
  }
  return out;
}

std::size_t count_local_maxima(const std::vector<double>& v) {
  std::size_t count = 0;
  int last = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const int sign = v[i] > v[i - 1] ? 1 : (v[i] < v[i - 1] ? -1 : 0);
    if (sign == 0) continue;
    if (last == 1 && sign == -1) ++count;
    last = sign;
  }
  return count;
}

PlotData run_plotdata(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  const std::size_t p = data.dim();
  if (p < 1 || p > 2) throw std::invalid_argument("plotdata: gridding needs p = 1 or 2, got " + std::to_string(p));
  if (data.empty()) throw DataError("plotdata: no data");

  std::optional<AnalyticDensity> density;
  if (cfg.density) density = named_density(*cfg.density);
  Point lo(p), hi(p);
  if (density) {
    lo = density->lower();
    hi = density->upper();
  } else {
    for (std::size_t k = 0; k < p; ++k) {
      lo[k] = hi[k] = data.row(0)[k];
      for (std::size_t i = 1; i < data.size(); ++i) {
        lo[k] = std::min(lo[k], data.row(i)[k]);
        hi[k] = std::max(hi[k], data.row(i)[k]);
      }
    }
  }

  const std::size_t g = cfg.grid;
  PlotData out;
  out.grid = Dataset(p == 1 ? g : g * g, p);
  auto coord = [&](std::size_t k, std::size_t i) {
    return g == 1 ? 0.5 * (lo[k] + hi[k]) : lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / static_cast<double>(g - 1);
  };
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    out.grid.row(i)[0] = coord(0, i % g);
    if (p == 2) out.grid.row(i)[1] = coord(1, i / g);
  }
  if (density) {
    for (std::size_t i = 0; i < out.grid.size(); ++i) out.density.push_back((*density)(out.grid.row(i)));
  }

  const auto constants = constants_for(cfg, p);
  for (double tau : cfg.taus) {
    DepthConfig dc;
    dc.spec = cfg.region(p);
    dc.tau = tau;
    dc.seed = cfg.seed;
    dc.simplex_budget = cfg.simplex_budget;
    PlotCurve c;
    c.tau = tau;
    c.values = tau_approximation(data, out.grid, dc, constants);
    if (p == 1) c.local_maxima = count_local_maxima(moving_average(c.values, cfg.smooth_window));
    out.curves.push_back(std::move(c));
  }
  return out;
}

void write_plotdata(std::ostream& out, const PlotData& plot) {
  std::vector<std::string> header;
  const std::size_t p = plot.grid.dim();
  for (std::size_t k = 0; k < p; ++k) header.push_back("x" + std::to_string(k + 1));
  if (!plot.density.empty()) header.push_back("density");
  for (const auto& c : plot.curves) header.push_back("f_tau_" + format_double(c.tau));
  write_csv_header(out, header);
  for (std::size_t i = 0; i < plot.grid.size(); ++i) {
    std::vector<double> row(plot.grid.row(i).begin(), plot.grid.row(i).end());
    if (!plot.density.empty()) row.push_back(plot.density[i]);
    for (const auto& c : plot.curves) row.push_back(c.values[i]);
    write_csv_row(out, row);
  }
}

}  // namespace ldepth
