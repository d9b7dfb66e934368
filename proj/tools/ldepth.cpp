// Command-line front end: depth, cluster, bench, plotdata, validate, constants,
// sample and run (recipes). Exit codes: 0 success, 1 usage, 2 data, 3 validation.

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"
#include "ldepth/experiment.hpp"
#include "ldepth/harness.hpp"
#include "ldepth/validate.hpp"

using namespace ldepth;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kValidation = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double to_double(const std::string& text, const std::string& flag) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw UsageError(flag + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t to_integer(const std::string& text, const std::string& flag) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(flag + ": not a non-negative integer: '" + text + "'");
  }
  return v;
}

// Flags are collected as JSON overrides so that a config file and the command
// line share one schema; flags given explicitly win over the file.
class Flags {
public:
  enum class Kind { Number, Integer, Text, Numbers };

  explicit Flags(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file (flags override its values)");
  }

  Flags& add(const std::string& flag, const std::string& pointer, Kind kind, const std::string& help) {
    auto raw = std::make_shared<std::string>();
    auto* opt = app_->add_option(flag, *raw, help);
    entries_.push_back({opt, pointer, kind, raw, flag});
    return *this;
  }

  json merged() const {
    json base = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw UsageError("cannot open config '" + config_path_ + "'");
      try {
        in >> base;
      } catch (const json::exception& e) {
        throw UsageError("config '" + config_path_ + "' is not valid JSON: " + e.what());
      }
    }
    json overrides = json::object();
    for (const auto& e : entries_) {
      if (e.opt->count() == 0) continue;
      overrides[json::json_pointer(e.pointer)] = convert(e);
    }
    base.merge_patch(overrides);
    return base;
  }

  ExperimentConfig config() const { return ExperimentConfig::from_json(merged()); }

private:
  struct Entry {
    CLI::Option* opt;
    std::string pointer;
    Kind kind;
    std::shared_ptr<std::string> raw;
    std::string flag;
  };

  static json convert(const Entry& e) {
    const std::string& v = *e.raw;
    switch (e.kind) {
      case Kind::Number: return to_double(v, e.flag);
      case Kind::Integer: return to_integer(v, e.flag);
      case Kind::Text: return v;
      case Kind::Numbers: {
        json list = json::array();
        std::size_t start = 0;
        while (start <= v.size()) {
          const auto comma = v.find(',', start);
          const auto end = comma == std::string::npos ? v.size() : comma;
          list.push_back(to_double(v.substr(start, end - start), e.flag));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        return list;
      }
    }
    return nullptr;
  }

  CLI::App* app_;
  std::string config_path_;
  std::vector<Entry> entries_;
};

void add_source_flags(Flags& f) {
  f.add("--density", "/density", Flags::Kind::Text, "named benchmark density")
      .add("--input", "/input", Flags::Kind::Text, "data CSV")
      .add("-n,--n", "/n", Flags::Kind::Integer, "sample size for a named density")
      .add("--seed", "/seed", Flags::Kind::Integer, "base seed");
}

void add_family_flags(Flags& f) {
  f.add("--family", "/family", Flags::Kind::Text, "lens, spherical, beta, simplicial, halfspace, halfregion")
      .add("--beta", "/beta", Flags::Kind::Number, "beta for the beta-skeleton family")
      .add("--simplex-budget", "/simplex_budget", Flags::Kind::Integer, "tuple budget for simplicial depth");
}

void add_cluster_flags(Flags& f) {
  f.add("-q,--q", "/q", Flags::Kind::Number, "quantile order for tau")
      .add("-s,--s", "/s", Flags::Kind::Integer, "minimum candidate count")
      .add("-r,--r", "/r", Flags::Kind::Number, "candidate radius")
      .add("--max-iters", "/max_iters", Flags::Kind::Integer, "move cap per point");
}

void add_constants_flags(Flags& f) {
  f.add("--lambda-samples", "/constants/n_samples", Flags::Kind::Integer, "Monte-Carlo draws for lambda1")
      .add("--star-outer", "/constants/n_outer", Flags::Kind::Integer, "outer draws for lambda1*^2")
      .add("--star-inner", "/constants/n_inner", Flags::Kind::Integer, "inner draws for lambda1*^2")
      .add("--constants-cache", "/constants/cache", Flags::Kind::Text, "constants cache file");
}

void add_output_flags(Flags& f) {
  f.add("-o,--output", "/output", Flags::Kind::Text, "output file (default stdout)")
      .add("--summary", "/summary", Flags::Kind::Text, "JSON summary file");
}

// Writes through a file when a path is given, otherwise to stdout.
class Sink {
public:
  explicit Sink(const std::optional<std::string>& path) {
    if (path) {
      file_.open(*path);
      if (!file_) throw DataError("cannot write '" + *path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

void write_json(const std::optional<std::string>& path, const json& j) {
  Sink sink(path);
  sink.out() << j.dump(2) << '\n';
}

void cmd_depth(const Flags& flags) {
  const auto cfg = flags.config();
  cfg.validate();
  const auto data = load_or_sample(cfg);
  const std::size_t p = data.dim();
  Dataset queries(p, std::vector<double>{});
  if (cfg.queries) {
    queries = read_csv_file(*cfg.queries);
    if (queries.dim() != p) throw DataError("queries have " + std::to_string(queries.dim()) + " columns, data " + std::to_string(p));
  } else {
    if (cfg.x.size() % p != 0) throw UsageError("--x: length is not a multiple of the dimension " + std::to_string(p));
    queries = Dataset(p, cfg.x);
  }
  const auto spec = cfg.region(p);
  if (data.size() < spec.arity()) {
    throw DataError("need at least " + std::to_string(spec.arity()) + " data points, got " + std::to_string(data.size()));
  }
  const auto constants = constants_for(cfg, p);

  Sink sink(cfg.output);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < p; ++k) header.push_back("x" + std::to_string(k + 1));
  header.insert(header.end(), {"tau", "depth", "f_tau"});
  write_csv_header(sink.out(), header);
  for (double tau : cfg.taus) {
    DepthConfig dc;
    dc.spec = spec;
    dc.tau = tau;
    dc.seed = cfg.seed;
    dc.simplex_budget = cfg.simplex_budget;
    const auto depth = sample_local_depth(data, queries, dc);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      std::vector<double> row(queries.row(i).begin(), queries.row(i).end());
      row.push_back(tau);
      row.push_back(depth.values[i]);
      row.push_back(depth_to_density(depth.values[i], tau, constants));
      write_csv_row(sink.out(), row);
    }
  }
}

void cmd_cluster(const Flags& flags) {
  const auto cfg = flags.config();
  cfg.validate();
  const auto data = load_or_sample(cfg);
  const auto params = cfg.cluster_params(data.dim());
  const auto a = cluster(data, params);
  if (const auto bad = terminal_violations(data, a, params); !bad.empty()) {
    throw ValidationFailure("terminal certificate failed for " + std::to_string(bad.size()) + " terminals");
  }

  Sink sink(cfg.output);
  std::vector<std::string> header{"index", "terminal", "cluster_id"};
  for (std::size_t k = 0; k < data.dim(); ++k) header.push_back("mode" + std::to_string(k + 1));
  write_csv_header(sink.out(), header);
  for (std::size_t i = 0; i < a.terminal.size(); ++i) {
    sink.out() << i << ',' << a.terminal[i] << ',' << a.cluster_id[i];
    for (double v : a.modes[static_cast<std::size_t>(a.cluster_id[i])]) sink.out() << ',' << format_double(v);
    sink.out() << '\n';
  }

  json modes = json::array();
  for (std::size_t c = 0; c < a.modes.size(); ++c) {
    modes.push_back({{"cluster_id", c},
                     {"index", a.mode_index[c]},
                     {"point", a.modes[c]},
                     {"depth", a.depth_values[a.mode_index[c]]}});
  }
  const json summary = {{"k", a.cluster_count()}, {"tau_used", a.tau_used}, {"modes", modes},
                        {"flagged", a.flagged},   {"config", cfg.to_json()}};
  if (cfg.summary) {
    write_json(cfg.summary, summary);
  } else if (cfg.output) {
    std::cout << summary.dump(2) << '\n';
  }
}

void cmd_bench(const Flags& flags) {
  const auto cfg = flags.config();
  const auto b = run_bench(cfg);
  Sink sink(cfg.output);
  write_csv_header(sink.out(), BenchResult::table_header(cfg.eta));
  const auto row = b.table_row();
  for (std::size_t k = 0; k < row.size(); ++k) sink.out() << (k ? "," : "") << '"' << row[k] << '"';
  sink.out() << '\n';
  if (cfg.summary) {
    auto j = b.to_json();
    j["config"] = cfg.to_json();
    write_json(cfg.summary, j);
  }
}

void cmd_plotdata(const Flags& flags) {
  const auto cfg = flags.config();
  const auto data = load_or_sample(cfg);
  const auto plot = run_plotdata(cfg, data);
  Sink sink(cfg.output);
  write_plotdata(sink.out(), plot);
  if (cfg.summary) {
    json curves = json::array();
    for (const auto& c : plot.curves) curves.push_back({{"tau", c.tau}, {"local_maxima", c.local_maxima}});
    write_json(cfg.summary, {{"curves", curves}, {"grid_points", plot.grid.size()}, {"config", cfg.to_json()}});
  }
}

void cmd_sample(const Flags& flags) {
  auto cfg = flags.config();
  cfg.require_density();
  const auto data = sample(named_density(*cfg.density), cfg.n, cfg.seed);
  Sink sink(cfg.output);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < data.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  write_csv_header(sink.out(), header);
  for (std::size_t i = 0; i < data.size(); ++i) write_csv_row(sink.out(), data.point(i));
}

void cmd_constants(const Flags& flags, std::size_t p) {
  const auto j = flags.merged();
  auto cfg = ExperimentConfig::from_json(j);
  const auto spec = cfg.region(p);
  spec.validate();
  GeometryConstants c;
  if (cfg.constants_cache) {
    ConstantsCache cache(*cfg.constants_cache);
    c = cache.get_or_compute(spec, cfg.constants_budget, cfg.seed);
  } else {
    c = compute_constants(spec, cfg.constants_budget, cfg.seed);
  }
  write_json(cfg.output, {{"family", to_string(spec.family)},
                          {"label", spec.label()},
                          {"beta", spec.beta},
                          {"p", p},
                          {"lambda1", c.lambda1},
                          {"lambda1_se", c.lambda1_se},
                          {"lambda1_star_sq", c.lambda1_star_sq},
                          {"lambda1_star_sq_se", c.lambda1_star_sq_se},
                          {"seed", c.seed},
                          {"budget", {{"n_samples", c.budget.n_samples}, {"n_outer", c.budget.n_outer}, {"n_inner", c.budget.n_inner}}}});
}

void cmd_validate(const std::vector<std::string>& recipe_list, const std::string& checks_path,
                  const std::optional<std::uint64_t>& seed, const std::string& dir, const std::optional<std::string>& output) {
  std::vector<std::pair<json, std::uint64_t>> jobs;
  if (!checks_path.empty()) {
    std::ifstream in(checks_path);
    if (!in) throw UsageError("cannot open '" + checks_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("'" + checks_path + "' is not valid JSON: " + e.what());
    }
    jobs.emplace_back(j, seed.value_or(1));
  } else {
    auto ids = recipe_list;
    if (ids.empty()) {
      for (const auto& id : recipe_ids(dir))
        if (load_recipe(id, dir).kind == "validate") ids.push_back(id);
    }
    for (const auto& id : ids) {
      const auto r = load_recipe(id, dir);
      if (r.kind != "validate") throw UsageError("recipe '" + id + "' is not a validation recipe");
      jobs.emplace_back(r.config, seed.value_or(1));
    }
  }

  std::vector<ValidationVerdict> verdicts;
  Sink sink(output);
  bool all_ok = true;
  for (const auto& [config, s] : jobs) {
    const auto m = measure("validate", config, s);
    for (const auto& v : m.at("details").at("verdicts")) {
      sink.out() << v.dump() << '\n';
      all_ok = all_ok && v.at("ok").get<bool>();
    }
  }
  if (!all_ok) throw ValidationFailure("one or more checks failed");
}

void cmd_run(std::vector<std::string> ids, bool all, bool list, std::uint64_t seed, const std::string& dir,
             const std::optional<std::string>& output) {
  if (list) {
    for (const auto& id : recipe_ids(dir)) {
      const auto r = load_recipe(id, dir);
      std::cout << id << "  [" << r.kind << "]  " << r.anchor << '\n';
    }
    return;
  }
  if (all) ids = recipe_ids(dir);
  if (ids.empty()) throw UsageError("run: give recipe ids, --all or --list");
  json reports = json::array();
  bool passed = true;
  for (const auto& id : ids) {
    const auto report = run_recipe(id, seed, dir);
    std::cout << (report.at("passed").get<bool>() ? "PASS " : "FAIL ") << id << "  ("
              << report.at("runtime_seconds").get<double>() << " s)\n";
    for (const auto& c : report.at("criteria")) {
      std::cout << "    " << c.at("metric").get<std::string>() << ' ' << c.at("comparator").get<std::string>() << ' '
                << c.at("threshold").get<double>() << " : measured " << c.at("measured").dump()
                << (c.at("passed").get<bool>() ? "" : "  <-- fails") << '\n';
    }
    passed = passed && report.at("passed").get<bool>();
    reports.push_back(report);
  }
  if (output) write_json(output, reports);
  if (!passed) throw ValidationFailure("one or more recipes failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local depth toolkit"};
  app.require_subcommand(1);

  auto* depth = app.add_subcommand("depth", "sample local depth and f_tau at query points");
  Flags depth_flags(depth);
  add_source_flags(depth_flags);
  add_family_flags(depth_flags);
  add_constants_flags(depth_flags);
  add_output_flags(depth_flags);
  depth_flags.add("--queries", "/queries", Flags::Kind::Text, "query CSV")
      .add("--x", "/x", Flags::Kind::Numbers, "query coordinates, comma-separated, row after row")
      .add("--tau", "/taus", Flags::Kind::Numbers, "localization (comma-separated list allowed)");

  auto* clus = app.add_subcommand("cluster", "local-depth mode clustering");
  Flags cluster_flags(clus);
  add_source_flags(cluster_flags);
  add_family_flags(cluster_flags);
  add_cluster_flags(cluster_flags);
  add_output_flags(cluster_flags);

  auto* bench = app.add_subcommand("bench", "replicated clustering errors against the true partition");
  Flags bench_flags(bench);
  add_source_flags(bench_flags);
  add_family_flags(bench_flags);
  add_cluster_flags(bench_flags);
  add_output_flags(bench_flags);
  bench_flags.add("--replications", "/replications", Flags::Kind::Integer, "number of replications")
      .add("--eta", "/eta", Flags::Kind::Numbers, "eta values for the probability distance");

  auto* plot = app.add_subcommand("plotdata", "f_tau,n on a grid for plotting");
  Flags plot_flags(plot);
  add_source_flags(plot_flags);
  add_family_flags(plot_flags);
  add_constants_flags(plot_flags);
  add_output_flags(plot_flags);
  plot_flags.add("--tau", "/taus", Flags::Kind::Numbers, "localization values")
      .add("--grid", "/grid", Flags::Kind::Integer, "grid points per axis")
      .add("--smooth-window", "/smooth_window", Flags::Kind::Integer, "moving-average window for maxima counts");

  auto* samp = app.add_subcommand("sample", "draw from a named density");
  Flags sample_flags(samp);
  add_source_flags(sample_flags);
  add_output_flags(sample_flags);

  auto* cons = app.add_subcommand("constants", "geometric constants lambda1 and lambda1*^2");
  Flags constants_flags(cons);
  add_family_flags(constants_flags);
  add_constants_flags(constants_flags);
  add_output_flags(constants_flags);
  constants_flags.add("--seed", "/seed", Flags::Kind::Integer, "seed");
  std::size_t constants_p = 1;
  cons->add_option("-p,--dim", constants_p, "dimension")->check(CLI::PositiveNumber);

  std::string recipe_dir = default_recipe_dir();
  auto* val = app.add_subcommand("validate", "statistical checks, one JSON verdict per line");
  std::vector<std::string> val_recipes;
  std::string val_checks;
  std::optional<std::uint64_t> val_seed;
  std::optional<std::string> val_output;
  val->add_option("--recipe", val_recipes, "validation recipe ids (default: all of them)");
  val->add_option("--checks", val_checks, "JSON file with a {\"checks\": [...]} list");
  val->add_option("--seed", val_seed, "seed for every check");
  val->add_option("--recipes", recipe_dir, "recipe directory");
  val->add_option("-o,--output", val_output, "JSONL output (default stdout)");

  auto* run = app.add_subcommand("run", "run recipes and compare with their thresholds");
  std::vector<std::string> run_ids;
  bool run_all = false, run_list = false;
  std::uint64_t run_seed = 1;
  std::optional<std::string> run_output;
  run->add_option("ids", run_ids, "recipe ids");
  run->add_flag("--all", run_all, "every recipe");
  run->add_flag("--list", run_list, "list recipes");
  run->add_option("--seed", run_seed, "seed");
  run->add_option("--recipes", recipe_dir, "recipe directory");
  run->add_option("-o,--output", run_output, "JSON report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*depth) cmd_depth(depth_flags);
    if (*clus) cmd_cluster(cluster_flags);
    if (*bench) cmd_bench(bench_flags);
    if (*plot) cmd_plotdata(plot_flags);
    if (*samp) cmd_sample(sample_flags);
    if (*cons) cmd_constants(constants_flags, constants_p);
    if (*val) cmd_validate(val_recipes, val_checks, val_seed, recipe_dir, val_output);
    if (*run) cmd_run(run_ids, run_all, run_list, run_seed, recipe_dir, run_output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return kValidation;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}
