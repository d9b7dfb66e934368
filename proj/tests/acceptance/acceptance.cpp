// Acceptance suite: one recipe per criterion, one PASS/FAIL line each.
// Usage: acceptance [criterion numbers...] [--seed S]

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "ldepth/harness.hpp"

namespace {

struct Criterion {
  int number;
  const char* recipe;
  const char* title;
  double runtime_limit_seconds;
};

const std::vector<Criterion> kCriteria{
    {1, "accept-coincidence-p1", "p=1 family coincidence", 60},
    {2, "accept-constants", "geometric constants", 120},
    {3, "accept-unbiased-variance", "unbiasedness and exact variance", 120},
    {4, "accept-clt-p1", "CLT variance", 600},
    {5, "accept-extreme-localization", "extreme localization", 300},
    {6, "accept-symmetry-modes", "symmetry stationarity and mode bracket", 60},
    {7, "accept-bimodal-desk", "bimodal clustering", 900},
    {8, "accept-fountain", "fountain clustering", 1800},
    {9, "accept-mult-quadrimodal", "multivariate quadrimodal clustering", 1200},
    {10, "accept-metrics-oracle", "metrics oracle equivalence", 60},
    {11, "accept-level-sets", "level-set convergence", 300},
    {12, "accept-quadrimodal-curve", "quadrimodal curve shape", 120},
};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool run(const Criterion& c, std::uint64_t seed) {
  nlohmann::json report;
  try {
    report = ldepth::run_recipe(c.recipe, seed);
  } catch (const std::exception& e) {
    std::cout << "FAIL  " << c.number << "  " << c.title << ": error: " << e.what() << std::endl;
    return false;
  }
  const double runtime = report.at("runtime_seconds");
  const bool in_time = runtime <= c.runtime_limit_seconds;
  const bool passed = report.at("passed").get<bool>() && in_time;
  std::string detail;
  for (const auto& k : report.at("criteria")) {
    if (!detail.empty()) detail += ", ";
    detail += k.at("metric").get<std::string>() + "=" +
              (k.at("measured").is_null() ? "missing" : number(k.at("measured").get<double>())) + " (" +
              k.at("comparator").get<std::string>() + " " + number(k.at("threshold").get<double>()) + ")";
  }
  std::cout << (passed ? "PASS  " : "FAIL  ") << c.number << "  " << c.title << ": " << detail << "; runtime "
            << number(runtime) << " s (limit " << number(c.runtime_limit_seconds) << " s)" << std::endl;
  return passed;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 1;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else {
      selected.push_back(std::stoi(arg));
    }
  }
  bool all = true;
  std::size_t ran = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.number) == selected.end()) continue;
    all = run(c, seed) && all;
    ++ran;
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 1;
  }
  return all ? 0 : 1;
}
