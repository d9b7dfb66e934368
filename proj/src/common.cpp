#include "ldepth/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <exception>
#include <mutex>
#include <thread>

namespace ldepth {

Dataset::Dataset(std::size_t n, std::size_t p) : n_(n), p_(p), values_(n * p, 0.0) {
  if (p == 0) throw std::invalid_argument("Dataset: dimension must be positive");
}

Dataset::Dataset(std::size_t p, std::vector<double> values) : p_(p), values_(std::move(values)) {
  if (p == 0) throw std::invalid_argument("Dataset: dimension must be positive");
  if (values_.size() % p != 0) throw std::invalid_argument("Dataset: value count not a multiple of p");
  n_ = values_.size() / p;
}

Dataset Dataset::from_rows(const std::vector<Point>& rows) {
  if (rows.empty()) throw std::invalid_argument("Dataset::from_rows: no rows (dimension unknown)");
  Dataset d(0, rows.front().size());
  for (const auto& r : rows) d.push_back(r);
  return d;
}

Point Dataset::point(std::size_t i) const {
  auto r = row(i);
  return Point(r.begin(), r.end());
}

void Dataset::push_back(ConstPointRef x) {
  if (x.size() != p_) throw std::invalid_argument("Dataset::push_back: dimension mismatch");
  values_.insert(values_.end(), x.begin(), x.end());
  ++n_;
}

void Dataset::check_finite() const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DataError("non-finite coordinate at row " + std::to_string(k / p_) + ", column " +
                      std::to_string(k % p_));
    }
  }
}

double squared_distance(ConstPointRef a, ConstPointRef b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double distance(ConstPointRef a, ConstPointRef b) { return std::sqrt(squared_distance(a, b)); }

double norm(ConstPointRef a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

bool all_finite(ConstPointRef a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void Rng::on_sphere(std::span<double> out) {
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : out) {
      v = normal();
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  for (double& v : out) v *= inv;
}

void Rng::in_ball(std::span<double> out, double radius) {
  if (out.size() == 1) {
    out[0] = uniform(-radius, radius);
    return;
  }
  on_sphere(out);
  const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(out.size()));
  for (double& v : out) v *= r;
}

double ball_volume(std::size_t d, double radius) {
  const double half = 0.5 * static_cast<double>(d);
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0)) *
         std::pow(radius, static_cast<double>(d));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < n; i = next++) body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ldepth
