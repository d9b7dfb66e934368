#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldepth {

using Point = std::vector<double>;
using ConstPointRef = std::span<const double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for malformed input data (CSV cells, non-finite coordinates).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical routine fails to reach its requested accuracy.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// n x p sample matrix, row-major.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::size_t n, std::size_t p);
  Dataset(std::size_t p, std::vector<double> values);
  static Dataset from_rows(const std::vector<Point>& rows);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return p_; }
  bool empty() const { return n_ == 0; }

  ConstPointRef row(std::size_t i) const { return {values_.data() + i * p_, p_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * p_, p_}; }
  Point point(std::size_t i) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  void push_back(ConstPointRef x);

  /// Throws DataError on any non-finite entry.
  void check_finite() const;

private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
};

double squared_distance(ConstPointRef a, ConstPointRef b);
double distance(ConstPointRef a, ConstPointRef b);
double norm(ConstPointRef a);
bool all_finite(ConstPointRef a);

// Seeded streams. Every independent unit of work (replication, query, worker
// chunk) draws from its own substream so results never depend on scheduling.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(substream_seed(seed, stream)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  /// Uniform point in the radius-r ball of R^d (direction from normals, radius by inversion).
  void in_ball(std::span<double> out, double radius);
  void on_sphere(std::span<double> out);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Volume of the radius-r ball in R^d.
double ball_volume(std::size_t d, double radius);

/// Runs body(i) for i in [0, n) over the available hardware threads. Each index
/// is processed exactly once; results must be written per index by the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ldepth
