#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ldepth/metrics.hpp"
#include "ldepth/oracle.hpp"

namespace ldepth {

/// Finite Gaussian mixture with validated weights and covariances.
class MixtureModel {
public:
  MixtureModel(std::vector<double> weights, std::vector<Point> means, std::vector<Eigen::MatrixXd> covariances);

  /// Equal weights, covariance sd^2 I for every component.
  static MixtureModel isotropic(const std::vector<Point>& means, double sd = 1.0);

  std::size_t dim() const { return dim_; }
  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Point>& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }

  double density(ConstPointRef x) const;
  double density_and_grad(ConstPointRef x, std::span<double> grad) const;
  Eigen::MatrixXd hessian(ConstPointRef x) const;
  /// One draw: component by weight, then mean + L z.
  void draw(Rng& rng, std::span<double> out) const;
  /// Half-width per coordinate covering mean +- 12 sd of every component.
  std::pair<Point, Point> bounding_box() const;

private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<Point> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> chol_;
  std::vector<Eigen::MatrixXd> precision_;
  std::vector<double> coef_;  // weight / ((2 pi)^{p/2} sqrt(det))
  std::vector<double> cumulative_;
};

enum class DensityKind { Mixture, Uniform, Circular2, Circular2Cauchy, Circular3, Circular4Cauchy };

/// Benchmark density: a Gaussian mixture, a uniform box, or one of the four
/// circular densities truncated to [-4, 4]^2 and normalized there.
class AnalyticDensity {
public:
  static AnalyticDensity mixture(MixtureModel model, std::string name = "mixture");
  static AnalyticDensity uniform(Point lower, Point upper, std::string name = "uniform");
  static AnalyticDensity circular(DensityKind kind);

  DensityKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  const MixtureModel* mixture_model() const { return mixture_ ? &*mixture_ : nullptr; }
  /// Integral of the unnormalized formula over the box (1 for mixtures and boxes).
  double normalizer() const { return normalizer_; }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }

  double operator()(ConstPointRef x) const;
  /// Density and gradient. Circular gradients use central differences with h = 1e-6.
  std::pair<double, Point> density_and_grad(ConstPointRef x) const;
  Eigen::MatrixXd hessian(ConstPointRef x) const;
  /// Unnormalized formula without truncation; the gradient flow runs on it.
  double raw(ConstPointRef x) const;

  DensityFn to_density_fn() const;

private:
  AnalyticDensity() = default;
  double circular_formula(double x, double y) const;

  DensityKind kind_ = DensityKind::Mixture;
  std::string name_;
  std::size_t dim_ = 1;
  std::shared_ptr<const MixtureModel> mixture_;
  Point lower_, upper_;
  double normalizer_ = 1.0;
  double envelope_ = 0.0;  // sup of the raw formula over the box, padded

  friend Dataset sample(const AnalyticDensity& density, std::size_t n, std::uint64_t seed);
};

/// Names accepted by named_density, in a stable order.
std::vector<std::string> density_names();
AnalyticDensity named_density(const std::string& name);

/// n i.i.d. draws. Mixtures draw component then Gaussian; uniform boxes draw
/// coordinatewise; circular densities use rejection from the box.
Dataset sample(const AnalyticDensity& density, std::size_t n, std::uint64_t seed);

struct GradientFlowConfig {
  double step = 0.01;
  double grad_tol = 1e-8;
  std::size_t max_steps = 1'000'000;
  double merge_radius = 1e-3;
  double saddle_eig_tol = 1e-6;
};

enum class FlowStatus { Converged, Saddle, MaxSteps };
std::string to_string(FlowStatus s);

struct FlowResult {
  Point terminal;
  FlowStatus status = FlowStatus::Converged;
  std::size_t steps = 0;
  /// Step halvings triggered by a decrease of f.
  std::size_t halvings = 0;
  /// Density values along the accepted steps, when requested.
  std::vector<double> trace;
};

/// RK4 integration of the ascent flow from x. Runs on the time-rescaled field
/// grad f / f, which has the same trajectories as u' = grad f, and stops when
/// |grad f| < grad_tol or when no halving of the step raises f any more.
FlowResult gradient_flow(const AnalyticDensity& density, ConstPointRef x, const GradientFlowConfig& cfg,
                         bool keep_trace = false);

/// Terminals within merge_radius share a label.
class ModeSet {
public:
  explicit ModeSet(double merge_radius) : radius_(merge_radius) {}
  int label(ConstPointRef terminal);
  int nearest(ConstPointRef x) const;
  const std::vector<Point>& modes() const { return modes_; }

private:
  double radius_;
  std::vector<Point> modes_;
};

struct TrueCluster {
  int mode_label = -1;
  Point mode;
  FlowStatus status = FlowStatus::Converged;
};

/// Flow from x and label its terminal. Saddle and max-step terminals get
/// label -1. Throws DataError when f(x) = 0.
TrueCluster true_cluster(const AnalyticDensity& density, ConstPointRef x, const GradientFlowConfig& flow,
                         ModeSet& modes);

struct TruePartition {
  ClusterSet clusters;
  std::vector<int> labels;
  std::vector<Point> modes;
  /// Points whose flow ended at a saddle or hit max_steps; they join the
  /// mode nearest to their own location.
  std::vector<std::size_t> flagged;
};

TruePartition true_partition(const AnalyticDensity& density, const Dataset& points, const GradientFlowConfig& flow);

}  // namespace ldepth
