#include "ldepth/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace ldepth {

MixtureModel::MixtureModel(std::vector<double> weights, std::vector<Point> means,
                           std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (weights_.empty()) throw std::invalid_argument("MixtureModel: no components");
  if (means_.size() != weights_.size() || covariances_.size() != weights_.size()) {
    throw std::invalid_argument("MixtureModel: weights, means and covariances differ in length");
  }
  dim_ = means_.front().size();
  if (dim_ == 0) throw std::invalid_argument("MixtureModel: zero-dimensional means");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("MixtureModel: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MixtureModel: weights sum to " + std::to_string(total) + ", not 1");
  }
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const auto& s = covariances_[k];
    if (means_[k].size() != dim_) throw std::invalid_argument("MixtureModel: mean dimension mismatch");
    if (s.rows() != static_cast<Eigen::Index>(dim_) || s.cols() != static_cast<Eigen::Index>(dim_)) {
      throw std::invalid_argument("MixtureModel: covariance shape mismatch");
    }
    if (!s.isApprox(s.transpose(), 1e-12)) throw std::invalid_argument("MixtureModel: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("MixtureModel: covariance " + std::to_string(k) + " is not positive definite");
    }
    Eigen::MatrixXd l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    chol_.push_back(l);
    precision_.push_back(llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols())));
    coef_.push_back(weights_[k] * std::exp(-0.5 * (static_cast<double>(dim_) * log2pi + logdet)));
    acc += weights_[k];
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

MixtureModel MixtureModel::isotropic(const std::vector<Point>& means, double sd) {
  const std::size_t p = means.front().size();
  const double w = 1.0 / static_cast<double>(means.size());
  std::vector<double> weights(means.size(), w);
  // Keep the sum at exactly 1 for component counts like 3.
  weights.back() = 1.0 - w * static_cast<double>(means.size() - 1);
  std::vector<Eigen::MatrixXd> covs(means.size(), sd * sd * Eigen::MatrixXd::Identity(p, p));
  return MixtureModel(weights, means, covs);
}

double MixtureModel::density(ConstPointRef x) const {
  double f = 0.0;
  Eigen::VectorXd d(dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim_; ++i) d(i) = x[i] - means_[k][i];
    f += coef_[k] * std::exp(-0.5 * d.dot(precision_[k] * d));
  }
  return f;
}

double MixtureModel::density_and_grad(ConstPointRef x, std::span<double> grad) const {
  double f = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  Eigen::VectorXd d(dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim_; ++i) d(i) = x[i] - means_[k][i];
    const Eigen::VectorXd pd = precision_[k] * d;
    const double phi = coef_[k] * std::exp(-0.5 * d.dot(pd));
    f += phi;
    for (std::size_t i = 0; i < dim_; ++i) grad[i] -= phi * pd(i);
  }
  return f;
}

Eigen::MatrixXd MixtureModel::hessian(ConstPointRef x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  Eigen::VectorXd d(dim_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim_; ++i) d(i) = x[i] - means_[k][i];
    const Eigen::VectorXd pd = precision_[k] * d;
    const double phi = coef_[k] * std::exp(-0.5 * d.dot(pd));
    h += phi * (pd * pd.transpose() - precision_[k]);
  }
  return h;
}

void MixtureModel::draw(Rng& rng, std::span<double> out) const {
  const double u = rng.uniform();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                           cumulative_.begin());
  k = std::min(k, weights_.size() - 1);
  Eigen::VectorXd z(dim_);
  for (std::size_t i = 0; i < dim_; ++i) z(i) = rng.normal();
  const Eigen::VectorXd y = chol_[k] * z;
  for (std::size_t i = 0; i < dim_; ++i) out[i] = means_[k][i] + y(i);
}

std::pair<Point, Point> MixtureModel::bounding_box() const {
  Point lo(dim_, kInf), hi(dim_, -kInf);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim_; ++i) {
      const double w = 12.0 * std::sqrt(covariances_[k](i, i));
      lo[i] = std::min(lo[i], means_[k][i] - w);
      hi[i] = std::max(hi[i], means_[k][i] + w);
    }
  }
  return {lo, hi};
}

// --- AnalyticDensity -------------------------------------------------------

namespace {

constexpr double kCircularHalfWidth = 4.0;

double circular_raw(DensityKind kind, double x, double y) {
  const double r = std::hypot(x, y);
  const double c = r > 0.0 ? std::clamp(x / r, -1.0, 1.0) : 0.0;
  auto sq = [](double v) { return v * v; };
  switch (kind) {
    case DensityKind::Circular2:
      return 0.5 * std::exp(-12.5 * sq(r - 2.0)) * (1.1 - c) + 0.5 * std::exp(-12.5 * sq(r - 0.5)) * (1.1 + c);
    case DensityKind::Circular2Cauchy:
      return 0.5 * (1.1 + c) / (1.0 + 25.0 * sq(r - 2.0)) + 0.5 * (1.1 + c) / (1.0 + 25.0 * sq(r - 0.5));
    case DensityKind::Circular3: {
      const double a = 200.0 / 9.0;
      return 0.3 * std::exp(-a * sq(r - 1.5)) * (1.1 - c) + 0.15 * std::exp(-a * sq(r - 2.5)) * (1.1 + c) +
             0.55 * std::exp(-a * sq(r - 0.5)) * (1.1 + c);
    }
    case DensityKind::Circular4Cauchy: return (2.0 + std::cos(4.0 * std::acos(c))) / (1.0 + sq(r - 2.0));
    default: throw std::logic_error("circular_raw: not a circular density");
  }
}

struct CircularCache {
  double normalizer;
  double envelope;
};

// Box integral and padded supremum of each circular formula, computed once.
CircularCache circular_constants(DensityKind kind) {
  static std::mutex mu;
  static std::map<DensityKind, CircularCache> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(kind); it != cache.end()) return it->second;
  const double w = kCircularHalfWidth;
  const double z = integrate_1d(
      [&](double x) {
        return integrate_1d([&](double y) { return circular_raw(kind, x, y); }, -w, w, 1e-11, 1e-10, 50'000'000);
      },
      -w, w, 1e-9, 1e-10, 50'000'000);
  double sup = 0.0;
  const int grid = 800;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      sup = std::max(sup, circular_raw(kind, -w + 2.0 * w * i / grid, -w + 2.0 * w * j / grid));
    }
  }
  CircularCache c{z, 1.25 * sup};
  cache.emplace(kind, c);
  return c;
}

std::string circular_name(DensityKind kind) {
  switch (kind) {
    case DensityKind::Circular2: return "circular2";
    case DensityKind::Circular2Cauchy: return "circular2_cauchy";
    case DensityKind::Circular3: return "circular3";
    case DensityKind::Circular4Cauchy: return "circular4_cauchy";
    default: throw std::invalid_argument("not a circular density kind");
  }
}

bool in_box(ConstPointRef x, const Point& lo, const Point& hi) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

}  // namespace

AnalyticDensity AnalyticDensity::mixture(MixtureModel model, std::string name) {
  AnalyticDensity d;
  d.kind_ = DensityKind::Mixture;
  d.name_ = std::move(name);
  d.dim_ = model.dim();
  std::tie(d.lower_, d.upper_) = model.bounding_box();
  d.mixture_ = std::make_shared<const MixtureModel>(std::move(model));
  return d;
}

AnalyticDensity AnalyticDensity::uniform(Point lower, Point upper, std::string name) {
  if (lower.size() != upper.size() || lower.empty()) throw std::invalid_argument("uniform: bad box");
  double vol = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(upper[i] > lower[i])) throw std::invalid_argument("uniform: empty box");
    vol *= upper[i] - lower[i];
  }
  AnalyticDensity d;
  d.kind_ = DensityKind::Uniform;
  d.name_ = std::move(name);
  d.dim_ = lower.size();
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  d.normalizer_ = vol;
  d.envelope_ = 1.0;
  return d;
}

AnalyticDensity AnalyticDensity::circular(DensityKind kind) {
  AnalyticDensity d;
  d.kind_ = kind;
  d.name_ = circular_name(kind);
  d.dim_ = 2;
  d.lower_ = {-kCircularHalfWidth, -kCircularHalfWidth};
  d.upper_ = {kCircularHalfWidth, kCircularHalfWidth};
  const auto c = circular_constants(kind);
  d.normalizer_ = c.normalizer;
  d.envelope_ = c.envelope;
  return d;
}

double AnalyticDensity::circular_formula(double x, double y) const { return circular_raw(kind_, x, y); }

double AnalyticDensity::raw(ConstPointRef x) const {
  switch (kind_) {
    case DensityKind::Mixture: return mixture_->density(x);
    case DensityKind::Uniform: return in_box(x, lower_, upper_) ? 1.0 : 0.0;
    default: return circular_formula(x[0], x[1]);
  }
}

double AnalyticDensity::operator()(ConstPointRef x) const {
  if (x.size() != dim_) throw std::invalid_argument("density: dimension mismatch");
  if (kind_ == DensityKind::Mixture) return mixture_->density(x);
  if (!in_box(x, lower_, upper_)) return 0.0;
  return raw(x) / normalizer_;
}

std::pair<double, Point> AnalyticDensity::density_and_grad(ConstPointRef x) const {
  if (x.size() != dim_) throw std::invalid_argument("density_and_grad: dimension mismatch");
  Point g(dim_, 0.0);
  if (kind_ == DensityKind::Mixture) {
    const double f = mixture_->density_and_grad(x, g);
    return {f, g};
  }
  if (kind_ == DensityKind::Uniform || !in_box(x, lower_, upper_)) return {(*this)(x), g};
  const double h = 1e-6;
  const double scale = 1.0 / normalizer_;
  g[0] = (circular_formula(x[0] + h, x[1]) - circular_formula(x[0] - h, x[1])) / (2 * h) * scale;
  g[1] = (circular_formula(x[0], x[1] + h) - circular_formula(x[0], x[1] - h)) / (2 * h) * scale;
  return {circular_formula(x[0], x[1]) * scale, g};
}

Eigen::MatrixXd AnalyticDensity::hessian(ConstPointRef x) const {
  if (kind_ == DensityKind::Mixture) return mixture_->hessian(x);
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(dim_, dim_);
  if (kind_ == DensityKind::Uniform) return hm;
  const double h = 1e-4;
  for (std::size_t j = 0; j < dim_; ++j) {
    Point a(x.begin(), x.end()), b(x.begin(), x.end());
    a[j] += h;
    b[j] -= h;
    const auto ga = density_and_grad(a).second;
    const auto gb = density_and_grad(b).second;
    for (std::size_t i = 0; i < dim_; ++i) hm(i, j) = (ga[i] - gb[i]) / (2 * h);
  }
  return 0.5 * (hm + hm.transpose());
}

DensityFn AnalyticDensity::to_density_fn() const {
  auto self = std::make_shared<const AnalyticDensity>(*this);
  DensityFn f;
  f.eval = [self](ConstPointRef x) { return (*self)(x); };
  f.dim = dim_;
  f.lower = lower_;
  f.upper = upper_;
  f.name = name_;
  return f;
}

std::vector<std::string> density_names() {
  return {"bimodal",    "quadrimodal",  "bimodal_iv", "trimodal_iii",       "quadrimodal_l",
          "fountain10", "mult_bimodal", "mult_quadrimodal", "circular2",    "circular2_cauchy",
          "circular3",  "circular4_cauchy", "normal", "uniform",           "mixture_1d_bimodal",
          "quadrimodal_1d"};
}

namespace {

Eigen::MatrixXd cov2(double a, double b, double c) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, c;
  return m;
}

}  // namespace

AnalyticDensity named_density(const std::string& name) {
  if (name == "bimodal") return AnalyticDensity::mixture(MixtureModel::isotropic({{-2, 0}, {2, 0}}), name);
  if (name == "quadrimodal") {
    return AnalyticDensity::mixture(MixtureModel::isotropic({{-2, 2}, {-2, -2}, {2, -2}, {2, 2}}), name);
  }
  if (name == "bimodal_iv") {
    const double s = 4.0 / 9.0;
    return AnalyticDensity::mixture(
        MixtureModel({0.5, 0.5}, {{1, -1}, {-1, 1}}, {cov2(s, 0.7 * s, s), cov2(s, 0, s)}), name);
  }
  if (name == "trimodal_iii") {
    const double a = 9.0 / 25.0, c = 49.0 / 100.0, h = 2.0 * std::sqrt(3.0) / 3.0;
    return AnalyticDensity::mixture(MixtureModel({3.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0}, {{-1, 0}, {1, h}, {1, -h}},
                                                 {cov2(a, 0.7 * a, c), cov2(a, 0, c), cov2(a, 0, c)}),
                                    name);
  }
  if (name == "quadrimodal_l") {
    const double s = 4.0 / 9.0;
    return AnalyticDensity::mixture(
        MixtureModel({1.0 / 8, 3.0 / 8, 1.0 / 8, 3.0 / 8}, {{-1, 1}, {-1, -1}, {1, -1}, {1, 1}},
                     {cov2(s, 0.4 * s, s), cov2(s, 0.6 * s, s), cov2(s, -0.7 * s, s), cov2(s, -0.5 * s, s)}),
        name);
  }
  if (name == "fountain10") {
    const double t = 1.0 / 16.0;
    return AnalyticDensity::mixture(
        MixtureModel({0.5, 0.1, 0.1, 0.1, 0.1, 0.1}, {{0, 0}, {0, 0}, {-1, 1}, {-1, -1}, {1, -1}, {1, 1}},
                     {cov2(1, 0, 1), cov2(t, 0, t), cov2(t, 0, t), cov2(t, 0, t), cov2(t, 0, t), cov2(t, 0, t)}),
        name);
  }
  if (name == "mult_bimodal") {
    return AnalyticDensity::mixture(MixtureModel::isotropic({{-2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}), name);
  }
  if (name == "mult_quadrimodal") {
    return AnalyticDensity::mixture(
        MixtureModel::isotropic({{-2, 2, 0, 0, 0}, {-2, -2, 0, 0, 0}, {2, -2, 0, 0, 0}, {2, 2, 0, 0, 0}}), name);
  }
  if (name == "circular2") return AnalyticDensity::circular(DensityKind::Circular2);
  if (name == "circular2_cauchy") return AnalyticDensity::circular(DensityKind::Circular2Cauchy);
  if (name == "circular3") return AnalyticDensity::circular(DensityKind::Circular3);
  if (name == "circular4_cauchy") return AnalyticDensity::circular(DensityKind::Circular4Cauchy);
  if (name == "normal") return AnalyticDensity::mixture(MixtureModel::isotropic({{0.0}}), name);
  if (name == "uniform") return AnalyticDensity::uniform({0.0}, {1.0}, name);
  if (name == "mixture_1d_bimodal") return AnalyticDensity::mixture(MixtureModel::isotropic({{-2.0}, {2.0}}), name);
  if (name == "quadrimodal_1d") {
    auto v = [](double s) { return Eigen::MatrixXd::Constant(1, 1, s * s); };
    return AnalyticDensity::mixture(
        MixtureModel({0.25, 0.5, 0.15, 0.1}, {{-2.0}, {0.0}, {3.0}, {4.0}}, {v(0.5), v(0.8), v(0.5), v(0.2)}), name);
  }
  throw std::invalid_argument("unknown density '" + name + "'");
}

Dataset sample(const AnalyticDensity& density, std::size_t n, std::uint64_t seed) {
  const std::size_t p = density.dim();
  Dataset out(n, p);
  Rng rng(seed);
  switch (density.kind()) {
    case DensityKind::Mixture:
      for (std::size_t i = 0; i < n; ++i) density.mixture_model()->draw(rng, out.row(i));
      return out;
    case DensityKind::Uniform:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p; ++k) out.row(i)[k] = rng.uniform(density.lower()[k], density.upper()[k]);
      return out;
    default: break;
  }
  double envelope = density.envelope_;
  for (;;) {
    bool violated = false;
    for (std::size_t i = 0; i < n && !violated; ++i) {
      for (;;) {
        const double x = rng.uniform(density.lower()[0], density.upper()[0]);
        const double y = rng.uniform(density.lower()[1], density.upper()[1]);
        const double f = density.circular_formula(x, y);
        if (f > envelope) {
          // The grid missed the supremum: widen the envelope and start over.
          envelope = 2.0 * f;
          violated = true;
          break;
        }
        if (rng.uniform() * envelope <= f) {
          out.row(i)[0] = x;
          out.row(i)[1] = y;
          break;
        }
      }
    }
    if (!violated) return out;
    rng = Rng(seed, 1);
  }
}

// --- gradient flow -----------------------------------------------------------

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::Saddle: return "saddle";
    case FlowStatus::MaxSteps: return "max_steps";
  }
  return "unknown";
}

namespace {

struct FieldEval {
  double f;
  Point grad;
};

// Untruncated formula and its gradient; normalization does not change the
// rescaled field.
FieldEval raw_eval(const AnalyticDensity& d, ConstPointRef u) {
  if (d.kind() == DensityKind::Mixture) {
    Point g(d.dim());
    const double f = d.mixture_model()->density_and_grad(u, g);
    return {f, g};
  }
  Point g(d.dim(), 0.0);
  if (d.kind() == DensityKind::Uniform) return {d.raw(u), g};
  const double h = 1e-6;
  Point a(u.begin(), u.end());
  for (std::size_t i = 0; i < d.dim(); ++i) {
    a[i] = u[i] + h;
    const double fp = d.raw(a);
    a[i] = u[i] - h;
    const double fm = d.raw(a);
    a[i] = u[i];
    g[i] = (fp - fm) / (2 * h);
  }
  return {d.raw(u), g};
}

bool is_saddle(const AnalyticDensity& d, ConstPointRef u, double tol) {
  const Eigen::MatrixXd h = d.hessian(u);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() >= -tol;
}

}  // namespace

FlowResult gradient_flow(const AnalyticDensity& density, ConstPointRef x, const GradientFlowConfig& cfg,
                         bool keep_trace) {
  if (!(cfg.step > 0.0) || !(cfg.grad_tol > 0.0)) throw std::invalid_argument("gradient_flow: bad config");
  const std::size_t p = density.dim();
  if (x.size() != p) throw std::invalid_argument("gradient_flow: dimension mismatch");
  FlowResult res;
  Point u(x.begin(), x.end());
  FieldEval cur = raw_eval(density, u);
  if (!(cur.f > 0.0)) throw DataError("gradient_flow: start point has zero density");
  if (keep_trace) res.trace.push_back(cur.f);

  Point k1(p), k2(p), k3(p), k4(p), tmp(p), next(p);
  auto rescaled = [&](const Point& v, Point& out) {
    const auto e = raw_eval(density, v);
    if (!(e.f > 0.0)) return false;
    for (std::size_t i = 0; i < p; ++i) out[i] = e.grad[i] / e.f;
    return true;
  };

  double h = cfg.step;
  for (res.steps = 0; res.steps < cfg.max_steps; ++res.steps) {
    if (norm(cur.grad) < cfg.grad_tol) break;
    for (std::size_t i = 0; i < p; ++i) k1[i] = cur.grad[i] / cur.f;
    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving) {
      bool ok = true;
      for (std::size_t i = 0; i < p; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
      ok = ok && rescaled(tmp, k2);
      if (ok) {
        for (std::size_t i = 0; i < p; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
        ok = rescaled(tmp, k3);
      }
      if (ok) {
        for (std::size_t i = 0; i < p; ++i) tmp[i] = u[i] + h * k3[i];
        ok = rescaled(tmp, k4);
      }
      if (ok) {
        for (std::size_t i = 0; i < p; ++i) next[i] = u[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        const FieldEval e = raw_eval(density, next);
        if (e.f > cur.f) {
          u = next;
          cur = e;
          accepted = true;
          break;
        }
      }
      h *= 0.5;
      ++res.halvings;
    }
    if (!accepted) break;  // no ascent left at machine precision
    if (keep_trace) res.trace.push_back(cur.f);
    h = std::min(cfg.step, 2.0 * h);
  }
  res.terminal = u;
  if (res.steps >= cfg.max_steps) {
    res.status = FlowStatus::MaxSteps;
  } else {
    res.status = is_saddle(density, u, cfg.saddle_eig_tol) ? FlowStatus::Saddle : FlowStatus::Converged;
  }
  return res;
}

int ModeSet::label(ConstPointRef terminal) {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (distance(modes_[i], terminal) <= radius_) return static_cast<int>(i);
  }
  modes_.emplace_back(terminal.begin(), terminal.end());
  return static_cast<int>(modes_.size() - 1);
}

int ModeSet::nearest(ConstPointRef x) const {
  int best = -1;
  double bd = kInf;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const double d = distance(modes_[i], x);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

TrueCluster true_cluster(const AnalyticDensity& density, ConstPointRef x, const GradientFlowConfig& flow,
                         ModeSet& modes) {
  if (!(density(x) > 0.0)) throw DataError("true_cluster: f(x) = 0");
  const FlowResult r = gradient_flow(density, x, flow);
  TrueCluster out;
  out.mode = r.terminal;
  out.status = r.status;
  if (r.status == FlowStatus::Converged) out.mode_label = modes.label(r.terminal);
  return out;
}

TruePartition true_partition(const AnalyticDensity& density, const Dataset& points, const GradientFlowConfig& flow) {
  const std::size_t n = points.size();
  std::vector<FlowResult> flows(n);
  parallel_for(n, [&](std::size_t i) { flows[i] = gradient_flow(density, points.row(i), flow); });

  ModeSet modes(flow.merge_radius);
  TruePartition out;
  out.labels.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (flows[i].status == FlowStatus::Converged) out.labels[i] = modes.label(flows[i].terminal);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] >= 0) continue;
    out.flagged.push_back(i);
    out.labels[i] = modes.nearest(points.row(i));
  }
  out.modes = modes.modes();
  out.clusters = ClusterSet::from_labels(out.labels);
  return out;
}

}  // namespace ldepth
