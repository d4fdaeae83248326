#include "goalskit/nn_goals.hpp"

#include "goalskit/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

namespace goalskit {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "relu";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + s + "' (expected relu, tanh or identity)");
}

Matrix activate(const Matrix& pre, Activation a) {
  switch (a) {
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::identity: return pre;
  }
  return pre;
}

InducedLikelihood::InducedLikelihood(const Matrix& h, const Vector& y) {
  const Matrix s = h * h.transpose();
  mean_diag_ = s.diagonal().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of H H^T failed");
  eigenvalues_ = es.eigenvalues().cwiseMax(0.0);
  projected_sq_ = (es.eigenvectors().transpose() * y).array().square();
}

double InducedLikelihood::operator()(double v, double sigma2) const {
  const Vector d = (v * eigenvalues_).array() + sigma2;
  const double n = static_cast<double>(d.size());
  return -0.5 * ((projected_sq_.array() / d.array()).sum() + d.array().log().sum() +
                 n * std::log(2.0 * std::numbers::pi));
}

namespace {

// maximizes f on [lo, hi] (log coordinates)
template <class F>
double golden_max(F f, double lo, double hi, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

RandomFeatureModel fit_random_features(const Dataset& d, Index width, Activation act, std::uint64_t seed,
                                       const NnFitOptions& opts) {
  if (width < 1) throw ConfigError("random-feature width must be >= 1");
  if (static_cast<double>(d.n()) * static_cast<double>(width) > kMaxActivationEntries)
    throw ConfigError("N x L = " + std::to_string(d.n() * width) + " activations exceeds the memory guard");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(d.j())));
  Matrix theta(d.j(), width);
  for (Index c = 0; c < width; ++c)
    for (Index r = 0; r < d.j(); ++r) theta(r, c) = nd(rng);
  RandomFeatureModel m = fit_with_inner_weights(d, std::move(theta), act, opts);
  m.seed = seed;
  return m;
}

RandomFeatureModel fit_with_inner_weights(const Dataset& d, Matrix inner_weights, Activation act,
                                          const NnFitOptions& opts) {
  if (!d.standardized) throw DataError("the random-feature model requires a standardized dataset");
  validate(d);
  if (inner_weights.rows() != d.j()) throw std::invalid_argument("inner weights need one row per feature");
  if (static_cast<double>(d.n()) * static_cast<double>(inner_weights.cols()) > kMaxActivationEntries)
    throw ConfigError("N x L activations exceed the memory guard");

  RandomFeatureModel m;
  m.activation = act;
  m.inner_weights = std::move(inner_weights);
  m.pre = d.x * m.inner_weights;
  m.h = activate(m.pre, act);

  const InducedLikelihood lml(m.h, d.y);
  if (!(lml.mean_diag() > 0.0)) throw NumericalError("all random-feature activations are zero");
  const double vy = sample_variance(d.y);
  const double v_scale = 1.0 / lml.mean_diag();
  double lv = std::log(opts.v ? *opts.v : v_scale);
  double ls = std::log(opts.sigma2 ? *opts.sigma2 : vy);
  const double lv_lo = std::log(opts.v_lower * v_scale), lv_hi = std::log(opts.v_upper * v_scale);
  const double ls_lo = std::log(opts.sigma2_lower * vy), ls_hi = std::log(opts.sigma2_upper * vy);
  auto obj = [&](double a, double b) { return lml(std::exp(a), std::exp(b)); };

  if (!opts.v || !opts.sigma2) {
    const Index gp = std::max<Index>(opts.grid_points, 2);
    const double step_v = (lv_hi - lv_lo) / static_cast<double>(gp - 1);
    const double step_s = (ls_hi - ls_lo) / static_cast<double>(gp - 1);
    double best = -INFINITY;
    for (Index a = 0; a < (opts.v ? 1 : gp); ++a)
      for (Index b = 0; b < (opts.sigma2 ? 1 : gp); ++b) {
        const double ca = opts.v ? lv : lv_lo + step_v * static_cast<double>(a);
        const double cb = opts.sigma2 ? ls : ls_lo + step_s * static_cast<double>(b);
        const double val = obj(ca, cb);
        if (val > best) {
          best = val;
          lv = ca;
          ls = cb;
        }
      }
    for (int round = 0; round < opts.refine_rounds; ++round) {
      if (!opts.v)
        lv = golden_max([&](double a) { return obj(a, ls); }, std::max(lv - step_v, lv_lo), std::min(lv + step_v, lv_hi),
                        opts.tolerance);
      if (!opts.sigma2)
        ls = golden_max([&](double b) { return obj(lv, b); }, std::max(ls - step_s, ls_lo), std::min(ls + step_s, ls_hi),
                        opts.tolerance);
    }
  }

  const double v = std::exp(lv);
  m.sigma2 = std::exp(ls);
  m.v_diag = Vector::Constant(m.width(), v);
  m.gp = fit_gram(d.y, induced_gram(m), KernelConfig::precomputed(), m.sigma2);

  const Vector w_bar = m.v_diag.cwiseProduct(m.h.transpose() * m.gp.alpha);
  m.residual_var = sample_variance(d.y - m.h * w_bar);
  if (!(m.sigma2 <= 2.0 * m.residual_var && m.sigma2 >= 0.5 * m.residual_var))
    m.warnings.push_back("selected sigma2 = " + std::to_string(m.sigma2) + " is not within a factor of 2 of Var(y - H w) = " +
                         std::to_string(m.residual_var));
  return m;
}

GramMatrix induced_gram(const RandomFeatureModel& m) {
  const Matrix hv = m.h * m.v_diag.cwiseSqrt().asDiagonal();
  Matrix k = hv * hv.transpose();
  return GramMatrix(0.5 * (k + k.transpose()));
}

Matrix shifted_activations(const RandomFeatureModel& m, Index j, double xi) {
  if (j < 0 || j >= m.inner_weights.rows()) throw std::out_of_range("feature index out of range");
  Matrix pre = m.pre;
  pre.rowwise() += xi * m.inner_weights.row(j);
  return activate(pre, m.activation);
}

Matrix nn_cross_gram(const RandomFeatureModel& m, Index j, double xi) {
  return m.h * m.v_diag.asDiagonal() * shifted_activations(m, j, xi).transpose();
}

GoalsReport nn_goals_scores(const RandomFeatureModel& m, const Dataset& d, double xi,
                            const std::optional<std::vector<Index>>& features) {
  if (d.n() != m.h.rows() || d.j() != m.inner_weights.rows())
    throw std::invalid_argument("random-feature model was not fitted on this dataset");
  if (!std::isfinite(xi)) throw ConfigError("xi must be finite");
  GoalsReport rep;
  rep.xi = Shift::constant(xi);
  rep.method = "nn-goals";
  rep.cfg = KernelConfig::precomputed();
  rep.sigma2 = m.sigma2;
  if (features) {
    for (Index j : *features)
      if (j < 0 || j >= d.j()) throw std::out_of_range("feature index " + std::to_string(j + 1) + " out of range");
    rep.features = *features;
  } else {
    for (Index j = 0; j < d.j(); ++j) rep.features.push_back(j);
  }
  const Index n = d.n();
  rep.local = Matrix::Zero(n, static_cast<Index>(rep.features.size()));
  if (xi == 0.0) {
    rep.warnings.emplace_back("xi = 0 is degenerate: every score is exactly zero");
  } else {
    const Vector w = m.v_diag.cwiseProduct(m.h.transpose() * m.gp.alpha);
    parallel_for(rep.features.size(), [&](std::size_t c) {
      rep.local.col(static_cast<Index>(c)) = m.gp.f_hat - shifted_activations(m, rep.features[c], xi) * w;
    });
  }
  rep.global = rep.local.colwise().mean().transpose();
  return rep;
}

}  // namespace goalskit
