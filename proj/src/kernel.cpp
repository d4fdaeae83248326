#include "goalskit/kernel.hpp"


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace goalskit {

namespace {

// Largest exponent magnitude allowed in the separable (rank-one) factor form
// before falling back to per-entry evaluation.
constexpr double kSeparableExpLimit = 300.0;

void check_feature(const Matrix& x, Index j) {
  if (j < 0 || j >= x.cols())
    throw std::out_of_range("feature index " + std::to_string(j) + " outside [0, " + std::to_string(x.cols()) + ")");
}

void check_gram(const Matrix& x, const GramMatrix& k) {
  if (k.size() != x.rows() || k.values().cols() != x.rows())
    throw std::invalid_argument("gram matrix size does not match design rows");
}

void require_pointwise(const KernelConfig& cfg) {
  if (cfg.kind == KernelKind::precomputed)
    throw std::invalid_argument("perturbed gram matrices need a pointwise kernel, not a precomputed gram");
}

Matrix squared_distances(const Matrix& x) {
  const Vector norms = x.rowwise().squaredNorm();
  Matrix d2 = -2.0 * (x * x.transpose());
  d2.colwise() += norms;
  d2.rowwise() += norms.transpose();
  for (Index i = 0; i < d2.rows(); ++i) {
    d2(i, i) = 0.0;
    for (Index k = i + 1; k < d2.cols(); ++k) {
      const double v = std::max(0.0, 0.5 * (d2(i, k) + d2(k, i)));
      d2(i, k) = v;
      d2(k, i) = v;
    }
  }
  return d2;
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::linear: return "linear";
    case KernelKind::precomputed: return "precomputed";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "rbf") return KernelKind::rbf;
  if (s == "linear") return KernelKind::linear;
  if (s == "precomputed") return KernelKind::precomputed;
  throw ConfigError("unknown kernel '" + s + "' (expected rbf or linear)");
}

void KernelConfig::validate() const {
  if (kind == KernelKind::rbf && !(std::isfinite(theta) && theta > 0.0))
    throw ConfigError("rbf bandwidth theta must be positive and finite");
}

Shift Shift::per_row(Vector xi) {
  Shift s;
  s.rows_ = std::move(xi);
  return s;
}

bool Shift::is_zero() const { return is_constant() ? value_ == 0.0 : (rows_.array() == 0.0).all(); }

Vector Shift::expand(Index n) const { return is_constant() ? Vector::Constant(n, value_) : rows_; }

void Shift::check(Index n) const {
  if (is_constant()) {
    if (!std::isfinite(value_)) throw std::invalid_argument("perturbation xi must be finite");
    return;
  }
  if (rows_.size() != n)
    throw std::invalid_argument("per-row perturbation has " + std::to_string(rows_.size()) + " entries, expected " +
                                std::to_string(n));
  if (!rows_.allFinite()) throw std::invalid_argument("per-row perturbation contains non-finite values");
}

double median_bandwidth(const Matrix& x, std::uint64_t seed) {
  if (x.rows() < 2) throw std::invalid_argument("median bandwidth needs at least 2 rows");
  Matrix sub;
  const Matrix* rows = &x;
  if (x.rows() > kBandwidthSubsample) {
    std::vector<Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    sub.resize(kBandwidthSubsample, x.cols());
    for (Index r = 0; r < kBandwidthSubsample; ++r) sub.row(r) = x.row(order[static_cast<std::size_t>(r)]);
    rows = &sub;
  }
  const Index n = rows->rows();
  const Matrix d2 = squared_distances(*rows);
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index k = i + 1; k < n; ++k) dist.push_back(std::sqrt(d2(i, k)));

  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) throw DataError("median pairwise distance is zero (all rows identical)");
  return 1.0 / (2.0 * median * median);
}

GramMatrix gram_matrix(const KernelConfig& cfg, const Matrix& x) {
  cfg.validate();
  if (!x.allFinite()) throw DataError("kernel input contains non-finite values");
  switch (cfg.kind) {
    case KernelKind::linear: {
      Matrix k = x * x.transpose();
      Matrix sym = 0.5 * (k + k.transpose());
      return GramMatrix(std::move(sym));
    }
    case KernelKind::rbf: {
      Matrix k = squared_distances(x);
      k = (-cfg.theta * k.array()).exp().matrix();
      k.diagonal().setOnes();
      return GramMatrix(std::move(k));
    }
    case KernelKind::precomputed: break;
  }
  throw std::invalid_argument("cannot evaluate a precomputed kernel on a design matrix");
}

Matrix perturbed_cross_gram(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, const Shift& xi) {
  require_pointwise(cfg);
  check_feature(x, j);
  check_gram(x, k);
  xi.check(x.rows());
  const Matrix& kv = k.values();
  if (xi.is_zero()) return kv;
  const Index n = x.rows();
  const auto col = x.col(j);
  Matrix b(n, n);

  if (cfg.kind == KernelKind::linear) {
    // B = K + X Xi^T: column i' gains xi_i' * x_{.j}
    for (Index c = 0; c < n; ++c) b.col(c) = kv.col(c) + xi.at(c) * col;
    return b;
  }

  const double theta = cfg.theta;
  if (xi.is_constant()) {
    const double s = xi.value();
    const double limit = 2.0 * theta * std::abs(s) * col.cwiseAbs().maxCoeff() + theta * s * s;
    if (limit < kSeparableExpLimit) {
      const Vector u = (2.0 * theta * s * col.array()).exp();
      const Vector v = (-theta * s * s - 2.0 * theta * s * col.array()).exp();
      b = u.asDiagonal() * kv * v.asDiagonal();
      return b;
    }
  }
  for (Index c = 0; c < n; ++c) {
    const double s = xi.at(c);
    for (Index r = 0; r < n; ++r)
      b(r, c) = kv(r, c) * std::exp(-theta * (s * s - 2.0 * s * (col(r) - col(c))));
  }
  return b;
}

Vector perturbed_cross_gram_tmul(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j,
                                 const Shift& xi, const Vector& v) {
  require_pointwise(cfg);
  check_feature(x, j);
  check_gram(x, k);
  xi.check(x.rows());
  const Matrix& kv = k.values();
  if (xi.is_zero()) return kv.transpose() * v;
  const auto col = x.col(j);

  if (cfg.kind == KernelKind::linear) {
    Vector out = kv.transpose() * v;
    const double proj = col.dot(v);
    for (Index c = 0; c < out.size(); ++c) out(c) += xi.at(c) * proj;
    return out;
  }

  const double theta = cfg.theta;
  if (xi.is_constant()) {
    const double s = xi.value();
    const double limit = 2.0 * theta * std::abs(s) * col.cwiseAbs().maxCoeff() + theta * s * s;
    if (limit < kSeparableExpLimit) {
      const Vector u = (2.0 * theta * s * col.array()).exp();
      const Vector w = (-theta * s * s - 2.0 * theta * s * col.array()).exp();
      // B^T v = w o (K^T (u o v)); K is symmetric
      return (w.array() * (kv * u.cwiseProduct(v)).array()).matrix();
    }
  }
  return perturbed_cross_gram(cfg, x, k, j, xi).transpose() * v;
}

Vector perturbed_cross_gram_rowsum(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j,
                                   double xi) {
  require_pointwise(cfg);
  check_feature(x, j);
  check_gram(x, k);
  const Matrix& kv = k.values();
  const Index n = x.rows();
  if (xi == 0.0) return kv.rowwise().sum();
  const auto col = x.col(j);
  if (cfg.kind == KernelKind::linear) return kv.rowwise().sum() + static_cast<double>(n) * xi * col;

  const double theta = cfg.theta;
  const double limit = 2.0 * theta * std::abs(xi) * col.cwiseAbs().maxCoeff() + theta * xi * xi;
  if (limit < kSeparableExpLimit) {
    const Vector u = (2.0 * theta * xi * col.array()).exp();
    const Vector w = (-theta * xi * xi - 2.0 * theta * xi * col.array()).exp();
    return (u.array() * (kv * w).array()).matrix();
  }
  return perturbed_cross_gram(cfg, x, k, j, Shift::constant(xi)).rowwise().sum();
}

Matrix perturbed_pair_gram(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, Index l,
                           double xi) {
  require_pointwise(cfg);
  check_feature(x, j);
  check_feature(x, l);
  check_gram(x, k);
  if (!std::isfinite(xi)) throw std::invalid_argument("perturbation xi must be finite");
  const Matrix& kv = k.values();
  if (xi == 0.0) return kv;
  const Index n = x.rows();
  const auto cj = x.col(j);
  const auto cl = x.col(l);

  if (cfg.kind == KernelKind::linear) {
    // (x_i + xi e_j).(x_i' + xi e_l)
    Matrix d = kv;
    d.colwise() += xi * cl;
    d.rowwise() += xi * cj.transpose();
    if (j == l) d.array() += xi * xi;
    return d;
  }
  if (j == l) return kv;

  const double theta = cfg.theta;
  const Vector diff = cj - cl;
  const double limit = 2.0 * theta * std::abs(xi) * diff.cwiseAbs().maxCoeff() + 2.0 * theta * xi * xi;
  if (limit < kSeparableExpLimit) {
    const Vector p = (-2.0 * theta * xi * diff.array()).exp();
    const Vector q = (-2.0 * theta * xi * xi + 2.0 * theta * xi * diff.array()).exp();
    return p.asDiagonal() * kv * q.asDiagonal();
  }
  Matrix d(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r)
      d(r, c) = kv(r, c) * std::exp(-theta * (2.0 * xi * xi + 2.0 * xi * (diff(r) - diff(c))));
  return d;
}

double perturbed_pair_gram_sum(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, Index l,
                               double xi) {
  require_pointwise(cfg);
  check_feature(x, j);
  check_feature(x, l);
  check_gram(x, k);
  const Matrix& kv = k.values();
  const double n = static_cast<double>(x.rows());
  if (xi == 0.0 || (cfg.kind == KernelKind::rbf && j == l)) return kv.sum();
  if (cfg.kind == KernelKind::linear) {
    double s = kv.sum() + n * xi * x.col(l).sum() + n * xi * x.col(j).sum();
    if (j == l) s += n * n * xi * xi;
    return s;
  }
  const double theta = cfg.theta;
  const Vector diff = x.col(j) - x.col(l);
  const double limit = 2.0 * theta * std::abs(xi) * diff.cwiseAbs().maxCoeff() + 2.0 * theta * xi * xi;
  if (limit < kSeparableExpLimit) {
    const Vector p = (-2.0 * theta * xi * diff.array()).exp();
    const Vector q = (-2.0 * theta * xi * xi + 2.0 * theta * xi * diff.array()).exp();
    return p.dot(kv * q);
  }
  return perturbed_pair_gram(cfg, x, k, j, l, xi).sum();
}

}  // namespace goalskit
