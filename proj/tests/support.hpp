#ifndef GOALSKIT_TESTS_SUPPORT_HPP
#define GOALSKIT_TESTS_SUPPORT_HPP

#include "goalskit/dataset.hpp"
#include "goalskit/kernel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <random>

namespace oracle {

using goalskit::Index;
using goalskit::KernelConfig;
using goalskit::KernelKind;
using goalskit::Matrix;
using goalskit::Vector;

inline double kernel(const KernelConfig& cfg, const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (cfg.kind == KernelKind::linear) return a.dot(b);
  return std::exp(-cfg.theta * (a - b).squaredNorm());
}

// entry (i, i') = k(rows_a(i), rows_b(i'))
inline Matrix cross(const KernelConfig& cfg, const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < b.rows(); ++k) out(i, k) = kernel(cfg, a.row(i).transpose(), b.row(k).transpose());
  return out;
}

inline Matrix shifted(const Matrix& x, Index j, const Vector& xi) {
  Matrix s = x;
  s.col(j) += xi;
  return s;
}

inline Matrix shifted(const Matrix& x, Index j, double xi) { return shifted(x, j, Vector::Constant(x.rows(), xi)); }

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = nd(rng);
  return m;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

// standardized dataset with y = signal + noise built directly, no simgen involved
inline goalskit::Dataset random_dataset(Index n, Index j, std::mt19937_64& rng) {
  goalskit::Dataset d;
  d.x = random_matrix(n, j, rng);
  d.y = random_vector(n, rng);
  for (Index c = 0; c < std::min<Index>(j, 2); ++c) d.y += d.x.col(c);
  d.feature_names = goalskit::default_feature_names(j);
  return goalskit::standardize(d);
}

// (K + s I)^-1 y by full-pivot LU
inline Vector solve(const Matrix& k, double s, const Vector& y) {
  const Matrix a = k + s * Matrix::Identity(k.rows(), k.rows());
  return a.fullPivLu().solve(y);
}

// posterior mean of f at the training inputs
inline Vector fitted(const Matrix& k, double s, const Vector& y) { return k * solve(k, s, y); }

// Joint Gaussian posterior of z = (f, g^(1), ..., g^(J)) given y, where g^(j)
// is the latent function at the inputs shifted by xi in column j.
struct JointPosterior {
  Vector mean;
  Matrix cov;
};

inline JointPosterior joint_posterior(const KernelConfig& cfg, const Matrix& x, const Vector& y, double sigma2,
                                      double xi, const std::vector<Index>& features) {
  const Index n = x.rows();
  const Index blocks = static_cast<Index>(features.size()) + 1;
  Matrix inputs(n * blocks, x.cols());
  inputs.topRows(n) = x;
  for (Index b = 1; b < blocks; ++b) inputs.middleRows(b * n, n) = shifted(x, features[static_cast<std::size_t>(b - 1)], xi);
  const Matrix prior = cross(cfg, inputs, inputs);
  const Matrix kzf = prior.leftCols(n);
  const Matrix a = prior.topLeftCorner(n, n) + sigma2 * Matrix::Identity(n, n);
  const Eigen::FullPivLU<Matrix> lu(a);
  JointPosterior p;
  p.mean = kzf * lu.solve(y);
  p.cov = prior - kzf * lu.solve(kzf.transpose());
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  return p;
}

// linear map from z to (delta^(1), ..., delta^(J)), delta^(j) = f - g^(j)
inline Matrix delta_map(Index n, Index j) {
  Matrix m = Matrix::Zero(n * j, n * (j + 1));
  for (Index b = 0; b < j; ++b) {
    m.block(b * n, 0, n, n) = Matrix::Identity(n, n);
    m.block(b * n, (b + 1) * n, n, n) = -Matrix::Identity(n, n);
  }
  return m;
}

// symmetric square root via eigendecomposition, negative eigenvalues clipped
inline Matrix psd_root(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace oracle

#endif  // GOALSKIT_TESTS_SUPPORT_HPP
