#include "goalskit/rate.hpp"

#include "goalskit/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>

namespace goalskit {

Matrix pseudo_inverse(const Matrix& x, double rtol) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rtol * s(0) : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

EsaPosterior effect_size_analog(const FittedGP& g, const Dataset& d) {
  if (g.n() != d.n()) throw std::invalid_argument("fitted GP and dataset have different row counts");
  const Matrix p = pseudo_inverse(d.x);
  const Matrix& k = g.k.values();
  EsaPosterior e;
  e.mean = p * g.f_hat;
  // X^+ (K - K A^-1 K) X^+^T
  const Matrix kpt = k * p.transpose();
  const Matrix w = g.half_solve(kpt);
  Matrix cov = p * kpt - w.transpose() * w;
  e.cov = 0.5 * (cov + cov.transpose());
  return e;
}

RateReport rate_scores(const EsaPosterior& e) {
  const Index jn = e.mean.size();
  if (jn < 2) throw std::invalid_argument("RATE needs at least two features");
  if (e.cov.rows() != jn || e.cov.cols() != jn) throw std::invalid_argument("ESA covariance has the wrong shape");

  const double jitter = 1e-8 * e.cov.trace() / static_cast<double>(jn);
  Matrix s = e.cov;
  s.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("ESA covariance is not positive definite after jitter");
  const Matrix precision = llt.solve(Matrix::Identity(jn, jn));

  RateReport rep;
  rep.kld = Vector::Zero(jn);
  std::vector<char> degenerate(static_cast<std::size_t>(jn), 0);
  parallel_for(static_cast<std::size_t>(jn), [&](std::size_t c) {
    const Index j = static_cast<Index>(c);
    if (!(e.cov(j, j) > jitter)) {
      degenerate[c] = 1;
      return;
    }
    const double var_j = s(j, j);
    // q = c^T S_{-j,-j}^{-1} c with c = S_{-j,j}, recovered from the precision column
    double cross = 0.0;
    for (Index i = 0; i < jn; ++i)
      if (i != j) cross += s(i, j) * precision(i, j);
    const double q = -cross / precision(j, j);
    const double eps = q / (var_j - q);  // var_j * precision_jj - 1
    const double mu = e.mean(j);
    const double kld = 0.5 * ((eps - std::log1p(eps)) + mu * mu * eps / var_j);
    rep.kld(j) = kld > 0.0 ? kld : 0.0;
  });
  for (Index j = 0; j < jn; ++j)
    if (degenerate[static_cast<std::size_t>(j)])
      rep.warnings.push_back("feature " + std::to_string(j + 1) +
                             ": effect size analog variance at the jitter floor; KLD set to 0");

  const double total = rep.kld.sum();
  if (total > 0.0) {
    rep.rate = rep.kld / total;
  } else {
    rep.rate = Vector::Constant(jn, 1.0 / static_cast<double>(jn));
    rep.warnings.emplace_back("all KLD values are zero; RATE falls back to uniform 1/J");
  }
  return rep;
}

}  // namespace goalskit
