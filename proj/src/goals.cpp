#include "goalskit/goals.hpp"

#include "goalskit/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

namespace goalskit {

namespace {

void check_model(const FittedGP& g, const Dataset& d) {
  if (g.n() != d.n()) throw std::invalid_argument("fitted GP and dataset have different row counts");
  if (g.cfg.kind == KernelKind::precomputed)
    throw std::invalid_argument("GOALS needs a pointwise kernel; use goals_mean_from_cross_gram for precomputed grams");
}

void check_index(const Dataset& d, Index j) {
  if (j < 0 || j >= d.j())
    throw std::out_of_range("feature index " + std::to_string(j) + " outside [0, " + std::to_string(d.j()) + ")");
}

Vector local_scores(const FittedGP& g, const Dataset& d, Index j, const Shift& xi, GoalsPath path) {
  const Index n = d.n();
  if (xi.is_zero()) return Vector::Zero(n);
  if (path == GoalsPath::generic) {
    const Matrix b = perturbed_cross_gram(g.cfg, d.x, g.k, j, xi);
    return (g.k.values() - b.transpose()) * g.alpha;
  }
  if (g.cfg.kind == KernelKind::linear) {
    // B^T = K + xi 1 x_j^T, so delta_i = -xi_i * x_j^T alpha
    const double proj = d.x.col(j).dot(g.alpha);
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = -xi.at(i) * proj;
    return out;
  }
  return g.f_hat - perturbed_cross_gram_tmul(g.cfg, d.x, g.k, j, xi, g.alpha);
}

// Half-solved blocks shared by the covariance expressions.
struct CovarianceTerms {
  Matrix vk;  // L^-1 K
  Matrix kak;  // K A^-1 K
};

CovarianceTerms covariance_terms(const FittedGP& g) {
  CovarianceTerms t;
  t.vk = g.half_solve(g.k.values());
  t.kak = t.vk.transpose() * t.vk;
  return t;
}

Matrix cross_block(const FittedGP& g, const Dataset& d, double xi, Index j, Index l, const CovarianceTerms& t,
                   const Matrix& bj, const Matrix& vj, const Matrix& bl, const Matrix& vl) {
  const Matrix& k = g.k.values();
  const Matrix dm = perturbed_pair_gram(g.cfg, d.x, g.k, j, l, xi);
  // K - KA^-1K + D - Bj^T A^-1 Bl - [Bj^T - Bj^T A^-1 K + Bl - K A^-1 Bl]
  Matrix s = k - t.kak + dm - vj.transpose() * vl;
  s -= bj.transpose();
  s += vj.transpose() * t.vk;
  s -= bl;
  s += t.vk.transpose() * vl;
  return s;
}

Matrix marginal_block(const FittedGP& g, const Dataset& d, double xi, Index j, const CovarianceTerms& t,
                      const Matrix& bj, const Matrix& vj, CovarianceFormula formula) {
  Matrix s;
  if (formula == CovarianceFormula::derived) {
    s = cross_block(g, d, xi, j, j, t, bj, vj, bj, vj);
  } else {
    const Matrix bab = vj.transpose() * vj;
    const Matrix bak = vj.transpose() * t.vk;
    s = t.kak - bab - (bj.transpose() - bak + bj - bak.transpose());
  }
  return 0.5 * (s + s.transpose());
}

}  // namespace

GoalsReport goals_local(const FittedGP& g, const Dataset& d, const Shift& xi, const GoalsOptions& opts) {
  check_model(g, d);
  xi.check(d.n());

  GoalsReport rep;
  rep.xi = xi;
  rep.cfg = g.cfg;
  rep.sigma2 = g.sigma2;
  if (opts.features) {
    rep.features = *opts.features;
    for (Index j : rep.features) check_index(d, j);
  } else {
    rep.features.resize(static_cast<std::size_t>(d.j()));
    std::iota(rep.features.begin(), rep.features.end(), Index{0});
  }
  if (xi.is_zero()) rep.warnings.emplace_back("xi = 0 is degenerate: every GOALS score is exactly zero");

  const Index n = d.n();
  const Index m = static_cast<Index>(rep.features.size());
  rep.local.resize(n, m);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t c) {
    rep.local.col(static_cast<Index>(c)) =
        local_scores(g, d, rep.features[c], xi, opts.path);
  });
  rep.global = rep.local.colwise().mean().transpose();

  if (opts.local_sd) {
    if (!xi.is_constant()) throw std::invalid_argument("posterior SDs are only available for a constant xi");
    Matrix sd = Matrix::Zero(n, m);
    if (!xi.is_zero()) {
      const CovarianceTerms t = covariance_terms(g);
      parallel_for(static_cast<std::size_t>(m), [&](std::size_t c) {
        const Index j = rep.features[c];
        const Matrix bj = perturbed_cross_gram(g.cfg, d.x, g.k, j, xi);
        const Matrix vj = g.half_solve(bj);
        const Matrix s = marginal_block(g, d, xi.value(), j, t, bj, vj, CovarianceFormula::derived);
        sd.col(static_cast<Index>(c)) = s.diagonal().cwiseMax(0.0).cwiseSqrt();
      });
    }
    rep.local_sd = std::move(sd);
  }
  if (opts.global_cov) {
    if (!xi.is_constant()) throw std::invalid_argument("global covariance is only available for a constant xi");
    const GlobalMoments gm = goals_global_moments(g, d, xi.value());
    Matrix cov(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) cov(a, b) = gm.cov(rep.features[a], rep.features[b]);
    rep.global_cov = std::move(cov);
  }
  return rep;
}

Matrix goals_local_cov(const FittedGP& g, const Dataset& d, double xi, Index j, std::optional<Index> l,
                       CovarianceFormula formula) {
  check_model(g, d);
  check_index(d, j);
  if (l) check_index(d, *l);
  if (!std::isfinite(xi)) throw std::invalid_argument("perturbation xi must be finite");
  const Index n = d.n();
  if (xi == 0.0) return Matrix::Zero(n, n);

  const CovarianceTerms t = covariance_terms(g);
  const Matrix bj = perturbed_cross_gram(g.cfg, d.x, g.k, j, Shift::constant(xi));
  const Matrix vj = g.half_solve(bj);
  if (!l || *l == j) return marginal_block(g, d, xi, j, t, bj, vj, formula);
  const Matrix bl = perturbed_cross_gram(g.cfg, d.x, g.k, *l, Shift::constant(xi));
  const Matrix vl = g.half_solve(bl);
  return cross_block(g, d, xi, j, *l, t, bj, vj, bl, vl);
}

GlobalMoments goals_global_moments(const FittedGP& g, const Dataset& d, double xi) {
  check_model(g, d);
  if (!std::isfinite(xi)) throw std::invalid_argument("perturbation xi must be finite");
  const Index jn = d.j();
  const double n = static_cast<double>(d.n());

  GlobalMoments gm;
  gm.mean = goals_local(g, d, xi).global;
  if (xi == 0.0) {
    gm.cov = Matrix::Zero(jn, jn);
    return gm;
  }

  const Matrix& k = g.k.values();
  const Vector k1 = k.rowwise().sum();
  const Vector vk1 = g.half_solve(k1);
  const double lambda = k1.sum() - vk1.squaredNorm();

  Matrix vb(d.n(), jn);  // columns L^-1 B^(j) 1
  Vector psi(jn);
  parallel_for(static_cast<std::size_t>(jn), [&](std::size_t c) {
    const Index j = static_cast<Index>(c);
    const Vector bj1 = perturbed_cross_gram_rowsum(g.cfg, d.x, g.k, j, xi);
    vb.col(j) = g.half_solve(bj1);
    psi(j) = bj1.sum() - vk1.dot(vb.col(j));
  });
  const Matrix bab = vb.transpose() * vb;

  gm.cov.resize(jn, jn);
  parallel_for(static_cast<std::size_t>(jn), [&](std::size_t c) {
    const Index j = static_cast<Index>(c);
    for (Index l = j; l < jn; ++l) {
      const double alpha_jl = perturbed_pair_gram_sum(g.cfg, d.x, g.k, j, l, xi) - bab(j, l);
      const double v = (lambda + alpha_jl - psi(j) - psi(l)) / (n * n);
      gm.cov(j, l) = v;
      gm.cov(l, j) = v;
    }
  });
  return gm;
}

Matrix goals_joint_covariance(const FittedGP& g, const Dataset& d, double xi, CovarianceFormula formula) {
  check_model(g, d);
  const Index n = d.n();
  const Index jn = d.j();
  Matrix cov = Matrix::Zero(n * jn, n * jn);
  if (xi == 0.0) return cov;
  const CovarianceTerms t = covariance_terms(g);
  std::vector<Matrix> b(static_cast<std::size_t>(jn));
  std::vector<Matrix> v(static_cast<std::size_t>(jn));
  for (Index j = 0; j < jn; ++j) {
    b[static_cast<std::size_t>(j)] = perturbed_cross_gram(g.cfg, d.x, g.k, j, Shift::constant(xi));
    v[static_cast<std::size_t>(j)] = g.half_solve(b[static_cast<std::size_t>(j)]);
  }
  for (Index j = 0; j < jn; ++j) {
    const auto& bj = b[static_cast<std::size_t>(j)];
    const auto& vj = v[static_cast<std::size_t>(j)];
    cov.block(j * n, j * n, n, n) = marginal_block(g, d, xi, j, t, bj, vj, formula);
    for (Index l = j + 1; l < jn; ++l) {
      const Matrix s = cross_block(g, d, xi, j, l, t, bj, vj, b[static_cast<std::size_t>(l)],
                                   v[static_cast<std::size_t>(l)]);
      cov.block(j * n, l * n, n, n) = s;
      cov.block(l * n, j * n, n, n) = s.transpose();
    }
  }
  return cov;
}

Matrix goals_sample(const FittedGP& g, const Dataset& d, double xi, Index n_draws, std::uint64_t seed) {
  check_model(g, d);
  const Index n = d.n();
  const Index dim = n * d.j();
  if (dim > kMaxJointSampleSize)
    throw std::invalid_argument("joint GOALS sampling needs N*J <= " + std::to_string(kMaxJointSampleSize) + ", got " +
                                std::to_string(dim));
  if (n_draws < 1) throw std::invalid_argument("need at least one draw");
  Matrix draws = Matrix::Zero(n_draws, dim);
  if (xi == 0.0) return draws;

  const GoalsReport rep = goals_local(g, d, xi);
  Vector mean(dim);
  for (Index j = 0; j < d.j(); ++j) mean.segment(j * n, n) = rep.local.col(j);

  const Matrix cov = goals_joint_covariance(g, d, xi);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the GOALS covariance failed");
  const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector z(dim);
  for (Index r = 0; r < n_draws; ++r) {
    for (Index i = 0; i < dim; ++i) z(i) = normal(rng);
    draws.row(r) = (mean + root * z).transpose();
  }
  return draws;
}

Vector goals_mean_from_cross_gram(const FittedGP& g, const Matrix& b) {
  if (b.rows() != g.n() || b.cols() != g.n()) throw std::invalid_argument("cross-gram size does not match the model");
  return (g.k.values() - b.transpose()) * g.alpha;
}

std::vector<Index> rank_by_magnitude(const Vector& scores) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(scores(a)) > std::abs(scores(b)); });
  return order;
}

}  // namespace goalskit
