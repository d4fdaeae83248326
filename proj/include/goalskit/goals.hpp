#ifndef GOALSKIT_GOALS_HPP
#define GOALSKIT_GOALS_HPP

#include "goalskit/gp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace goalskit {

/// Local and global importance from shifting one feature at a time.
///
/// Column c of `local` holds the posterior mean of f - g^(j) for feature
/// j = features[c], where g^(j) is the latent function evaluated after adding
/// xi to feature j in every row. `global` holds the column means.
struct GoalsReport {
  Shift xi;
  std::vector<Index> features;
  Matrix local;
  Vector global;
  std::string method = "goals";
  KernelConfig cfg;
  double sigma2 = 0.0;
  std::optional<Matrix> local_sd;
  std::optional<Matrix> global_cov;
  std::vector<std::string> warnings;
};

/// Which expression to use for the marginal posterior covariance of delta^(j).
///  - derived: Var(f|y) + Var(g|y) - Cov(f,g|y) - Cov(g,f|y), built from the
///    conditional joint of (f, g^(1..J)).
///  - printed: K A^-1 K - B^T A^-1 B - [B^T - B^T A^-1 K + B - K A^-1 B].
/// The two differ by 2K - 2 K A^-1 K; only `derived` agrees with sampling.
/// Cross-covariances (j != l) are identical under both.
enum class CovarianceFormula { derived, printed };

enum class GoalsPath {
  automatic,  // rank-one products and the linear-kernel closed form
  generic,    // forms B^(j) and evaluates [K - B^T] A^-1 y directly
};

struct GoalsOptions {
  std::optional<std::vector<Index>> features;
  bool local_sd = false;
  bool global_cov = false;
  GoalsPath path = GoalsPath::automatic;
};

GoalsReport goals_local(const FittedGP& g, const Dataset& d, const Shift& xi, const GoalsOptions& opts = {});

inline GoalsReport goals_local(const FittedGP& g, const Dataset& d, double xi, const GoalsOptions& opts = {}) {
  return goals_local(g, d, Shift::constant(xi), opts);
}

/// Posterior covariance of delta^(j) (l absent) or cross-covariance of
/// (delta^(j), delta^(l)).
Matrix goals_local_cov(const FittedGP& g, const Dataset& d, double xi, Index j, std::optional<Index> l = std::nullopt,
                       CovarianceFormula formula = CovarianceFormula::derived);

struct GlobalMoments {
  Vector mean;
  Matrix cov;
};

/// Posterior mean and covariance of the per-feature sample means of delta.
GlobalMoments goals_global_moments(const FittedGP& g, const Dataset& d, double xi);

/// Full (N*J) x (N*J) posterior covariance of (delta^(1), ..., delta^(J)),
/// feature-major blocks.
Matrix goals_joint_covariance(const FittedGP& g, const Dataset& d, double xi,
                              CovarianceFormula formula = CovarianceFormula::derived);

inline constexpr Index kMaxJointSampleSize = 2000;

/// Exact joint Gaussian draws of (delta^(1), ..., delta^(J)). Row r is one
/// draw laid out feature-major (column j*N + i is delta^(j)_i).
Matrix goals_sample(const FittedGP& g, const Dataset& d, double xi, Index n_draws, std::uint64_t seed);

/// f_hat - B^T alpha for an explicitly supplied cross-gram B.
Vector goals_mean_from_cross_gram(const FittedGP& g, const Matrix& b);

/// Feature indices ordered by descending |global|, ties by index.
std::vector<Index> rank_by_magnitude(const Vector& scores);

}  // namespace goalskit

#endif  // GOALSKIT_GOALS_HPP
