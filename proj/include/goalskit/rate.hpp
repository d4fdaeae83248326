#ifndef GOALSKIT_RATE_HPP
#define GOALSKIT_RATE_HPP

#include "goalskit/gp.hpp"

#include <string>
#include <vector>

namespace goalskit {

/// Gaussian posterior of the effect size analog X^+ f.
struct EsaPosterior {
  Vector mean;
  Matrix cov;
};

/// Moore-Penrose pseudoinverse via SVD, dropping singular values below
/// rtol * sigma_max.
Matrix pseudo_inverse(const Matrix& x, double rtol = 1e-10);

EsaPosterior effect_size_analog(const FittedGP& g, const Dataset& d);

struct RateReport {
  Vector kld;
  Vector rate;
  std::vector<std::string> warnings;
};

/// Relative centrality. KLD(j) is KL[p(b_-j) || p(b_-j | b_j = 0)] for the
/// Gaussian posterior b ~ N(mean, cov); RATE normalizes KLD to sum to one.
///
/// Both covariances get a diagonal jitter of 1e-8 * tr(cov) / J. The
/// conditional precision is the (-j,-j) block of the full precision matrix,
/// so one factorization of the jittered covariance serves every feature.
RateReport rate_scores(const EsaPosterior& e);

}  // namespace goalskit

#endif  // GOALSKIT_RATE_HPP
