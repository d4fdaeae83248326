#ifndef GOALSKIT_GP_HPP
#define GOALSKIT_GP_HPP

#include "goalskit/dataset.hpp"
#include "goalskit/kernel.hpp"

#include <filesystem>
#include <optional>

namespace goalskit {

/// Zero-mean GP regression y = f + e, f ~ N(0, K), e ~ N(0, sigma2 I),
/// conditioned on the training response. A = K + sigma2 I is only ever used
/// through its Cholesky factor.
struct FittedGP {
  KernelConfig cfg;
  GramMatrix k;
  double sigma2 = 1.0;
  /// Diagonal loading added on top of sigma2 when the plain factorization failed.
  double jitter = 0.0;
  Matrix chol_a;  // lower triangular, chol_a * chol_a^T = K + (sigma2 + jitter) I
  Vector alpha;   // A^{-1} y
  Vector f_hat;   // K alpha
  double log_marginal = 0.0;

  Index n() const { return k.size(); }
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// L^{-1} b, where A = L L^T.
  Matrix half_solve(const Matrix& b) const;
};

struct NoiseSelection {
  double lower_factor = 1e-4;
  double upper_factor = 10.0;
  Index grid_points = 60;
  double tolerance = 1e-4;
};

/// Fits on a standardized dataset. Without sigma2 the noise variance is chosen
/// by maximizing the log marginal likelihood over [1e-4, 10] * Var(y).
FittedGP fit(const Dataset& d, const KernelConfig& cfg, std::optional<double> sigma2 = std::nullopt);

/// Fits with a caller-supplied gram matrix (e.g. one induced by a feature map).
FittedGP fit_gram(const Vector& y, GramMatrix k, const KernelConfig& cfg, std::optional<double> sigma2 = std::nullopt);

/// Golden-section maximizer of the log marginal likelihood in log(sigma2),
/// seeded by a coarse log-spaced grid scan.
double select_noise_variance(const GramMatrix& k, const Vector& y, const NoiseSelection& opts = {});

/// Log marginal likelihood from the eigendecomposition of K; cheap per sigma2.
class MarginalLikelihoodProfile {
 public:
  MarginalLikelihoodProfile(const GramMatrix& k, const Vector& y);
  double operator()(double sigma2) const;

 private:
  Vector eigenvalues_;
  Vector projected_sq_;
};

double log_marginal_likelihood(const Dataset& d, const KernelConfig& cfg, double sigma2);

struct PosteriorF {
  Vector mean;
  Matrix cov;
};

/// Posterior of f given y: mean K A^{-1} y, covariance K - K A^{-1} K.
PosteriorF posterior_f(const FittedGP& g, const Vector& y);

/// JSON metadata (format "goalskit.gp.v1") plus a binary sidecar holding
/// chol_a and alpha. The gram matrix is recomputed from the dataset on load.
void save_gp(const FittedGP& g, const Dataset& d, const std::filesystem::path& json_path);
FittedGP load_gp(const std::filesystem::path& json_path, const Dataset& d);

}  // namespace goalskit

#endif  // GOALSKIT_GP_HPP
