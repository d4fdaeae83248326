#ifndef GOALSKIT_NN_GOALS_HPP
#define GOALSKIT_NN_GOALS_HPP

#include "goalskit/goals.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace goalskit {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Applies the activation elementwise.
Matrix activate(const Matrix& pre, Activation a);

/// One hidden layer of fixed random features with a Gaussian last layer:
/// f = H w, w ~ N(0, V), H = act(X theta). Conditioning on y is the GP with
/// gram K = H V H^T.
struct RandomFeatureModel {
  Matrix inner_weights;  // J x L
  Activation activation = Activation::relu;
  Vector v_diag;         // L
  double sigma2 = 0.0;
  Matrix pre;            // N x L, X theta
  Matrix h;              // N x L
  FittedGP gp;           // induced-gram fit
  double residual_var = 0.0;  // Var(y - H w_bar)
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  Index width() const { return inner_weights.cols(); }
};

struct NnFitOptions {
  Index grid_points = 40;
  double v_lower = 1e-3;   // times 1 / mean(diag(H H^T))
  double v_upper = 1e3;
  double sigma2_lower = 1e-4;  // times Var(y)
  double sigma2_upper = 10.0;
  int refine_rounds = 6;
  double tolerance = 1e-5;
  std::optional<double> v;       // fixes v instead of searching
  std::optional<double> sigma2;  // fixes sigma2 instead of searching
};

inline constexpr double kMaxActivationEntries = 2.0e8;

/// theta entries iid N(0, 1/J) from the seed; then fit_with_inner_weights.
RandomFeatureModel fit_random_features(const Dataset& d, Index width, Activation act, std::uint64_t seed,
                                       const NnFitOptions& opts = {});

/// V = v I and sigma2 maximize the induced log marginal likelihood: log-spaced
/// 2-D grid scan, then alternating golden-section refinement in log space.
RandomFeatureModel fit_with_inner_weights(const Dataset& d, Matrix inner_weights, Activation act,
                                          const NnFitOptions& opts = {});

/// Log marginal likelihood of y under K = v S + sigma2 I, S = H H^T, from its eigenpairs.
class InducedLikelihood {
 public:
  InducedLikelihood(const Matrix& h, const Vector& y);
  double operator()(double v, double sigma2) const;
  double mean_diag() const { return mean_diag_; }

 private:
  Vector eigenvalues_;
  Vector projected_sq_;
  double mean_diag_ = 0.0;
};

/// H V H^T.
GramMatrix induced_gram(const RandomFeatureModel& m);

/// act(pre + xi * 1 theta_j,:), the activations after shifting feature j.
Matrix shifted_activations(const RandomFeatureModel& m, Index j, double xi);

/// Explicit B^(j) = H V H^(j)^T.
Matrix nn_cross_gram(const RandomFeatureModel& m, Index j, double xi);

GoalsReport nn_goals_scores(const RandomFeatureModel& m, const Dataset& d, double xi,
                            const std::optional<std::vector<Index>>& features = std::nullopt);

}  // namespace goalskit

#endif  // GOALSKIT_NN_GOALS_HPP
