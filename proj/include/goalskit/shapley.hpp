#ifndef GOALSKIT_SHAPLEY_HPP
#define GOALSKIT_SHAPLEY_HPP

#include "goalskit/gp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace goalskit {

inline constexpr Index kMaxShapFeatures = 15;

/// Exact rational p/q with q > 0, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  Rational operator+(const Rational& o) const;
  Rational operator*(std::int64_t k) const;
  bool operator==(const Rational& o) const = default;
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// |S|! (J - |S| - 1)! / J!
Rational shapley_weight(Index subset_size, Index num_features);

struct ShapReport {
  Matrix local;  // N x J
  Vector global;
  std::int64_t subset_count = 0;    // coalitions per feature, 2^(J-1)
  std::int64_t fits_performed = 0;  // memoized subset fits, 2^J (empty set included)
  std::vector<std::string> warnings;
};

/// Exact Shapley attributions with a GP refit on every feature subset. The
/// rbf bandwidth is recomputed on each subset by the median criterion while
/// sigma2 stays fixed; the empty coalition contributes the zero function.
ShapReport exact_shap(const Dataset& d, const KernelConfig& cfg, double sigma2);

}  // namespace goalskit

#endif  // GOALSKIT_SHAPLEY_HPP
