#include "goalskit/shapley.hpp"

#include "goalskit/parallel.hpp"

#include <atomic>
#include <bit>
#include <numeric>

namespace goalskit {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

Rational Rational::operator+(const Rational& o) const {
  const std::int64_t l = std::lcm(den, o.den);
  return make(num * (l / den) + o.num * (l / o.den), l);
}

Rational Rational::operator*(std::int64_t k) const {
  const std::int64_t g = std::gcd(k, den);
  return make(num * (k / g), den / g);
}

Rational shapley_weight(Index subset_size, Index num_features) {
  if (num_features < 1 || num_features > 20 || subset_size < 0 || subset_size >= num_features)
    throw std::out_of_range("Shapley weight arguments out of range");
  // s! (J-s-1)! / J! = 1 / (J * C(J-1, s))
  std::int64_t binom = 1;
  const std::int64_t n = num_features - 1;
  for (std::int64_t i = 1; i <= subset_size; ++i) binom = binom * (n - i + 1) / i;
  return Rational::make(1, num_features * binom);
}

ShapReport exact_shap(const Dataset& d, const KernelConfig& cfg, double sigma2) {
  if (!d.standardized) throw DataError("exact SHAP requires a standardized dataset");
  const Index jn = d.j();
  if (jn < 1 || jn > kMaxShapFeatures)
    throw ConfigError("exact SHAP supports 1 <= J <= " + std::to_string(kMaxShapFeatures) + ", got J = " +
                      std::to_string(jn));
  if (cfg.kind == KernelKind::precomputed) throw std::invalid_argument("exact SHAP needs a pointwise kernel");
  if (!(sigma2 > 0.0)) throw ConfigError("noise variance sigma2 must be positive");

  const Index n = d.n();
  const std::size_t subsets = std::size_t{1} << jn;
  std::vector<Vector> fitted(subsets);
  std::vector<std::string> subset_warning(subsets);
  std::atomic<std::int64_t> fits{0};

  parallel_for(subsets, [&](std::size_t mask) {
    ++fits;
    if (mask == 0) {
      fitted[mask] = Vector::Zero(n);
      return;
    }
    const Index width = std::popcount(mask);
    Matrix xs(n, width);
    Index col = 0;
    for (Index j = 0; j < jn; ++j)
      if (mask & (std::size_t{1} << j)) xs.col(col++) = d.x.col(j);
    KernelConfig sub = cfg;
    if (cfg.kind == KernelKind::rbf) {
      try {
        sub.theta = median_bandwidth(xs);
      } catch (const DataError&) {
        fitted[mask] = Vector::Zero(n);
        subset_warning[mask] = "subset mask " + std::to_string(mask) + " has identical rows; using the zero function";
        return;
      }
    }
    fitted[mask] = fit_gram(d.y, gram_matrix(sub, xs), sub, sigma2).f_hat;
  });

  std::vector<double> weight(static_cast<std::size_t>(jn));
  for (Index s = 0; s < jn; ++s) weight[static_cast<std::size_t>(s)] = shapley_weight(s, jn).to_double();

  ShapReport rep;
  rep.local = Matrix::Zero(n, jn);
  for (Index j = 0; j < jn; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
      rep.local.col(j) += w * (fitted[mask | bit] - fitted[mask]);
    }
  }
  rep.global = rep.local.colwise().mean().transpose();
  rep.subset_count = static_cast<std::int64_t>(subsets / 2);
  rep.fits_performed = fits.load();
  for (auto& w : subset_warning)
    if (!w.empty()) rep.warnings.push_back(std::move(w));
  return rep;
}

}  // namespace goalskit
