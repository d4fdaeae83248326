#include <doctest.h>

#include "support.hpp"

#include "goalskit/shapley.hpp"

#include <map>

using namespace goalskit;

namespace {

std::int64_t choose(std::int64_t n, std::int64_t k) {
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("weights sum to one exactly for every J up to the cap") {
  for (Index j = 1; j <= kMaxShapFeatures; ++j) {
    Rational total;
    for (Index s = 0; s < j; ++s) total = total + shapley_weight(s, j) * choose(j - 1, s);
    CHECK(total == Rational::make(1, 1));
  }
  CHECK(shapley_weight(0, 3) == Rational::make(1, 3));
  CHECK(shapley_weight(1, 3) == Rational::make(1, 6));
}

TEST_CASE("J = 3 linear kernel matches explicit enumeration") {
  std::mt19937_64 rng(1);
  const Dataset d = oracle::random_dataset(25, 3, rng);
  const double s2 = 0.5;
  const ShapReport r = exact_shap(d, KernelConfig::linear(), s2);
  CHECK(r.fits_performed == 8);
  CHECK(r.subset_count == 4);
  std::map<unsigned, Vector> f;
  f[0] = Vector::Zero(25);
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<Index> cols;
    for (Index c = 0; c < 3; ++c)
      if (mask & (1u << c)) cols.push_back(c);
    const Matrix xs = d.x(Eigen::all, cols);
    f[mask] = oracle::fitted(xs * xs.transpose(), s2, d.y);
  }
  const double w[3] = {1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0};
  for (Index j = 0; j < 3; ++j) {
    Vector phi = Vector::Zero(25);
    for (unsigned s = 0; s < 8; ++s) {
      if (s & (1u << j)) continue;
      phi += w[std::popcount(s)] * (f[s | (1u << j)] - f[s]);
    }
    CHECK((r.local.col(j) - phi).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(((r.local.rowwise().sum().transpose() - f[7])).cwiseAbs().maxCoeff() < 1e-10);
  for (Index j = 0; j < 3; ++j) CHECK(std::abs(r.global(j) - r.local.col(j).mean()) < 1e-14);
}

TEST_CASE("duplicated columns receive identical attributions") {
  std::mt19937_64 rng(2);
  Dataset d = oracle::random_dataset(30, 4, rng);
  d.x.col(3) = d.x.col(1);
  const ShapReport r = exact_shap(d, KernelConfig::rbf(1.0), 0.3);
  CHECK((r.local.col(1) - r.local.col(3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("efficiency with rbf refits") {
  std::mt19937_64 rng(3);
  const Dataset d = oracle::random_dataset(20, 4, rng);
  const ShapReport r = exact_shap(d, KernelConfig::rbf(1.0), 0.4);
  const FittedGP full = fit(d, KernelConfig::rbf(median_bandwidth(d.x)), 0.4);
  CHECK((r.local.rowwise().sum().transpose() - full.f_hat).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(r.fits_performed == 16);
}

TEST_CASE("too many features") {
  std::mt19937_64 rng(4);
  const Dataset d = oracle::random_dataset(10, 16, rng);
  CHECK_THROWS_AS((void)exact_shap(d, KernelConfig::linear(), 0.5), ConfigError);
}
