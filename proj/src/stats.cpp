#include "goalskit/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace goalskit::stats {

double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs at least two values per group");
  auto moments = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  const double se = std::sqrt(sa + sb);
  TestResult r;
  if (!(se > 0.0)) {
    r.statistic = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (ma - mb) / se;
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = t_two_sided_p(r.statistic, df);
  return r;
}

TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size() || observed.size() < 2)
    throw std::invalid_argument("chi-square test needs matching category vectors of length >= 2");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  TestResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_prob[i];
    if (!(e > 0.0)) throw std::invalid_argument("chi-square expected count must be positive");
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

TestResult ks_uniform(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  TestResult r;
  r.statistic = d;
  // Kolmogorov tail with Stephens' small-sample correction
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) {
    r.p_value = 1.0;
    return r;
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  r.p_value = std::clamp(q, 0.0, 1.0);
  return r;
}

Vector average_ranks(const Vector& v) {
  const Index n = v.size();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v(a) < v(b); });
  Vector r(n);
  Index i = 0;
  while (i < n) {
    Index k = i;
    while (k + 1 < n && v(idx[static_cast<std::size_t>(k + 1)]) == v(idx[static_cast<std::size_t>(i)])) ++k;
    const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
    for (Index m = i; m <= k; ++m) r(idx[static_cast<std::size_t>(m)]) = avg;
    i = k + 1;
  }
  return r;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs equal-length vectors");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return den > 0.0 ? ca.dot(cb) / den : 0.0;
}

TestResult spearman(const Vector& a, const Vector& b) {
  TestResult r;
  r.statistic = pearson(average_ranks(a), average_ranks(b));
  const double n = static_cast<double>(a.size());
  if (n < 3) return r;
  const double rho = std::clamp(r.statistic, -1.0, 1.0);
  if (std::abs(rho) >= 1.0) {
    r.p_value = 0.0;
    return r;
  }
  r.p_value = t_two_sided_p(rho * std::sqrt((n - 2.0) / (1.0 - rho * rho)), n - 2.0);
  return r;
}

}  // namespace goalskit::stats
