#ifndef GOALSKIT_STATS_HPP
#define GOALSKIT_STATS_HPP

#include "goalskit/common.hpp"

#include <vector>

namespace goalskit::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sided Student t tail probability P(|T| >= |t|) with df degrees of freedom.
double t_two_sided_p(double t, double df);

/// Welch two-sample t-test, two-sided.
TestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Chi-square goodness of fit of observed counts against expected probabilities.
TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected_prob);

/// One-sample Kolmogorov-Smirnov test against Uniform(0,1).
TestResult ks_uniform(std::vector<double> sample);

/// Average ranks (1-based), ties share the mean rank.
Vector average_ranks(const Vector& v);

double pearson(const Vector& a, const Vector& b);

/// Spearman rank correlation with the t-approximation p-value (two-sided).
TestResult spearman(const Vector& a, const Vector& b);

}  // namespace goalskit::stats

#endif  // GOALSKIT_STATS_HPP
