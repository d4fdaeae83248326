// Acceptance suite: prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all)

#include "support.hpp"

#include "cli.hpp"
#include "goalskit/evalrank.hpp"
#include "goalskit/goals.hpp"
#include "goalskit/nn_goals.hpp"
#include "goalskit/parallel.hpp"
#include "goalskit/rate.hpp"
#include "goalskit/shapley.hpp"
#include "goalskit/simgen.hpp"
#include "goalskit/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

using namespace goalskit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1-based rank of feature f under descending |score|
Index rank_of(const std::vector<Index>& order, Index f) {
  return static_cast<Index>(std::find(order.begin(), order.end(), f) - order.begin()) + 1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ------------------------------------------------------------------ 1
Outcome kernel_update_oracle() {
  const double t0 = now_seconds();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<Index> nd(2, 200), jd(1, 20);
  const double xis[] = {0.05, 1.0, 2.0};
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = nd(rng), jn = jd(rng);
    const Matrix x = oracle::random_matrix(n, jn, rng);
    const double xi = xis[inst % 3];
    for (const KernelConfig cfg : {KernelConfig::rbf(median_bandwidth(x)), KernelConfig::linear()}) {
      const GramMatrix k = gram_matrix(cfg, x);
      worst = std::max(worst, (k.values() - oracle::cross(cfg, x, x)).cwiseAbs().maxCoeff());
      std::uniform_int_distribution<Index> fd(0, jn - 1);
      const Index j = fd(rng), l = fd(rng);
      const Matrix b = perturbed_cross_gram(cfg, x, k, j, Shift::constant(xi));
      worst = std::max(worst, (b - oracle::cross(cfg, x, oracle::shifted(x, j, xi))).cwiseAbs().maxCoeff());
      for (Index ll : {j, l}) {
        const Matrix d = perturbed_pair_gram(cfg, x, k, j, ll, xi);
        const Matrix direct = oracle::cross(cfg, oracle::shifted(x, j, xi), oracle::shifted(x, ll, xi));
        worst = std::max(worst, (d - direct).cwiseAbs().maxCoeff());
      }
    }
  }
  const double secs = now_seconds() - t0;
  return {worst < 1e-12 && secs < 10.0, fmt("max |update - direct| = %.3g (< 1e-12), %.2f s (< 10 s)", worst, secs)};
}

// ------------------------------------------------------------------ 2
Outcome zero_shift() {
  std::mt19937_64 rng(202);
  bool exact = true;
  for (int inst = 0; inst < 5; ++inst) {
    const Dataset d = oracle::random_dataset(40 + 10 * inst, 3 + inst, rng);
    for (const KernelConfig cfg : {KernelConfig::rbf(median_bandwidth(d.x)), KernelConfig::linear()}) {
      const FittedGP g = fit(d, cfg);
      const GoalsReport r = goals_local(g, d, 0.0);
      exact = exact && (r.local.array() == 0.0).all() && (r.global.array() == 0.0).all();
      const GlobalMoments gm = goals_global_moments(g, d, 0.0);
      exact = exact && (gm.mean.array() == 0.0).all();
    }
  }
  return {exact, exact ? "local, global and global-moment means are exactly 0 for xi = 0" : "nonzero score at xi = 0"};
}

// ------------------------------------------------------------------ 3, 4
struct McDraws {
  Matrix cov;   // empirical covariance of the sampled vector
  Vector mean;  // empirical mean
  Index m = 0;
};

// draws v = mu + R w in blocks and accumulates first and second moments
McDraws monte_carlo(const Vector& mu, const Matrix& cov, Index draws, std::uint64_t seed, const Matrix* project = nullptr) {
  const Matrix root = oracle::psd_root(cov);
  const Index dim = project ? project->rows() : mu.size();
  Vector sum = Vector::Zero(dim);
  Matrix outer = Matrix::Zero(dim, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Index block = 10000;
  for (Index done = 0; done < draws; done += block) {
    const Index b = std::min(block, draws - done);
    Matrix w(root.cols(), b);
    for (Index c = 0; c < b; ++c)
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = nd(rng);
    Matrix v = root * w;  // centered draws
    if (project) v = (*project) * v;
    sum += v.rowwise().sum();
    outer.noalias() += v * v.transpose();
  }
  McDraws out;
  out.m = draws;
  const double m = static_cast<double>(draws);
  const Vector centered_mean = sum / m;
  out.mean = (project ? Vector(*project * mu) : mu) + centered_mean;
  out.cov = (outer - m * centered_mean * centered_mean.transpose()) / (m - 1.0);
  return out;
}

// largest |a - b| / se over entries, se from the Gaussian sampling variance of a covariance
// row_var / col_var are the empirical variances of the variables indexing rows and columns
double worst_cov_z(const Matrix& impl, const Matrix& emp, const Vector& row_var, const Vector& col_var, Index m,
                   Index* beyond = nullptr, Index* total = nullptr) {
  double worst = 0.0;
  for (Index r = 0; r < impl.rows(); ++r)
    for (Index c = 0; c < impl.cols(); ++c) {
      const double se = std::sqrt((row_var(r) * col_var(c) + emp(r, c) * emp(r, c)) / static_cast<double>(m));
      const double z = se > 0.0 ? std::abs(impl(r, c) - emp(r, c)) / se
                                : (std::abs(impl(r, c) - emp(r, c)) > 1e-12 ? INFINITY : 0.0);
      worst = std::max(worst, z);
      if (beyond) *beyond += z > 3.0;
      if (total) ++*total;
    }
  return worst;
}

Outcome sigma_adjudication() {
  const double t0 = now_seconds();
  std::mt19937_64 rng(303);
  const Index n = 15, jn = 3;
  const double xi = 1.0, sigma2 = 0.5;
  const Dataset d = oracle::random_dataset(n, jn, rng);
  const KernelConfig cfg = KernelConfig::rbf(median_bandwidth(d.x));
  const FittedGP g = fit(d, cfg, sigma2);
  const std::vector<Index> feats{0, 1, 2};
  const auto post = oracle::joint_posterior(cfg, d.x, d.y, sigma2 + g.jitter, xi, feats);
  const Matrix map = oracle::delta_map(n, jn);
  const McDraws mc = monte_carlo(post.mean, post.cov, 500000, 3030, &map);

  double worst_derived = 0.0, worst_printed = 0.0, exact_diff = 0.0;
  Index beyond = 0, total = 0, beyond_printed = 0;
  const Matrix exact = map * post.cov * map.transpose();
  for (Index j = 0; j < jn; ++j)
    for (Index l = j; l < jn; ++l) {
      const Matrix emp = mc.cov.block(j * n, l * n, n, n);
      const Vector rv = mc.cov.diagonal().segment(j * n, n), cv = mc.cov.diagonal().segment(l * n, n);
      const std::optional<Index> lo = l == j ? std::nullopt : std::optional<Index>(l);
      const Matrix derived = goals_local_cov(g, d, xi, j, lo, CovarianceFormula::derived);
      exact_diff = std::max(exact_diff, (derived - exact.block(j * n, l * n, n, n)).cwiseAbs().maxCoeff());
      worst_derived = std::max(worst_derived, worst_cov_z(derived, emp, rv, cv, mc.m, &beyond, &total));
      worst_printed = std::max(worst_printed, worst_cov_z(goals_local_cov(g, d, xi, j, lo, CovarianceFormula::printed),
                                                          emp, rv, cv, mc.m, &beyond_printed));
    }
  const double secs = now_seconds() - t0;
  const bool pass = worst_derived <= 3.0 && secs < 120.0;
  return {pass, fmt("derived: max |z| = %.2f, %lld/%lld entries beyond 3 SE (%s), exact-conditioning diff %.2g; "
                    "printed: max |z| = %.3g, %lld/%lld beyond 3 SE (%s); %.1f s",
                    worst_derived, static_cast<long long>(beyond), static_cast<long long>(total),
                    worst_derived <= 3.0 ? "passes" : "fails", exact_diff, worst_printed,
                    static_cast<long long>(beyond_printed), static_cast<long long>(total),
                    worst_printed <= 3.0 ? "passes" : "fails", secs)};
}

Outcome global_moments_oracle() {
  const double t0 = now_seconds();
  std::mt19937_64 rng(404);
  const Index n = 15, jn = 4;
  const double xi = 1.0, sigma2 = 0.5;
  const Dataset d = oracle::random_dataset(n, jn, rng);
  const KernelConfig cfg = KernelConfig::rbf(median_bandwidth(d.x));
  const FittedGP g = fit(d, cfg, sigma2);
  const auto post = oracle::joint_posterior(cfg, d.x, d.y, sigma2 + g.jitter, xi, {0, 1, 2, 3});
  Matrix avg = Matrix::Zero(jn, n * jn);
  for (Index j = 0; j < jn; ++j) avg.block(j, j * n, 1, n).setConstant(1.0 / static_cast<double>(n));
  const Matrix map = avg * oracle::delta_map(n, jn);
  const McDraws mc = monte_carlo(post.mean, post.cov, 500000, 4040, &map);
  const GlobalMoments gm = goals_global_moments(g, d, xi);
  double worst_mean = 0.0;
  for (Index j = 0; j < jn; ++j)
    worst_mean = std::max(worst_mean, std::abs(gm.mean(j) - mc.mean(j)) / std::sqrt(mc.cov(j, j) / static_cast<double>(mc.m)));
  const double worst_cov = worst_cov_z(gm.cov, mc.cov, mc.cov.diagonal(), mc.cov.diagonal(), mc.m);
  const double secs = now_seconds() - t0;
  return {worst_mean <= 3.0 && worst_cov <= 3.0,
          fmt("mean max |z| = %.2f, covariance max |z| = %.2f (<= 3), %.1f s", worst_mean, worst_cov, secs)};
}

// ------------------------------------------------------------------ replicate helpers
struct Rep {
  Dataset data;
  SimTruth truth;
  FittedGP gp;
};

Rep replicate(SimConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  Simulation s = simulate(cfg);
  Rep r;
  r.gp = fit(s.data, KernelConfig::rbf(median_bandwidth(s.data.x)));
  r.data = std::move(s.data);
  r.truth = std::move(s.truth);
  return r;
}

// ------------------------------------------------------------------ 5
Outcome scenario_replication() {
  const double t0 = now_seconds();
  const int reps = 25;
  std::string detail;
  bool pass = true;
  int goals_iv = 0, rate_iv = 0;
  for (Scenario sc : {Scenario::I, Scenario::II, Scenario::III, Scenario::IV}) {
    SimConfig cfg = scenario_preset(sc);
    cfg.n = 500;
    cfg.j = 25;
    cfg.v2 = 0.6;
    std::map<Index, std::vector<double>> ranks;
    for (int r = 0; r < reps; ++r) {
      const Rep rep = replicate(cfg, 5000 + 100 * static_cast<std::uint64_t>(sc) + static_cast<std::uint64_t>(r));
      const auto order = rank_by_magnitude(goals_local(rep.gp, rep.data, 1.0).global);
      const auto rate_order = rank_features(rate_scores(effect_size_analog(rep.gp, rep.data)).rate, RankOrder::signed_);
      bool g_all = true, r_all = true;
      for (Index c : cfg.causal) {
        ranks[c].push_back(static_cast<double>(rank_of(order, c)));
        g_all = g_all && rank_of(order, c) <= 8;
        r_all = r_all && rank_of(rate_order, c) <= 8;
      }
      if (sc == Scenario::IV) {
        goals_iv += g_all;
        rate_iv += r_all;
      }
    }
    double worst = 0.0;
    for (const auto& [c, v] : ranks) worst = std::max(worst, median(v));
    pass = pass && worst <= 8.0;
    detail += fmt("%s worst median rank %.0f; ", to_string(sc).c_str(), worst);
  }
  const double secs = now_seconds() - t0;
  const bool iv = goals_iv >= 0.7 * reps && rate_iv < goals_iv;
  pass = pass && iv && secs < 600.0;
  detail += fmt("IV all six causal in top 8: GOALS %d/%d (>= 70%%), RATE %d/%d (< GOALS); %.0f s", goals_iv, reps,
                rate_iv, reps, secs);
  return {pass, detail};
}

// ------------------------------------------------------------------ 6
Outcome null_calibration() {
  const int reps = 50;
  SimConfig cfg = scenario_preset(Scenario::V);
  cfg.n = 500;
  cfg.j = 25;
  std::vector<double> counts(25, 0.0);
  for (int r = 0; r < reps; ++r) {
    const Rep rep = replicate(cfg, 6000 + static_cast<std::uint64_t>(r));
    counts[static_cast<std::size_t>(rank_by_magnitude(goals_local(rep.gp, rep.data, 1.0).global).front())] += 1.0;
  }
  const auto t = stats::chi_square_gof(counts, std::vector<double>(25, 1.0 / 25.0));
  return {t.p_value > 0.01, fmt("top-rank frequency vs uniform: chi2 = %.2f, p = %.3f (> 0.01)", t.statistic, t.p_value)};
}

// ------------------------------------------------------------------ 7
Outcome bimodality() {
  const int reps = 25;
  SimConfig cfg = scenario_preset(Scenario::VI);
  cfg.n = 500;
  cfg.j = 25;
  cfg.v2 = 0.6;
  int hit22 = 0, hit8 = 0;
  for (int r = 0; r < reps; ++r) {
    const Rep rep = replicate(cfg, 7000 + static_cast<std::uint64_t>(r));
    const GoalsReport g = goals_local(rep.gp, rep.data, 1.0);
    for (Index f : {Index{21}, Index{7}}) {
      std::vector<double> a, b;
      for (Index i = 0; i < rep.data.n(); ++i)
        (rep.truth.affected_mask[static_cast<std::size_t>(i)] ? a : b).push_back(g.local(i, f));
      const bool reject = stats::welch_t_test(a, b).p_value < 0.01;
      (f == 21 ? hit22 : hit8) += reject;
    }
  }
  return {hit22 >= 0.9 * reps && hit8 <= 0.1 * reps,
          fmt("feature 22 rejects in %d/%d (>= 90%%), null feature 8 rejects in %d/%d (<= 10%%)", hit22, reps, hit8, reps)};
}

// ------------------------------------------------------------------ 8
Outcome high_dimensional_roc() {
  const double t0 = now_seconds();
  const int reps = 25;
  const double xis[] = {0.05, 0.25, 0.5, 1.0, 1.5, 2.0};
  std::string detail;
  bool pass = true;
  for (Scenario sc : {Scenario::hd1, Scenario::hd2}) {
    SimConfig cfg = scenario_preset(sc);
    cfg.random_causal = 20;
    std::vector<RocCurve> goals, rate, scan;
    std::vector<std::vector<RocCurve>> by_xi(std::size(xis));
    for (int r = 0; r < reps; ++r) {
      const Rep rep = replicate(cfg, 8000 + 100 * static_cast<std::uint64_t>(sc) + static_cast<std::uint64_t>(r));
      const auto& causal = rep.truth.causal;
      for (std::size_t k = 0; k < std::size(xis); ++k) {
        if (sc != Scenario::hd1 && xis[k] != 1.0) continue;
        const RocCurve c = roc_from_scores(goals_local(rep.gp, rep.data, xis[k]).global, causal, RankOrder::abs);
        by_xi[k].push_back(c);
        if (xis[k] == 1.0) goals.push_back(c);
      }
      rate.push_back(roc_from_scores(rate_scores(effect_size_analog(rep.gp, rep.data)).rate, causal, RankOrder::signed_));
      scan.push_back(roc_from_scores(scanone(rep.data), causal, RankOrder::ascending));
    }
    const double ga = auc_summary(goals).mean_auc, ra = auc_summary(rate).mean_auc, sa = auc_summary(scan).mean_auc;
    bool ok = std::abs(ga - ra) <= 0.05;
    detail += fmt("%s AUC goals %.3f rate %.3f scanone %.3f", to_string(sc).c_str(), ga, ra, sa);
    if (sc == Scenario::hd1) {
      ok = ok && ga >= sa - 0.05;
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& v : by_xi) {
        const double m = auc_summary(v).mean_auc;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      ok = ok && hi - lo < 0.02;
      detail += fmt(", xi-grid gap %.4f (< 0.02)", hi - lo);
    }
    detail += "; ";
    pass = pass && ok;
  }
  const double secs = now_seconds() - t0;
  detail += fmt("%.0f s (< 1800 s)", secs);
  return {pass && secs < 1800.0, detail};
}

// ------------------------------------------------------------------ 9
Outcome rate_properties() {
  std::mt19937_64 rng(909);
  double worst_sum = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const Dataset d = oracle::random_dataset(60, 2 + inst, rng);
    const FittedGP g = fit(d, KernelConfig::rbf(median_bandwidth(d.x)));
    worst_sum = std::max(worst_sum, std::abs(rate_scores(effect_size_analog(g, d)).rate.sum() - 1.0));
  }
  // coordinates 3 and 4 are independent of the rest and have zero mean
  EsaPosterior e;
  e.mean = Vector(5);
  e.mean << 0.7, -0.4, 1.1, 0.0, 0.0;
  const Matrix a = oracle::random_matrix(3, 3, rng);
  e.cov = Matrix::Zero(5, 5);
  e.cov.topLeftCorner(3, 3) = a * a.transpose() + Matrix::Identity(3, 3);
  e.cov(3, 3) = 0.8;
  e.cov(4, 4) = 1.3;
  const RateReport blk = rate_scores(e);
  const bool zero = blk.kld(3) == 0.0 && blk.kld(4) == 0.0;

  // J = 2: KL[N(m2, s22) || N(m2 - s21 m1 / s11, s22 - s21^2 / s11)] on the jittered covariance
  EsaPosterior two;
  two.mean = Vector(2);
  two.mean << 0.9, -0.3;
  two.cov = Matrix(2, 2);
  two.cov << 1.2, 0.5, 0.5, 0.8;
  const RateReport tr = rate_scores(two);
  const double jit = 1e-8 * two.cov.trace() / 2.0;
  double worst_two = 0.0;
  for (Index j = 0; j < 2; ++j) {
    const Index o = 1 - j;
    const double sjj = two.cov(j, j) + jit, soo = two.cov(o, o) + jit, sjo = two.cov(j, o);
    const double m0 = two.mean(o), v0 = soo;
    const double m1 = two.mean(o) - sjo / sjj * two.mean(j), v1 = soo - sjo * sjo / sjj;
    const double kl = 0.5 * (v0 / v1 + (m1 - m0) * (m1 - m0) / v1 - 1.0 + std::log(v1 / v0));
    worst_two = std::max(worst_two, std::abs(tr.kld(j) - kl));
  }
  return {worst_sum <= 1e-10 && zero && worst_two <= 1e-10,
          fmt("max |sum - 1| = %.2g, block-independent KLD exactly 0: %s, J=2 closed form diff %.2g", worst_sum,
              zero ? "yes" : "no", worst_two)};
}

// ------------------------------------------------------------------ 10
double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

Outcome shapley_axioms() {
  bool weights = true;
  for (Index jn = 1; jn <= 6; ++jn) {
    Rational total = Rational::make(0, 1);
    std::int64_t binom = 1;
    for (Index s = 0; s < jn; ++s) {
      total = total + shapley_weight(s, jn) * binom;
      binom = binom * (jn - 1 - s) / (s + 1);
    }
    weights = weights && total == Rational::make(1, 1);
  }

  std::mt19937_64 rng(1010);
  // duplicated feature: columns 0 and 1 identical
  Dataset dup;
  dup.x = oracle::random_matrix(80, 4, rng);
  dup.x.col(1) = dup.x.col(0);
  dup.y = dup.x.col(0) + 0.5 * dup.x.col(2) + 0.3 * oracle::random_vector(80, rng);
  dup.feature_names = default_feature_names(4);
  dup = standardize(dup);
  const ShapReport ds = exact_shap(dup, KernelConfig::rbf(median_bandwidth(dup.x)), 0.3);
  const double sym = (ds.local.col(0) - ds.local.col(1)).cwiseAbs().maxCoeff();
  const bool fits = ds.fits_performed == 16;

  // J = 3 by hand: every subset refit with its own median bandwidth
  const Dataset d = oracle::random_dataset(50, 3, rng);
  const double s2 = 0.4;
  std::vector<Vector> f(8);
  f[0] = Vector::Zero(50);
  for (int mask = 1; mask < 8; ++mask) {
    Matrix xs(50, std::popcount(static_cast<unsigned>(mask)));
    int c = 0;
    for (int j = 0; j < 3; ++j)
      if (mask & (1 << j)) xs.col(c++) = d.x.col(j);
    const KernelConfig kc = KernelConfig::rbf(median_bandwidth(xs));
    f[static_cast<std::size_t>(mask)] = oracle::fitted(oracle::cross(kc, xs, xs), s2, d.y);
  }
  const ShapReport sr = exact_shap(d, KernelConfig::rbf(1.0), s2);
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    Vector phi = Vector::Zero(50);
    for (int mask = 0; mask < 8; ++mask) {
      if (mask & (1 << j)) continue;
      const int s = std::popcount(static_cast<unsigned>(mask));
      phi += factorial(s) * factorial(3 - s - 1) / factorial(3) *
             (f[static_cast<std::size_t>(mask | (1 << j))] - f[static_cast<std::size_t>(mask)]);
    }
    worst = std::max(worst, (phi - sr.local.col(j)).cwiseAbs().maxCoeff());
  }
  const bool fits3 = sr.fits_performed == 8;
  return {weights && sym <= 1e-8 && worst <= 1e-10 && fits && fits3,
          fmt("weight sums exact: %s, duplicate asymmetry %.2g, J=3 oracle diff %.2g, subset fits %lld/16 and %lld/8",
              weights ? "yes" : "no", sym, worst, static_cast<long long>(ds.fits_performed),
              static_cast<long long>(sr.fits_performed))};
}

// ------------------------------------------------------------------ 11
Outcome goals_shap_correspondence() {
  SimConfig cfg;
  cfg.n = 200;
  cfg.j = 8;
  cfg.v2 = 0.6;
  cfg.rho = 1.0;
  cfg.causal = {0, 1, 2, 3};
  cfg.additive = cfg.causal;
  cfg.seed = 1111;
  const Simulation s = simulate(cfg);
  const Dataset& d = s.data;
  const KernelConfig kc = KernelConfig::rbf(median_bandwidth(d.x));
  const FittedGP g = fit(d, kc);
  const ShapReport sh = exact_shap(d, kc, g.sigma2);
  Vector a(d.n() * d.j()), b(d.n() * d.j());
  for (Index j = 0; j < d.j(); ++j) {
    GoalsOptions o;
    o.features = std::vector<Index>{j};
    const GoalsReport r = goals_local(g, d, Shift::per_row(-d.x.col(j)), o);
    a.segment(j * d.n(), d.n()) = r.local.col(0).cwiseAbs();
    b.segment(j * d.n(), d.n()) = sh.local.col(j).cwiseAbs();
  }
  const auto t = stats::spearman(a, b);
  return {t.statistic > 0.0 && t.p_value < 0.01,
          fmt("Spearman(|GOALS|, |SHAP|) = %.3f over %lld sample-feature pairs, p = %.3g (< 0.01)", t.statistic,
              static_cast<long long>(a.size()), t.p_value)};
}

// ------------------------------------------------------------------ 12
Outcome performance() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "goalskit_acceptance_bench";
  fs::remove_all(dir);
  std::ostringstream out, err;
  const int code = cli::run({"bench", "--n", "1000", "--p", "500", "--methods", "goals", "--repeats", "3", "--out", dir.string()},
                            out, err);
  double bench_secs = INFINITY;
  if (code == 0) {
    std::ifstream in(dir / "bench.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    bench_secs = std::stod(line.substr(line.rfind(',') + 1));
  }

  SimConfig cfg;
  cfg.n = 1000;
  cfg.j = 500;
  cfg.v2 = 0.5;
  cfg.rho = 1.0;
  cfg.random_causal = 5;
  const Simulation s = simulate(cfg);
  const FittedGP g = fit(s.data, KernelConfig::rbf(median_bandwidth(s.data.x)));
  auto timed = [&](std::size_t threads) {
    set_thread_count(threads);
    double best = INFINITY;
    for (int r = 0; r < 3; ++r) {
      const double t0 = now_seconds();
      (void)goals_local(g, s.data, 1.0);
      best = std::min(best, now_seconds() - t0);
    }
    return best;
  };
  const double t1 = timed(1), t4 = timed(4);
  set_thread_count(0);
  const double speedup = t1 / t4;
  const unsigned hw = std::thread::hardware_concurrency();
  return {code == 0 && bench_secs <= 3.0 && speedup >= 2.5,
          fmt("bench GOALS N=1000 J=500: %.3f s (<= 3 s); 1->4 thread speedup %.2fx (>= 2.5x) with %u hardware thread(s)",
              bench_secs, speedup, hw)};
}

// ------------------------------------------------------------------ 13
Outcome linear_fast_path() {
  std::mt19937_64 rng(1313);
  std::uniform_int_distribution<Index> nd(5, 200), jd(1, 20);
  std::uniform_real_distribution<double> xd(-2.0, 2.0);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Dataset d = oracle::random_dataset(nd(rng), jd(rng), rng);
    const FittedGP g = fit(d, KernelConfig::linear());
    const double xi = xd(rng);
    GoalsOptions generic;
    generic.path = GoalsPath::generic;
    const Matrix fast = goals_local(g, d, xi).local;
    const Matrix slow = goals_local(g, d, xi, generic).local;
    worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, fmt("max |rank-one - generic| = %.3g (< 1e-12)", worst)};
}

// ------------------------------------------------------------------ 14
Outcome nn_consistency() {
  std::mt19937_64 rng(1414);
  double worst_rank = 1.0, worst_induced = 0.0;
  bool same_order = true;
  for (int inst = 0; inst < 5; ++inst) {
    const Dataset d = oracle::random_dataset(80, 6 + inst, rng);
    const RandomFeatureModel m = fit_with_inner_weights(d, Matrix::Identity(d.j(), d.j()), Activation::identity);
    const GoalsReport nn = nn_goals_scores(m, d, 1.0);
    const FittedGP lin = fit(d, KernelConfig::linear(), m.sigma2 / m.v_diag(0));
    const GoalsReport gl = goals_local(lin, d, 1.0);
    same_order = same_order && rank_by_magnitude(nn.global) == rank_by_magnitude(gl.global);
    worst_rank = std::min(worst_rank, stats::spearman(nn.global.cwiseAbs(), gl.global.cwiseAbs()).statistic);

    const RandomFeatureModel r = fit_random_features(d, 64, Activation::relu, 14 + static_cast<std::uint64_t>(inst));
    const GoalsReport rs = nn_goals_scores(r, d, 0.7);
    const FittedGP induced = fit_gram(d.y, induced_gram(r), KernelConfig::precomputed(), r.sigma2);
    for (Index j = 0; j < d.j(); ++j)
      worst_induced = std::max(
          worst_induced, (goals_mean_from_cross_gram(induced, nn_cross_gram(r, j, 0.7)) - rs.local.col(j)).cwiseAbs().maxCoeff());
  }
  return {same_order && worst_rank == 1.0 && worst_induced <= 1e-10,
          fmt("identity features vs linear GOALS: identical ranking %s, min rank correlation %.12f; induced-gram path diff %.2g (<= 1e-10)",
              same_order ? "yes" : "no", worst_rank, worst_induced)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"kernel-update oracle", kernel_update_oracle}},
      {2, {"zero-shift identity", zero_shift}},
      {3, {"Monte-Carlo adjudication of the local covariance", sigma_adjudication}},
      {4, {"global-moment oracle", global_moments_oracle}},
      {5, {"scenario replication I-IV", scenario_replication}},
      {6, {"null calibration (Scenario V)", null_calibration}},
      {7, {"Scenario VI bimodality", bimodality}},
      {8, {"high-dimensional ROC", high_dimensional_roc}},
      {9, {"RATE properties", rate_properties}},
      {10, {"Shapley axioms", shapley_axioms}},
      {11, {"GOALS-SHAP correspondence", goals_shap_correspondence}},
      {12, {"performance", performance}},
      {13, {"linear fast path", linear_fast_path}},
      {14, {"NN-extension consistency", nn_consistency}},
  };
  std::vector<int> run;
  for (int i = 1; i < argc; ++i) run.push_back(std::stoi(argv[i]));
  if (run.empty())
    for (const auto& [k, v] : criteria) run.push_back(k);
  int failed = 0;
  for (int k : run) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::cout << "criterion " << k << ": unknown\n";
      ++failed;
      continue;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << k << " [" << it->second.first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
