#include "goalskit/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace goalskit {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

Vector normal_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

void center(Vector& v) { v.array() -= v.mean(); }

// removes the projection of v onto each nonzero basis vector (basis is mutually orthogonal)
void orthogonalize(Vector& v, const std::vector<const Vector*>& basis) {
  for (const Vector* b : basis) {
    const double bb = b->squaredNorm();
    if (bb > 0.0) v -= (b->dot(v) / bb) * *b;
  }
}

// scale so that the sample variance hits target; returns the factor used
double rescale(Vector& v, double target) {
  if (target <= 0.0) {
    v.setZero();
    return 0.0;
  }
  const double var = sample_variance(v);
  if (!(var > 0.0)) throw NumericalError("simulation component has zero variance; cannot rescale");
  const double s = std::sqrt(target / var);
  v *= s;
  return s;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
    case Scenario::V: return "V";
    case Scenario::VI: return "VI";
    case Scenario::hd1: return "hd1";
    case Scenario::hd2: return "hd2";
    case Scenario::hd3: return "hd3";
    case Scenario::hd4: return "hd4";
    case Scenario::custom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_string(const std::string& s) {
  for (Scenario c : {Scenario::I, Scenario::II, Scenario::III, Scenario::IV, Scenario::V, Scenario::VI, Scenario::hd1,
                     Scenario::hd2, Scenario::hd3, Scenario::hd4, Scenario::custom})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown scenario '" + s + "' (expected I..VI, hd1..hd4 or custom)");
}

std::string to_string(DesignKind k) { return k == DesignKind::gaussian ? "gaussian" : "genotype"; }

DesignKind design_kind_from_string(const std::string& s) {
  if (s == "gaussian") return DesignKind::gaussian;
  if (s == "genotype") return DesignKind::genotype;
  throw ConfigError("unknown design '" + s + "' (expected gaussian or genotype)");
}

void SimConfig::validate() const {
  if (n < 2) throw ConfigError("simulation needs n >= 2");
  if (j < 1) throw ConfigError("simulation needs j >= 1");
  if (!(v2 >= 0.0 && v2 < 1.0)) throw ConfigError("v2 must lie in [0, 1)");
  if (!(pop_var >= 0.0) || v2 + pop_var > 1.0 + 1e-12)
    throw ConfigError("pop_var must lie in [0, 1 - v2]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  auto in_range = [&](Index c) { return c >= 0 && c < j; };
  for (Index c : causal)
    if (!in_range(c))
      throw ConfigError("causal feature " + std::to_string(c + 1) + " exceeds the feature count " + std::to_string(j));
  std::set<Index> cs(causal.begin(), causal.end());
  for (Index c : additive)
    if (!cs.count(c)) throw ConfigError("additive feature " + std::to_string(c + 1) + " is not in the causal set");
  for (auto [a, b] : interaction_pairs) {
    if (!cs.count(a) || !cs.count(b))
      throw ConfigError("interaction pair (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                        ") is not drawn from the causal set");
    if (a == b) throw ConfigError("interaction pair uses the same feature twice");
  }
  if (subgroup_feature && !cs.count(*subgroup_feature))
    throw ConfigError("subgroup feature is not in the causal set");
  if (random_causal < 0 || random_causal > j) throw ConfigError("random causal set size must lie in [0, j]");
  if (random_causal > 0 && random_pairs && random_causal < 2)
    throw ConfigError("random interaction pairs need at least two causal features");

  const bool has_pairs = !interaction_pairs.empty() || (random_causal > 0 && random_pairs);
  const bool has_additive = !additive.empty() || subgroup_feature || (random_causal > 0);
  if (v2 > 0.0) {
    if (has_pairs && rho == 1.0)
      throw ConfigError("rho = 1 puts no variance on interactions, but this scenario has interaction pairs; use rho < 1");
    if (!has_pairs && has_additive && rho < 1.0)
      throw ConfigError("rho < 1 needs interaction pairs to carry (1-rho)*v2; set rho = 1 or add pairs");
    if (has_pairs && !has_additive && rho > 0.0)
      throw ConfigError("this scenario has no additive effects; rho must be 0");
  }
  if (pop_var > 0.0 && std::min(n - 1, j) < 10)
    throw ConfigError("pop_var > 0 needs 10 principal components, i.e. min(n-1, j) >= 10");
}

SimConfig scenario_preset(Scenario s) {
  SimConfig c;
  c.scenario = s;
  auto z = [](std::initializer_list<Index> one_based) {
    std::vector<Index> v;
    for (Index i : one_based) v.push_back(i - 1);
    return v;
  };
  auto p = [](Index a, Index b) { return FeaturePair{a - 1, b - 1}; };
  switch (s) {
    case Scenario::I:
      c.causal = z({23, 24, 25});
      c.additive = c.causal;
      c.interaction_pairs = {p(23, 25), p(24, 25)};
      break;
    case Scenario::II:
      c.causal = z({8, 9, 10, 23, 24, 25});
      c.additive = z({23, 24, 25});
      c.interaction_pairs = {p(8, 10), p(9, 10)};
      break;
    case Scenario::III:
      c.causal = z({8, 9, 10, 23, 24, 25});
      c.additive = z({23, 24, 25});
      c.interaction_pairs = {p(8, 10), p(9, 25)};
      break;
    case Scenario::IV:
      c.causal = z({8, 9, 10, 23, 24, 25});
      c.interaction_pairs = {p(8, 10), p(9, 10), p(23, 25), p(24, 25)};
      c.rho = 0.0;
      break;
    case Scenario::V:
      c.v2 = 0.0;
      break;
    case Scenario::VI:
      c.causal = z({22, 23, 24, 25});
      c.additive = z({23, 24, 25});
      c.subgroup_feature = 21;
      c.interaction_pairs = {p(23, 25), p(24, 25)};
      break;
    case Scenario::hd1:
    case Scenario::hd2:
    case Scenario::hd3:
    case Scenario::hd4:
      c.n = 500;
      c.j = 1000;
      c.v2 = 0.3;
      c.random_causal = 30;
      c.random_pairs = (s == Scenario::hd3 || s == Scenario::hd4);
      c.rho = c.random_pairs ? 0.5 : 1.0;
      c.pop_var = (s == Scenario::hd2 || s == Scenario::hd4) ? 0.1 : 0.0;
      c.design = DesignKind::genotype;
      break;
    case Scenario::custom:
      break;
  }
  return c;
}

SimConfig resolve_causal(const SimConfig& cfg) {
  SimConfig c = cfg;
  if (c.random_causal <= 0) return c;
  auto rng = stream(c.seed, 3);
  std::vector<Index> all(static_cast<std::size_t>(c.j));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  c.causal.assign(all.begin(), all.begin() + c.random_causal);
  std::sort(c.causal.begin(), c.causal.end());
  c.additive = c.causal;
  c.interaction_pairs.clear();
  if (c.random_pairs) {
    std::set<FeaturePair> seen;
    std::uniform_int_distribution<std::size_t> pick(0, c.causal.size() - 2);
    for (std::size_t i = 0; i < c.causal.size(); ++i) {
      std::size_t k = pick(rng);
      if (k >= i) ++k;
      FeaturePair pr{std::min(c.causal[i], c.causal[k]), std::max(c.causal[i], c.causal[k])};
      if (seen.insert(pr).second) c.interaction_pairs.push_back(pr);
    }
  }
  c.random_causal = 0;
  c.random_pairs = false;
  return c;
}

Dataset generate_design(const SimConfig& cfg) {
  if (cfg.n < 2 || cfg.j < 1) throw ConfigError("design needs n >= 2 and j >= 1");
  auto rng = stream(cfg.seed, 1);
  Matrix x(cfg.n, cfg.j);
  if (cfg.design == DesignKind::gaussian) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Index c = 0; c < cfg.j; ++c)
      for (Index i = 0; i < cfg.n; ++i) x(i, c) = nd(rng);
  } else {
    std::uniform_real_distribution<double> maf(0.01, 0.5);
    for (Index c = 0; c < cfg.j; ++c) {
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        std::binomial_distribution<int> bd(2, maf(rng));
        for (Index i = 0; i < cfg.n; ++i) x(i, c) = bd(rng);
        ok = (x.col(c).array() != x(0, c)).any();
      }
      if (!ok) throw DataError("genotype column " + std::to_string(c + 1) + " stayed monomorphic after 100 draws");
    }
  }
  Dataset d;
  d.feature_names = default_feature_names(cfg.j);
  d.column_means = x.colwise().mean().transpose();
  d.column_sds.resize(cfg.j);
  for (Index c = 0; c < cfg.j; ++c) {
    x.col(c).array() -= d.column_means(c);
    const double sd = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(cfg.n - 1));
    if (!(sd > 0.0)) throw DataError("design column " + std::to_string(c + 1) + " is constant");
    x.col(c) /= sd;
    d.column_sds(c) = sd;
  }
  d.x = std::move(x);
  d.y = Vector::Zero(cfg.n);
  d.standardized = false;
  return d;
}

std::pair<Vector, SimTruth> generate_response(const Dataset& d, const SimConfig& cfg_in) {
  const SimConfig cfg = resolve_causal(cfg_in);
  cfg.validate();
  if (d.n() != cfg.n || d.j() != cfg.j) throw ConfigError("design shape does not match the simulation config");
  const Index n = cfg.n;
  auto rng = stream(cfg.seed, 2);

  SimTruth t;
  t.causal = cfg.causal;
  t.additive = cfg.additive;
  t.interaction_pairs = cfg.interaction_pairs;
  t.subgroup_feature = cfg.subgroup_feature;
  t.affected_mask.assign(static_cast<std::size_t>(n), false);

  const bool signal = cfg.v2 > 0.0 && !cfg.causal.empty();
  const double add_target = signal ? cfg.rho * cfg.v2 : 0.0;
  const double int_target = signal ? (1.0 - cfg.rho) * cfg.v2 : 0.0;
  const double noise_target = 1.0 - (signal ? cfg.v2 : 0.0) - cfg.pop_var;

  // additive
  t.beta = Vector::Zero(cfg.j);
  Vector a = Vector::Zero(n);
  {
    const Vector b = normal_vector(static_cast<Index>(cfg.additive.size()), rng);
    for (std::size_t k = 0; k < cfg.additive.size(); ++k) {
      t.beta(cfg.additive[k]) = b(static_cast<Index>(k));
      a += b(static_cast<Index>(k)) * d.x.col(cfg.additive[k]);
    }
    if (cfg.subgroup_feature) {
      std::vector<Index> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), Index{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      for (Index i = 0; i < n / 2; ++i) t.affected_mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
      t.subgroup_beta = normal_vector(1, rng)(0);
      for (Index i = 0; i < n; ++i)
        if (t.affected_mask[static_cast<std::size_t>(i)]) a(i) += t.subgroup_beta * d.x(i, *cfg.subgroup_feature);
    }
  }
  center(a);
  const double sa = add_target > 0.0 ? rescale(a, add_target) : (a.setZero(), 0.0);
  t.beta *= sa;
  t.subgroup_beta *= sa;

  // interaction
  t.tau = normal_vector(static_cast<Index>(cfg.interaction_pairs.size()), rng);
  Vector w = Vector::Zero(n);
  for (std::size_t k = 0; k < cfg.interaction_pairs.size(); ++k) {
    const auto [p, q] = cfg.interaction_pairs[k];
    w += t.tau(static_cast<Index>(k)) * d.x.col(p).cwiseProduct(d.x.col(q));
  }
  center(w);
  if (int_target > 0.0) {
    const double aa = a.squaredNorm();
    t.interaction_projection = aa > 0.0 ? a.dot(w) / aa : 0.0;
    orthogonalize(w, {&a});
    const double s = rescale(w, int_target);
    t.tau *= s;
    t.interaction_projection *= s;
  } else {
    w.setZero();
    t.tau.setZero();
  }

  // population structure
  Vector z = Vector::Zero(n);
  t.omega = Vector::Zero(0);
  if (cfg.pop_var > 0.0) {
    const Matrix pcs = principal_component_scores(d.x, 10, true);
    t.omega = normal_vector(10, rng);
    z = pcs * t.omega;
    center(z);
    orthogonalize(z, {&a, &w});
    t.omega *= rescale(z, cfg.pop_var);
  }

  // noise
  Vector e = normal_vector(n, rng);
  center(e);
  orthogonalize(e, {&a, &w, &z});
  if (noise_target > 1e-14) rescale(e, noise_target);
  else e.setZero();

  t.additive_var = sample_variance(a);
  t.interaction_var = sample_variance(w);
  t.population_var = sample_variance(z);
  t.noise_var = sample_variance(e);
  Vector y = a + w + z + e;
  return {std::move(y), std::move(t)};
}

Simulation simulate(const SimConfig& cfg_in) {
  const SimConfig cfg = resolve_causal(cfg_in);
  cfg.validate();
  Simulation s;
  s.config = cfg;
  s.data = generate_design(cfg);
  auto [y, truth] = generate_response(s.data, cfg);
  s.data.y = std::move(y);
  s.data.y_mean = 0.0;
  s.data.y_sd = 1.0;
  s.data.standardized = true;
  s.truth = std::move(truth);
  return s;
}

}  // namespace goalskit
