#ifndef GOALSKIT_SIMGEN_HPP
#define GOALSKIT_SIMGEN_HPP

#include "goalskit/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace goalskit {

enum class Scenario { I, II, III, IV, V, VI, hd1, hd2, hd3, hd4, custom };
enum class DesignKind { gaussian, genotype };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
std::string to_string(DesignKind k);
DesignKind design_kind_from_string(const std::string& s);

using FeaturePair = std::pair<Index, Index>;

/// Simulation settings. Feature indices are 0-based.
///
/// The response is y = additive + interaction + population + noise with
/// realized sample variances rho*v2, (1-rho)*v2, pop_var and 1-v2-pop_var.
struct SimConfig {
  Index n = 2000;
  Index j = 25;
  double v2 = 0.6;
  double rho = 0.5;
  double pop_var = 0.0;
  Scenario scenario = Scenario::custom;
  std::vector<Index> causal;
  std::vector<Index> additive;
  std::vector<FeaturePair> interaction_pairs;
  /// Feature whose additive effect applies to a random half of the samples.
  std::optional<Index> subgroup_feature;
  /// When > 0, `causal`/`additive` are drawn at random (seeded) with this size.
  Index random_causal = 0;
  /// With random_causal: pair each causal feature with a random causal partner.
  bool random_pairs = false;
  std::uint64_t seed = 1;
  DesignKind design = DesignKind::gaussian;

  void validate() const;
};

/// Exact causal structure for Scenarios I-VI and the high-dimensional
/// presets hd1..hd4 (|C| = 30, v2 = 0.3, rho in {1, 0.5}, pop_var in {0, 0.1}).
SimConfig scenario_preset(Scenario s);

struct SimTruth {
  std::vector<Index> causal;
  std::vector<Index> additive;
  std::vector<FeaturePair> interaction_pairs;
  Vector beta;   // length J, realized (rescaled) additive effects, zero off the additive set
  double subgroup_beta = 0.0;
  std::optional<Index> subgroup_feature;
  Vector tau;    // realized interaction effects, one per pair
  double interaction_projection = 0.0;  // multiple of the additive part removed from W tau
  Vector omega;  // realized PC effects
  std::vector<bool> affected_mask;
  double additive_var = 0.0;
  double interaction_var = 0.0;
  double population_var = 0.0;
  double noise_var = 0.0;
};

/// Design with column-standardized features and a zero placeholder response.
/// Raw column moments are kept in column_means / column_sds.
Dataset generate_design(const SimConfig& cfg);

/// Fills in random causal sets, when requested, deterministically from the seed.
SimConfig resolve_causal(const SimConfig& cfg);

std::pair<Vector, SimTruth> generate_response(const Dataset& d, const SimConfig& cfg);

struct Simulation {
  Dataset data;  // standardized
  SimTruth truth;
  SimConfig config;  // resolved
};

/// Design plus response; the returned dataset is marked standardized.
Simulation simulate(const SimConfig& cfg);

}  // namespace goalskit

#endif  // GOALSKIT_SIMGEN_HPP
