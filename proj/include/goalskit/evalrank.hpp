#ifndef GOALSKIT_EVALRANK_HPP
#define GOALSKIT_EVALRANK_HPP

#include "goalskit/dataset.hpp"

#include <string>
#include <utility>
#include <vector>

namespace goalskit {

enum class RankOrder {
  abs,        // descending |score|
  signed_,    // descending score
  ascending,  // ascending score (p-values)
};

RankOrder rank_order_from_string(const std::string& s);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  Index n_causal = 0;
  Index n_null = 0;
};

/// Feature indices from most to least important; ties broken by index.
std::vector<Index> rank_features(const Vector& scores, RankOrder order);

/// Sliding-threshold ROC: one point per ranked prefix, (0,0) first.
RocCurve roc_from_scores(const Vector& scores, const std::vector<Index>& causal, RankOrder order = RankOrder::abs);

/// Trapezoidal area under a list of points.
double trapezoid_auc(const std::vector<RocPoint>& points);

/// Two-sided p-values of the slope in y ~ 1 + x_j, one per feature.
Vector scanone(const Dataset& d);

inline constexpr Index kRocGridPoints = 1001;

struct AucSummary {
  RocCurve mean_curve;  // (0,0) followed by kRocGridPoints points on fpr = 0, 0.001, ..., 1
  double mean_auc = 0.0;
  std::vector<double> aucs;
};

/// TPR of a step curve at fpr, right-continuous: the largest tpr among points
/// with point.fpr <= fpr.
double tpr_at(const RocCurve& c, double fpr);

AucSummary auc_summary(const std::vector<RocCurve>& replicates);

}  // namespace goalskit

#endif  // GOALSKIT_EVALRANK_HPP
