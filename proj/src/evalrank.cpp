#include "goalskit/evalrank.hpp"

#include "goalskit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace goalskit {

RankOrder rank_order_from_string(const std::string& s) {
  if (s == "abs") return RankOrder::abs;
  if (s == "signed") return RankOrder::signed_;
  if (s == "ascending") return RankOrder::ascending;
  throw ConfigError("unknown ranking '" + s + "' (expected abs, signed or ascending)");
}

std::vector<Index> rank_features(const Vector& scores, RankOrder order) {
  std::vector<Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto key = [&](Index i) {
    switch (order) {
      case RankOrder::abs: return std::abs(scores(i));
      case RankOrder::signed_: return scores(i);
      case RankOrder::ascending: return -scores(i);
    }
    return scores(i);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return key(a) > key(b); });
  return idx;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double a = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    a += (points[i].fpr - points[i - 1].fpr) * 0.5 * (points[i].tpr + points[i - 1].tpr);
  return a;
}

RocCurve roc_from_scores(const Vector& scores, const std::vector<Index>& causal, RankOrder order) {
  const Index jn = scores.size();
  std::set<Index> truth;
  for (Index c : causal) {
    if (c < 0 || c >= jn) throw std::out_of_range("causal index " + std::to_string(c + 1) + " outside 1.." + std::to_string(jn));
    truth.insert(c);
  }
  const Index nc = static_cast<Index>(truth.size());
  if (nc == 0 || nc == jn) throw std::invalid_argument("ROC needs a causal set that is neither empty nor all features");
  for (Index i = 0; i < jn; ++i)
    if (!std::isfinite(scores(i))) throw DataError("score for feature " + std::to_string(i + 1) + " is not finite");

  RocCurve c;
  c.n_causal = nc;
  c.n_null = jn - nc;
  c.points.reserve(static_cast<std::size_t>(jn + 1));
  c.points.push_back({0.0, 0.0});
  Index tp = 0, fp = 0;
  for (Index f : rank_features(scores, order)) {
    if (truth.count(f)) ++tp;
    else ++fp;
    c.points.push_back({static_cast<double>(fp) / static_cast<double>(c.n_null),
                        static_cast<double>(tp) / static_cast<double>(nc)});
  }
  c.auc = trapezoid_auc(c.points);
  return c;
}

Vector scanone(const Dataset& d) {
  validate(d);
  const Index n = d.n();
  if (n < 3) throw DataError("SCANONE needs at least three samples");
  const Vector yc = d.y.array() - d.y.mean();
  const double syy = yc.squaredNorm();
  Vector p(d.j());
  for (Index j = 0; j < d.j(); ++j) {
    const Vector xc = d.x.col(j).array() - d.x.col(j).mean();
    const double sxx = xc.squaredNorm();
    if (!(sxx > 0.0)) {
      p(j) = 1.0;
      continue;
    }
    const double sxy = xc.dot(yc);
    const double slope = sxy / sxx;
    const double rss = std::max(syy - slope * sxy, 0.0);
    const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    p(j) = se > 0.0 ? stats::t_two_sided_p(slope / se, static_cast<double>(n - 2)) : (slope != 0.0 ? 0.0 : 1.0);
  }
  return p;
}

double tpr_at(const RocCurve& c, double fpr) {
  double t = 0.0;
  for (const auto& p : c.points) {
    if (p.fpr <= fpr + 1e-15) t = std::max(t, p.tpr);
    else break;
  }
  return t;
}

AucSummary auc_summary(const std::vector<RocCurve>& replicates) {
  if (replicates.empty()) throw std::invalid_argument("AUC summary needs at least one replicate");
  AucSummary s;
  std::vector<RocPoint> grid(static_cast<std::size_t>(kRocGridPoints));
  for (Index g = 0; g < kRocGridPoints; ++g)
    grid[static_cast<std::size_t>(g)].fpr = static_cast<double>(g) / static_cast<double>(kRocGridPoints - 1);
  for (const auto& r : replicates) {
    s.aucs.push_back(r.auc);
    for (auto& p : grid) p.tpr += tpr_at(r, p.fpr);
  }
  const double m = static_cast<double>(replicates.size());
  for (auto& p : grid) p.tpr /= m;
  s.mean_curve.points.reserve(grid.size() + 1);
  s.mean_curve.points.push_back({0.0, 0.0});
  s.mean_curve.points.insert(s.mean_curve.points.end(), grid.begin(), grid.end());
  s.mean_auc = std::accumulate(s.aucs.begin(), s.aucs.end(), 0.0) / m;
  s.mean_curve.auc = trapezoid_auc(s.mean_curve.points);
  s.mean_curve.n_causal = replicates.front().n_causal;
  s.mean_curve.n_null = replicates.front().n_null;
  return s;
}

}  // namespace goalskit
