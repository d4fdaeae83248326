#ifndef GOALSKIT_KERNEL_HPP
#define GOALSKIT_KERNEL_HPP

#include "goalskit/common.hpp"

#include <cstdint>
#include <string>

namespace goalskit {

enum class KernelKind { rbf, linear, precomputed };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

/// k(x, x') = exp(-theta ||x - x'||^2) for rbf, x.x' for linear. `precomputed`
/// marks a gram matrix supplied by the caller (no pointwise kernel available).
struct KernelConfig {
  KernelKind kind = KernelKind::rbf;
  double theta = 1.0;

  static KernelConfig rbf(double theta) { return {KernelKind::rbf, theta}; }
  static KernelConfig linear() { return {KernelKind::linear, 0.0}; }
  static KernelConfig precomputed() { return {KernelKind::precomputed, 0.0}; }

  void validate() const;
  bool shift_invariant() const { return kind == KernelKind::rbf; }
};

/// Symmetric N x N kernel matrix.
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(Matrix values) : values_(std::move(values)) {}

  const Matrix& values() const { return values_; }
  Index size() const { return values_.rows(); }

 private:
  Matrix values_;
};

/// Per-row perturbation applied to one feature column. A constant shift is
/// the usual case; per-row values support subset-specific shifts.
class Shift {
 public:
  Shift() = default;
  static Shift constant(double xi) { return Shift(xi); }
  static Shift per_row(Vector xi);

  bool is_constant() const { return rows_.size() == 0; }
  bool is_zero() const;
  double at(Index i) const { return is_constant() ? value_ : rows_(i); }
  double value() const { return value_; }
  const Vector& rows() const { return rows_; }
  /// Expands to a length-n vector.
  Vector expand(Index n) const;
  void check(Index n) const;

 private:
  explicit Shift(double v) : value_(v) {}
  double value_ = 0.0;
  Vector rows_;
};

inline constexpr std::uint64_t kBandwidthSeed = 0x5eed6a0a15ULL;
inline constexpr Index kBandwidthSubsample = 5000;

/// theta = 1 / (2 m^2), m the median pairwise Euclidean distance between rows.
/// Rows are subsampled (seeded) when N exceeds kBandwidthSubsample.
double median_bandwidth(const Matrix& x, std::uint64_t seed = kBandwidthSeed);

GramMatrix gram_matrix(const KernelConfig& cfg, const Matrix& x);

/// B^(j): entry (i, i') = k(x_i, x_i' + xi_i' e_j). Not symmetric in general.
Matrix perturbed_cross_gram(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, const Shift& xi);

/// (B^(j))^T v without forming B^(j).
Vector perturbed_cross_gram_tmul(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j,
                                 const Shift& xi, const Vector& v);

/// B^(j) 1 without forming B^(j).
Vector perturbed_cross_gram_rowsum(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j,
                                   double xi);

/// D^(j,l): entry (i, i') = k(x_i + xi e_j, x_i' + xi e_l). Equals K for rbf
/// when j == l; for the linear kernel j == l gives C^(j).
Matrix perturbed_pair_gram(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, Index l,
                           double xi);

/// 1^T D^(j,l) 1 without forming D^(j,l).
double perturbed_pair_gram_sum(const KernelConfig& cfg, const Matrix& x, const GramMatrix& k, Index j, Index l,
                               double xi);

}  // namespace goalskit

#endif  // GOALSKIT_KERNEL_HPP
