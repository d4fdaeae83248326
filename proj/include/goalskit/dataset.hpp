#ifndef GOALSKIT_DATASET_HPP
#define GOALSKIT_DATASET_HPP

#include "goalskit/common.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace goalskit {

/// Tabular regression data: an N x J design matrix and a length-N response.
///
/// When `standardized` is set, every column of `x` and the response have
/// sample mean 0 and sample SD 1 (N-1 denominator). The original moments are
/// kept so scores can be mapped back to raw units.
struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;
  std::string response_name = "y";
  bool standardized = false;
  Vector column_means;
  Vector column_sds;
  double y_mean = 0.0;
  double y_sd = 1.0;

  Index n() const { return x.rows(); }
  Index j() const { return x.cols(); }

  /// Hash of the numeric payload (x then y, column-major bytes).
  std::uint64_t content_hash() const;
};

/// Checks shape and finiteness invariants; throws DataError.
void validate(const Dataset& d);

/// Default feature labels x1..xJ.
std::vector<std::string> default_feature_names(Index j);

Dataset load_csv(const std::filesystem::path& path, std::string_view response_column);

/// Writes features then the response column, 17 significant digits.
void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Centers and scales every feature column and the response. Rejects
/// already-standardized input and constant columns.
Dataset standardize(Dataset d);

/// Top-k principal component scores of a standardized dataset, each score
/// column rescaled to unit SD. 1 <= k <= min(N-1, J).
Matrix top_principal_components(const Dataset& d, Index k);

/// Same computation on a bare matrix whose columns are already centered.
/// When `rescale` is false the raw (orthogonal) score columns are returned.
Matrix principal_component_scores(const Matrix& x, Index k, bool rescale = true);

}  // namespace goalskit

#endif  // GOALSKIT_DATASET_HPP
