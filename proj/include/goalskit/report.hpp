#ifndef GOALSKIT_REPORT_HPP
#define GOALSKIT_REPORT_HPP

#include "goalskit/evalrank.hpp"
#include "goalskit/simgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace goalskit {

inline constexpr const char* kReportFormat = "goalskit.report.v1";
inline constexpr const char* kTruthFormat = "goalskit.sim.v1";

/// Importance scores for one dataset. Files use 1-based feature numbers.
struct Report {
  std::string method;
  std::vector<std::string> feature_names;
  Vector global;
  std::optional<Matrix> local;  // N x J, sample-major on disk
  std::vector<std::string> row_labels;  // optional names for local rows (e.g. groups)
  RankOrder rank_by = RankOrder::abs;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> warnings;
};

/// Writes <stem>.json and, with local scores, <stem>_local.csv (".gz" when gzip).
/// Returns the files written.
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& json_path,
                                                bool gzip = false);
Report read_report(const std::filesystem::path& json_path);

void write_truth(const SimTruth& t, const SimConfig& cfg, const std::filesystem::path& path);

struct TruthFile {
  std::vector<Index> causal;  // 0-based
  Index j = 0;
  std::string scenario;
  nlohmann::json raw;
};
TruthFile read_truth(const std::filesystem::path& path);

/// Text IO; `.gz` paths are read and written through zlib.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string roc_csv(const RocCurve& c);

}  // namespace goalskit

#endif  // GOALSKIT_REPORT_HPP
