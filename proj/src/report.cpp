#include "goalskit/report.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace goalskit {

namespace fs = std::filesystem;

namespace {

bool is_gz(const fs::path& p) { return p.extension() == ".gz"; }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const fs::path& file, std::size_t row, std::size_t col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(file.string() + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": cannot parse '" + s + "' as a number");
  return v;
}

std::vector<int> feature_numbers(Index j) {
  std::vector<int> v;
  for (Index i = 0; i < j; ++i) v.push_back(static_cast<int>(i + 1));
  return v;
}

std::string rank_name(RankOrder o) {
  switch (o) {
    case RankOrder::abs: return "abs";
    case RankOrder::signed_: return "signed";
    case RankOrder::ascending: return "ascending";
  }
  return "abs";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (is_gz(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    const int written = text.empty() ? 0 : gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    if (written != static_cast<int>(text.size())) throw DataError("short write to " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("file not found: " + path.string());
  if (is_gz(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open " + path.string());
    std::string out;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(got));
    gzclose(f);
    if (got < 0) throw DataError("corrupt gzip stream: " + path.string());
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> write_report(const Report& r, const fs::path& json_path, bool gzip) {
  const Index jn = r.global.size();
  if (static_cast<Index>(r.feature_names.size()) != jn)
    throw std::invalid_argument("report feature names do not match the score count");
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["version"] = kVersion;
  j["method"] = r.method;
  j["rank_by"] = rank_name(r.rank_by);
  j["features"] = r.feature_names;
  j["feature_numbers"] = feature_numbers(jn);
  j["global"] = std::vector<double>(r.global.data(), r.global.data() + jn);
  j["metadata"] = r.metadata;
  j["warnings"] = r.warnings;
  std::vector<fs::path> written;
  if (r.local) {
    const Matrix& l = *r.local;
    if (l.cols() != jn) throw std::invalid_argument("local score columns do not match the feature count");
    fs::path local = json_path;
    local.replace_extension();
    local += gzip ? "_local.csv.gz" : "_local.csv";
    std::string text = "sample";
    for (const auto& n : r.feature_names) text += "," + n;
    text += '\n';
    for (Index i = 0; i < l.rows(); ++i) {
      text += r.row_labels.empty() ? std::to_string(i + 1) : r.row_labels[static_cast<std::size_t>(i)];
      for (Index c = 0; c < jn; ++c) text += "," + format_double(l(i, c));
      text += '\n';
    }
    text += "global";
    for (Index c = 0; c < jn; ++c) text += "," + format_double(r.global(c));
    text += '\n';
    write_text(local, text);
    j["local_file"] = local.filename().string();
    j["local_rows"] = l.rows();
    written.push_back(local);
  } else {
    j["local_file"] = nullptr;
  }
  write_text(json_path, j.dump(2) + "\n");
  written.insert(written.begin(), json_path);
  return written;
}

Report read_report(const fs::path& json_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(json_path.string() + ": invalid JSON: " + e.what());
  }
  if (j.value("format", "") != kReportFormat)
    throw DataError(json_path.string() + ": not a " + std::string(kReportFormat) + " report");
  Report r;
  try {
    r.method = j.at("method").get<std::string>();
    r.rank_by = rank_order_from_string(j.value("rank_by", "abs"));
    r.feature_names = j.at("features").get<std::vector<std::string>>();
    const auto g = j.at("global").get<std::vector<double>>();
    r.global = Eigen::Map<const Vector>(g.data(), static_cast<Index>(g.size()));
    r.metadata = j.value("metadata", nlohmann::json::object());
    r.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(json_path.string() + ": malformed report: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(json_path.string() + ": " + e.what());
  }
  if (j.contains("local_file") && !j["local_file"].is_null()) {
    const fs::path local = json_path.parent_path() / j["local_file"].get<std::string>();
    std::istringstream in(read_text(local));
    std::string line;
    std::getline(in, line);
    const auto header = split(line, ',');
    const std::size_t jn = r.feature_names.size();
    if (header.size() != jn + 1) throw DataError(local.string() + ": header has the wrong number of columns");
    std::vector<std::vector<double>> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() != jn + 1) throw DataError(local.string() + ": row " + std::to_string(row) + " has the wrong width");
      if (cells[0] == "global") continue;
      r.row_labels.push_back(cells[0]);
      std::vector<double> v(jn);
      for (std::size_t c = 0; c < jn; ++c) v[c] = parse_double(cells[c + 1], local, row, c + 2);
      rows.push_back(std::move(v));
    }
    Matrix l(static_cast<Index>(rows.size()), static_cast<Index>(jn));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t c = 0; c < jn; ++c) l(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    r.local = std::move(l);
  }
  return r;
}

void write_truth(const SimTruth& t, const SimConfig& cfg, const fs::path& path) {
  auto one_based = [](const std::vector<Index>& v) {
    std::vector<Index> o;
    for (Index i : v) o.push_back(i + 1);
    return o;
  };
  nlohmann::json j;
  j["format"] = kTruthFormat;
  j["version"] = kVersion;
  j["scenario"] = to_string(cfg.scenario);
  j["n"] = cfg.n;
  j["p"] = cfg.j;
  j["v2"] = cfg.v2;
  j["rho"] = cfg.rho;
  j["pop_var"] = cfg.pop_var;
  j["seed"] = cfg.seed;
  j["design"] = to_string(cfg.design);
  j["causal"] = one_based(t.causal);
  j["additive"] = one_based(t.additive);
  nlohmann::json pairs = nlohmann::json::array();
  for (auto [a, b] : t.interaction_pairs) pairs.push_back({a + 1, b + 1});
  j["interaction_pairs"] = pairs;
  j["beta"] = std::vector<double>(t.beta.data(), t.beta.data() + t.beta.size());
  j["tau"] = std::vector<double>(t.tau.data(), t.tau.data() + t.tau.size());
  j["omega"] = std::vector<double>(t.omega.data(), t.omega.data() + t.omega.size());
  j["interaction_projection"] = t.interaction_projection;
  if (t.subgroup_feature) {
    j["subgroup_feature"] = *t.subgroup_feature + 1;
    j["subgroup_beta"] = t.subgroup_beta;
    std::vector<int> mask;
    for (bool b : t.affected_mask) mask.push_back(b ? 1 : 0);
    j["affected_mask"] = mask;
  }
  j["realized_variance"] = {{"additive", t.additive_var},
                            {"interaction", t.interaction_var},
                            {"population", t.population_var},
                            {"noise", t.noise_var}};
  write_text(path, j.dump(2) + "\n");
}

TruthFile read_truth(const fs::path& path) {
  TruthFile t;
  try {
    t.raw = nlohmann::json::parse(read_text(path));
    if (t.raw.value("format", "") != kTruthFormat) throw DataError(path.string() + ": not a " + kTruthFormat + " file");
    t.j = t.raw.at("p").get<Index>();
    t.scenario = t.raw.value("scenario", "custom");
    for (Index c : t.raw.at("causal").get<std::vector<Index>>()) {
      if (c < 1 || c > t.j) throw DataError(path.string() + ": causal feature " + std::to_string(c) + " out of range");
      t.causal.push_back(c - 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed truth file: " + e.what());
  }
  return t;
}

std::string roc_csv(const RocCurve& c) {
  std::string s = "fpr,tpr\n";
  for (const auto& p : c.points) s += format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  return s;
}

}  // namespace goalskit
