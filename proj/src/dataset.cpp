#include "goalskit/dataset.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace goalskit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace

std::uint64_t Dataset::content_hash() const {
  std::uint64_t h = fnv1a(x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
  return fnv1a(y.data(), sizeof(double) * static_cast<std::size_t>(y.size()), h);
}

void validate(const Dataset& d) {
  if (d.n() < 2) throw DataError("dataset needs at least 2 rows, got " + std::to_string(d.n()));
  if (d.j() < 1) throw DataError("dataset needs at least 1 feature column");
  if (d.y.size() != d.n())
    throw DataError("response length " + std::to_string(d.y.size()) + " does not match " +
                    std::to_string(d.n()) + " rows");
  if (static_cast<Index>(d.feature_names.size()) != d.j())
    throw DataError("feature name count does not match column count");
  if (!d.x.allFinite()) throw DataError("design matrix contains non-finite values");
  if (!d.y.allFinite()) throw DataError("response contains non-finite values");
}

std::vector<std::string> default_feature_names(Index j) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(j));
  for (Index c = 0; c < j; ++c) names.push_back("x" + std::to_string(c + 1));
  return names;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view response_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("data file is empty: " + path.string());
  const auto header = split_commas(line);

  Index response_idx = -1;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response_column) {
      if (response_idx >= 0) throw DataError("response column '" + std::string(response_column) + "' appears twice");
      response_idx = static_cast<Index>(c);
    } else {
      names.emplace_back(header[c]);
    }
  }
  if (response_idx < 0)
    throw DataError("response column '" + std::string(response_column) + "' not found in " + path.string());

  const std::size_t width = header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != width)
      throw DataError(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width));
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw DataError(path.string() + ": non-numeric cell at row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + " ('" + std::string(header[c]) + "'): '" + std::string(cells[c]) +
                        "'");
      values.push_back(v);
    }
    ++rows;
  }

  Dataset d;
  d.response_name = std::string(response_column);
  d.feature_names = std::move(names);
  const Index n = static_cast<Index>(rows);
  const Index j = static_cast<Index>(width) - 1;
  d.x.resize(n, j);
  d.y.resize(n);
  for (Index r = 0; r < n; ++r) {
    Index col = 0;
    for (Index c = 0; c < static_cast<Index>(width); ++c) {
      const double v = values[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)];
      if (c == response_idx)
        d.y(r) = v;
      else
        d.x(r, col++) = v;
    }
  }
  validate(d);
  return d;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file: " + path.string());
  std::string buf;
  for (const auto& name : d.feature_names) {
    buf += name;
    buf += ',';
  }
  buf += d.response_name;
  buf += '\n';
  for (Index r = 0; r < d.n(); ++r) {
    for (Index c = 0; c < d.j(); ++c) {
      append_double(buf, d.x(r, c));
      buf += ',';
    }
    append_double(buf, d.y(r));
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) throw DataError("failed writing data file: " + path.string());
}

Dataset standardize(Dataset d) {
  if (d.standardized) throw DataError("dataset is already standardized; refusing to standardize twice");
  validate(d);
  const double n = static_cast<double>(d.n());
  d.column_means = d.x.colwise().mean().transpose();
  d.column_sds.resize(d.j());
  for (Index c = 0; c < d.j(); ++c) {
    d.x.col(c).array() -= d.column_means(c);
    const double sd = std::sqrt(d.x.col(c).squaredNorm() / (n - 1.0));
    if (!(sd > 0.0)) throw DataError("feature column '" + d.feature_names[static_cast<std::size_t>(c)] + "' is constant");
    d.x.col(c) /= sd;
    d.column_sds(c) = sd;
  }
  d.y_mean = d.y.mean();
  d.y.array() -= d.y_mean;
  d.y_sd = std::sqrt(d.y.squaredNorm() / (n - 1.0));
  if (!(d.y_sd > 0.0)) throw DataError("response column '" + d.response_name + "' is constant");
  d.y /= d.y_sd;
  d.standardized = true;
  return d;
}

Matrix principal_component_scores(const Matrix& x, Index k, bool rescale) {
  const Index n = x.rows();
  const Index j = x.cols();
  if (k < 1 || k > std::min(n - 1, j))
    throw std::out_of_range("principal component count " + std::to_string(k) + " outside [1, " +
                            std::to_string(std::min(n - 1, j)) + "]");
  Matrix loadings(j, k);
  if (j <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(x.transpose() * x);
    // eigenvalues ascend; take the trailing k in reverse
    for (Index c = 0; c < k; ++c) loadings.col(c) = eig.eigenvectors().col(j - 1 - c);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(x * x.transpose());
    for (Index c = 0; c < k; ++c) {
      Vector v = x.transpose() * eig.eigenvectors().col(n - 1 - c);
      loadings.col(c) = v / v.norm();
    }
  }
  for (Index c = 0; c < k; ++c) {
    Index arg = 0;
    loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (loadings(arg, c) < 0.0) loadings.col(c) *= -1.0;
  }
  Matrix scores = x * loadings;
  if (rescale) {
    for (Index c = 0; c < k; ++c) {
      const double sd = std::sqrt(sample_variance(scores.col(c)));
      if (sd > 0.0) scores.col(c) /= sd;
    }
  }
  return scores;
}

Matrix top_principal_components(const Dataset& d, Index k) {
  if (!d.standardized) throw DataError("principal components require a standardized dataset");
  return principal_component_scores(d.x, k, true);
}

}  // namespace goalskit
