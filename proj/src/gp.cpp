#include "goalskit/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace goalskit {

namespace {

constexpr const char* kGpFormat = "goalskit.gp.v1";
constexpr char kBinMagic[8] = {'G', 'K', 'G', 'P', 'B', 'I', 'N', '1'};

struct Factor {
  Matrix l;
  double jitter = 0.0;
};

// Jitter policy: 1e-10 * mean(diag A), escalating x10 up to 1e-4 * mean(diag A).
Factor factor_with_jitter(const Matrix& k, double sigma2) {
  Matrix a = k;
  a.diagonal().array() += sigma2;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  const double scale = a.diagonal().mean();
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    Matrix aj = a;
    aj.diagonal().array() += rel * scale;
    Eigen::LLT<Matrix> retry(aj);
    if (retry.info() == Eigen::Success) return {retry.matrixL(), rel * scale};
  }
  throw NumericalError("Cholesky factorization of K + sigma2 I failed even with jitter 1e-4 * mean(diag)");
}

double log_marginal_from_factor(const Matrix& l, const Vector& y, const Vector& alpha) {
  const double n = static_cast<double>(y.size());
  const double logdet_half = l.diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

void check_sigma2(double sigma2) {
  if (!(std::isfinite(sigma2) && sigma2 > 0.0)) throw ConfigError("noise variance sigma2 must be positive and finite");
}

}  // namespace

Vector FittedGP::solve(const Vector& b) const {
  const auto l = chol_a.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

Matrix FittedGP::solve(const Matrix& b) const {
  const auto l = chol_a.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

Matrix FittedGP::half_solve(const Matrix& b) const { return chol_a.triangularView<Eigen::Lower>().solve(b); }

MarginalLikelihoodProfile::MarginalLikelihoodProfile(const GramMatrix& k, const Vector& y) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k.values());
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the gram matrix failed");
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  projected_sq_ = (eig.eigenvectors().transpose() * y).array().square();
}

double MarginalLikelihoodProfile::operator()(double sigma2) const {
  const double n = static_cast<double>(eigenvalues_.size());
  const Eigen::ArrayXd a = eigenvalues_.array() + sigma2;
  return -0.5 * (projected_sq_.array() / a).sum() - 0.5 * a.log().sum() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double select_noise_variance(const GramMatrix& k, const Vector& y, const NoiseSelection& opts) {
  const double var_y = sample_variance(y);
  if (!(var_y > 0.0)) throw DataError("response has zero variance; cannot select sigma2");
  const MarginalLikelihoodProfile profile(k, y);
  const double lo = std::log(opts.lower_factor * var_y);
  const double hi = std::log(opts.upper_factor * var_y);
  const Index m = std::max<Index>(opts.grid_points, 3);
  const double step = (hi - lo) / static_cast<double>(m - 1);

  Index best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i) {
    const double v = profile(std::exp(lo + step * static_cast<double>(i)));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + step * static_cast<double>(std::max<Index>(best - 1, 0));
  double b = lo + step * static_cast<double>(std::min<Index>(best + 1, m - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = profile(std::exp(c));
  double fd = profile(std::exp(d));
  while (b - a > opts.tolerance) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = profile(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = profile(std::exp(d));
    }
  }
  const double mid = 0.5 * (a + b);
  // the bracket edge can beat the interior when the optimum sits on the boundary
  const double edge = best == 0 ? lo : (best == m - 1 ? hi : mid);
  return std::exp(profile(std::exp(edge)) > profile(std::exp(mid)) ? edge : mid);
}

FittedGP fit_gram(const Vector& y, GramMatrix k, const KernelConfig& cfg, std::optional<double> sigma2) {
  if (k.size() != y.size()) throw std::invalid_argument("gram matrix size does not match response length");
  FittedGP g;
  g.cfg = cfg;
  g.sigma2 = sigma2 ? *sigma2 : select_noise_variance(k, y);
  check_sigma2(g.sigma2);
  Factor f = factor_with_jitter(k.values(), g.sigma2);
  g.chol_a = std::move(f.l);
  g.jitter = f.jitter;
  g.k = std::move(k);
  g.alpha = g.solve(y);
  g.f_hat = g.k.values() * g.alpha;
  g.log_marginal = log_marginal_from_factor(g.chol_a, y, g.alpha);
  return g;
}

FittedGP fit(const Dataset& d, const KernelConfig& cfg, std::optional<double> sigma2) {
  if (!d.standardized) throw DataError("GP fit requires a standardized dataset");
  cfg.validate();
  if (sigma2) check_sigma2(*sigma2);
  return fit_gram(d.y, gram_matrix(cfg, d.x), cfg, sigma2);
}

double log_marginal_likelihood(const Dataset& d, const KernelConfig& cfg, double sigma2) {
  check_sigma2(sigma2);
  const GramMatrix k = gram_matrix(cfg, d.x);
  Matrix a = k.values();
  a.diagonal().array() += sigma2;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed in log marginal likelihood");
  const Matrix l = llt.matrixL();
  const Vector alpha = llt.solve(d.y);
  return log_marginal_from_factor(l, d.y, alpha);
}

PosteriorF posterior_f(const FittedGP& g, const Vector& y) {
  if (y.size() != g.n()) throw std::invalid_argument("response length does not match the fitted GP");
  const Matrix& k = g.k.values();
  PosteriorF post;
  post.mean = k * g.solve(y);
  const Matrix v = g.half_solve(k);
  Matrix cov = k - v.transpose() * v;
  post.cov = 0.5 * (cov + cov.transpose());
  return post;
}

void save_gp(const FittedGP& g, const Dataset& d, const std::filesystem::path& json_path) {
  std::filesystem::path bin_path = json_path;
  bin_path.replace_extension(".bin");
  nlohmann::json j;
  j["format"] = kGpFormat;
  j["kernel"] = to_string(g.cfg.kind);
  j["theta"] = g.cfg.theta;
  j["sigma2"] = g.sigma2;
  j["jitter"] = g.jitter;
  j["log_marginal"] = g.log_marginal;
  j["n"] = d.n();
  j["j"] = d.j();
  j["data_hash"] = hex64(d.content_hash());
  j["matrix_file"] = bin_path.filename().string();
  std::ofstream out(json_path);
  if (!out) throw DataError("cannot write " + json_path.string());
  out << j.dump(2) << '\n';

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot write " + bin_path.string());
  const std::uint64_t n = static_cast<std::uint64_t>(g.n());
  bin.write(kBinMagic, sizeof(kBinMagic));
  bin.write(reinterpret_cast<const char*>(&n), sizeof(n));
  bin.write(reinterpret_cast<const char*>(g.chol_a.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
  bin.write(reinterpret_cast<const char*>(g.alpha.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!bin) throw DataError("failed writing " + bin_path.string());
}

FittedGP load_gp(const std::filesystem::path& json_path, const Dataset& d) {
  std::ifstream in(json_path);
  if (!in) throw DataError("cannot open " + json_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(json_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kGpFormat) throw DataError(json_path.string() + ": not a " + kGpFormat + " document");
  if (j.at("data_hash").get<std::string>() != hex64(d.content_hash()))
    throw DataError(json_path.string() + ": dataset hash does not match the fitted model");

  FittedGP g;
  g.cfg.kind = kernel_kind_from_string(j.at("kernel").get<std::string>());
  g.cfg.theta = j.at("theta").get<double>();
  g.sigma2 = j.at("sigma2").get<double>();
  g.jitter = j.value("jitter", 0.0);
  g.log_marginal = j.at("log_marginal").get<double>();
  g.k = gram_matrix(g.cfg, d.x);

  const auto bin_path = json_path.parent_path() / j.at("matrix_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open " + bin_path.string());
  char magic[8];
  std::uint64_t n = 0;
  bin.read(magic, sizeof(magic));
  bin.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!bin || std::memcmp(magic, kBinMagic, sizeof(magic)) != 0 || n != static_cast<std::uint64_t>(d.n()))
    throw DataError(bin_path.string() + ": bad matrix sidecar");
  g.chol_a.resize(static_cast<Index>(n), static_cast<Index>(n));
  g.alpha.resize(static_cast<Index>(n));
  bin.read(reinterpret_cast<char*>(g.chol_a.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
  bin.read(reinterpret_cast<char*>(g.alpha.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!bin) throw DataError(bin_path.string() + ": truncated matrix sidecar");
  g.f_hat = g.k.values() * g.alpha;
  return g;
}

}  // namespace goalskit
