#ifndef GOALSKIT_COMMON_HPP
#define GOALSKIT_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace goalskit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.3.0";

/// Malformed or inconsistent input data (files, columns, values).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or solve that could not be completed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: option combinations that cannot be honored.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sample variance with the N-1 denominator.
inline double sample_variance(const Vector& v) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / (n - 1.0);
}

/// 64-bit FNV-1a over raw bytes; stable across platforms with the same endianness.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ULL);

std::string hex64(std::uint64_t v);

}  // namespace goalskit

#endif  // GOALSKIT_COMMON_HPP
