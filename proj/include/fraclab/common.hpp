#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fraclab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Bad user input: malformed config, out-of-range parameters, mismatched grids.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic broke down (NaN, overflow, failed factorization, no convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Scalar>
constexpr Scalar pi() {
  return static_cast<Scalar>(3.141592653589793238462643383279502884L);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail
}  // namespace fraclab
