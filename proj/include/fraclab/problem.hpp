#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace fraclab {

enum class NonlinearityId { zero, linear, power, lipschitz_custom };

inline std::string_view to_string(NonlinearityId id) {
  switch (id) {
    case NonlinearityId::zero: return "zero";
    case NonlinearityId::linear: return "linear";
    case NonlinearityId::power: return "power";
    case NonlinearityId::lipschitz_custom: return "lipschitz_custom";
  }
  return "?";
}

inline NonlinearityId parse_nonlinearity_id(std::string_view text) {
  if (text == "zero") return NonlinearityId::zero;
  if (text == "linear") return NonlinearityId::linear;
  if (text == "power") return NonlinearityId::power;
  if (text == "lipschitz_custom") return NonlinearityId::lipschitz_custom;
  throw ConfigError("unknown nonlinearity id '" + std::string(text) + "'");
}

/// The lower-order term f(u) together with its primitive F(u) = int_0^u f.
///
///   zero              f = 0
///   linear            f = c u
///   power             f = c u^q
///   lipschitz_custom  f = c (u - tanh u)      F = c (u^2/2 - log cosh u)
///
/// The last one is globally Lipschitz with f(0) = f'(0) = 0.
struct NonlinearitySpec {
  NonlinearityId id = NonlinearityId::zero;
  double c = 0.0;
  double q = 1.0;

  static NonlinearitySpec zero() { return {}; }
  static NonlinearitySpec linear(double c) { return {NonlinearityId::linear, c, 1.0}; }
  static NonlinearitySpec power(double c, double q) { return {NonlinearityId::power, c, q}; }
  static NonlinearitySpec lipschitz_custom(double c) { return {NonlinearityId::lipschitz_custom, c, 1.0}; }

  double growth_exponent() const {
    switch (id) {
      case NonlinearityId::zero: return 0.0;
      case NonlinearityId::power: return q;
      default: return 1.0;
    }
  }

  bool vanishes_at_zero() const { return id != NonlinearityId::power || q > 0.0 || c == 0.0; }

  template <typename Scalar>
  Scalar value(Scalar u) const {
    const auto cc = static_cast<Scalar>(c);
    switch (id) {
      case NonlinearityId::zero: return Scalar(0);
      case NonlinearityId::linear: return cc * u;
      case NonlinearityId::power: return cc * std::pow(u, static_cast<Scalar>(q));
      case NonlinearityId::lipschitz_custom: return cc * (u - std::tanh(u));
    }
    return Scalar(0);
  }

  template <typename Scalar>
  Scalar primitive(Scalar u) const {
    const auto cc = static_cast<Scalar>(c);
    switch (id) {
      case NonlinearityId::zero: return Scalar(0);
      case NonlinearityId::linear: return cc * u * u / Scalar(2);
      case NonlinearityId::power: {
        const auto qq = static_cast<Scalar>(q);
        return cc * std::pow(u, qq + Scalar(1)) / (qq + Scalar(1));
      }
      case NonlinearityId::lipschitz_custom: {
        // log cosh u = |u| + log1p(exp(-2|u|)) - log 2, stable for large |u|
        const Scalar a = std::abs(u);
        const Scalar log_cosh = a + std::log1p(std::exp(Scalar(-2) * a)) - std::log(Scalar(2));
        return cc * (u * u / Scalar(2) - log_cosh);
      }
    }
    return Scalar(0);
  }

  void validate() const {
    if (id == NonlinearityId::power) {
      detail::require(q > -1.0, "power nonlinearity needs q > -1 for a finite primitive");
    }
  }
};

/// Coefficient in front of u^p: the literal x1 of the model, |x1|, the
/// constant 1 (control runs), or none (power term switched off).
enum class WeightMode { x1, abs_x1, unit, none };

inline std::string_view to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::x1: return "x1";
    case WeightMode::abs_x1: return "abs_x1";
    case WeightMode::unit: return "one";
    case WeightMode::none: return "none";
  }
  return "?";
}

inline WeightMode parse_weight_mode(std::string_view text) {
  if (text == "x1") return WeightMode::x1;
  if (text == "abs_x1") return WeightMode::abs_x1;
  if (text == "one" || text == "unit") return WeightMode::unit;
  if (text == "none") return WeightMode::none;
  throw ConfigError("unknown weight '" + std::string(text) + "'");
}

struct ProblemSpec {
  double s = 0.5;
  double p = 2.0;
  NonlinearitySpec f;
  DomainSpec domain;
  std::optional<double> gamma;
  WeightMode weight = WeightMode::x1;

  void validate() const {
    using detail::require;
    require(s > 0.0 && s < 1.0, "fractional order s must lie in (0,1)");
    require(std::isfinite(p), "exponent p must be finite");
    domain.validate();
    f.validate();
    if (gamma) {
      require(domain.kind == DomainKind::half_space, "growth exponent gamma only applies to the half-space");
      require(*gamma > 0.0 && *gamma < 2.0 * s, "growth exponent gamma must lie in (0, 2s)");
    }
  }

  template <typename Scalar>
  Scalar weight_at(Scalar x1) const {
    switch (weight) {
      case WeightMode::x1: return x1;
      case WeightMode::abs_x1: return std::abs(x1);
      case WeightMode::unit: return Scalar(1);
      case WeightMode::none: return Scalar(0);
    }
    return Scalar(0);
  }
};

enum class SolveMethod { descent, minimax };

inline std::string_view to_string(SolveMethod m) { return m == SolveMethod::descent ? "descent" : "minimax"; }

inline SolveMethod parse_solve_method(std::string_view text) {
  if (text == "descent") return SolveMethod::descent;
  if (text == "minimax") return SolveMethod::minimax;
  throw ConfigError("unknown solve method '" + std::string(text) + "'");
}

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 20000;
  double dt = 0.01;
  double eps = 1e-12;  // positivity floor
  std::uint64_t seed = 12345;
  SolveMethod method = SolveMethod::descent;

  void validate() const {
    using detail::require;
    require(tolerance > 0.0, "tolerance must be positive");
    require(max_iterations > 0, "max_iter must be positive");
    require(dt > 0.0, "dt must be positive");
    require(eps > 0.0, "eps must be positive");
  }
};

}  // namespace fraclab
