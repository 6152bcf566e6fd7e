#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/operator.hpp"
#include "fraclab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fraclab {

enum class Regime { subcritical, supercritical, negative_exponent };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::supercritical: return "supercritical";
    case Regime::negative_exponent: return "negative_exponent";
  }
  return "?";
}

/// Subcritical 0 < p < (n+2s)/(n-2s), supercritical p >= (n+2s)/(n-2s),
/// negative exponent p < 0. When n <= 2s there is no finite threshold and
/// every p > 0 is subcritical.
inline Regime regime_classify(int n, double s, double p) {
  detail::require(n >= 1, "dimension must be positive");
  detail::require(s > 0.0 && s < 1.0, "fractional order s must lie in (0,1)");
  if (p == 0.0) throw ConfigError("p = 0 lies outside the subcritical/supercritical/negative cases");
  if (p < 0.0) return Regime::negative_exponent;
  const double nn = static_cast<double>(n);
  if (nn <= 2.0 * s) return Regime::subcritical;
  return p < (nn + 2.0 * s) / (nn - 2.0 * s) ? Regime::subcritical : Regime::supercritical;
}

inline Regime regime_classify(const ProblemSpec& problem) {
  return regime_classify(problem.domain.dimension, problem.s, problem.p);
}

/// max_x |u(x1, x') - u(-x1, x')|
template <typename Scalar>
Scalar symmetry_defect(const Field<Scalar>& u) {
  const auto perm = u.grid().reflection_permutation();
  if (!perm) throw ConfigError("symmetry defect needs a grid closed under x1 -> -x1");
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    worst = std::max(worst, std::abs(u[i] - u[(*perm)[static_cast<std::size_t>(i)]]));
  }
  return worst;
}

enum class MonotoneMode { decreasing_for_x1_positive, increasing_all };

template <typename Scalar = double>
struct MonotonicityReport {
  Scalar fraction = 1;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  /// Largest violation and the offending (lower x1, upper x1) rows.
  Scalar worst_violation = 0;
  std::optional<std::pair<Eigen::Index, Eigen::Index>> worst_pair;
};

/// Fraction of x1-neighbours (same x') obeying the requested ordering; ties pass.
template <typename Scalar>
MonotonicityReport<Scalar> monotonicity_profile(const Field<Scalar>& u, MonotoneMode mode,
                                                std::optional<Scalar> tolerance = std::nullopt) {
  const auto& grid = u.grid();
  const auto [lo, hi] = grid.x1_index_range();
  if (hi <= lo) throw ConfigError("monotonicity needs at least two distinct x1 levels");
  const Scalar tol = tolerance.value_or(Scalar(1e-12) * u.values().cwiseAbs().maxCoeff());
  MonotonicityReport<Scalar> report;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto& m = grid.lattice(i);
    const auto j = grid.interior_index({m[0] + 1, m[1]});
    if (j < 0) continue;
    Scalar violation = 0;
    if (mode == MonotoneMode::increasing_all) {
      violation = u[i] - u[j];
    } else {
      if (m[0] < 0) continue;
      violation = u[j] - u[i];
    }
    ++report.pairs;
    if (violation > tol) {
      ++report.violations;
      if (violation > report.worst_violation) {
        report.worst_violation = violation;
        report.worst_pair = std::make_pair(i, j);
      }
    }
  }
  if (report.pairs > 0) {
    report.fraction = Scalar(1) - static_cast<Scalar>(report.violations) / static_cast<Scalar>(report.pairs);
  }
  return report;
}

enum class SweepDirection { from_left_disk, from_zero_halfspace };

template <typename Scalar = double>
struct MovingPlaneTrace {
  std::vector<Scalar> lambdas;
  std::vector<Scalar> w_min;
  /// Limiting plane position; empty means the sweep never stopped (+inf).
  std::optional<Scalar> lambda0;
  Scalar resolution = 0;  // lambda0 is known to +- one spacing
};

/// Moves T_lambda = {x1 = lambda} through half-lattice positions and records
/// min over Sigma_lambda of w_lambda(x) = u(x^lambda) - u(x), with u = 0 at
/// reflected points outside Omega. On the half-space the plane stops at R/2
/// so that every reflection stays inside the truncation box.
template <typename Scalar>
MovingPlaneTrace<Scalar> moving_plane_sweep(const Field<Scalar>& u, SweepDirection direction,
                                            std::optional<Scalar> tolerance = std::nullopt) {
  const auto& grid = u.grid();
  const bool half = grid.domain().kind == DomainKind::half_space;
  if (half != (direction == SweepDirection::from_zero_halfspace)) {
    throw ConfigError("sweep direction does not match the domain kind");
  }
  const auto [lo, hi] = grid.x1_index_range();
  // plane position lambda = k * h / 2
  const int first = 2 * lo + 1;
  const int last = half ? static_cast<int>(std::lround(*grid.domain().truncation_radius * grid.domain().resolution))
                        : 2 * hi - 1;
  if (last < first) throw ConfigError("no admissible lattice position for the moving plane");
  const Scalar tol = tolerance.value_or(Scalar(1e-9) * u.values().cwiseAbs().maxCoeff());
  const Scalar h = grid.spacing();

  MovingPlaneTrace<Scalar> trace;
  trace.resolution = h;
  bool stopped = false;
  for (int k = first; k <= last; ++k) {
    Scalar worst = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const auto& m = grid.lattice(i);
      if (2 * m[0] >= k) continue;
      worst = std::min(worst, u.at({k - m[0], m[1]}) - u[i]);
    }
    const Scalar lambda = static_cast<Scalar>(k) * h / Scalar(2);
    trace.lambdas.push_back(lambda);
    trace.w_min.push_back(worst);
    if (!stopped && worst < -tol) {
      stopped = true;
      trace.lambda0 = lambda - h / Scalar(2);
    }
  }
  return trace;
}

template <typename Scalar = double>
struct PohozaevReport {
  /// integral of (n-2s)/2 |(-Delta)^s u|^2 + nF(u) + x.grad F(u) - n/(p+1) w u^{p+1}
  Scalar printed = 0;
  /// same with (n-2s)/2 u (-Delta)^s u in place of the squared operator
  Scalar half_power = 0;
  std::size_t one_sided_nodes = 0;
};

/// Discrete Pohozaev functional. x.grad F(u) = f(u) x.grad u with centred
/// differences; nodes with an exterior neighbour fall back to one-sided ones.
template <typename Scalar>
PohozaevReport<Scalar> pohozaev_residual(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op,
                                         const Field<Scalar>& u) {
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  detail::check_admissible(problem, u.values());
  const auto& grid = op.grid();
  const int n = grid.dimension();
  const Scalar h = grid.spacing();
  const Scalar s = op.order();
  const auto p = static_cast<Scalar>(problem.p);
  const auto w = detail::weights(problem, grid);
  const Vector<Scalar> au = op.matrix() * u.values();
  const Scalar lead = (static_cast<Scalar>(n) - Scalar(2) * s) / Scalar(2);

  PohozaevReport<Scalar> report;
  Scalar common = 0, full = 0, half = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto& m = grid.lattice(i);
    Scalar x_dot_grad = 0;
    bool one_sided = false;
    for (int d = 0; d < n; ++d) {
      LatticeIndex up = m, down = m;
      ++up[d];
      --down[d];
      const bool has_up = grid.interior_index(up) >= 0;
      const bool has_down = grid.interior_index(down) >= 0;
      Scalar deriv = 0;
      if (has_up && has_down) {
        deriv = (u.at(up) - u.at(down)) / (Scalar(2) * h);
      } else if (has_up) {
        deriv = (u.at(up) - u[i]) / h;
        one_sided = true;
      } else if (has_down) {
        deriv = (u[i] - u.at(down)) / h;
        one_sided = true;
      } else {
        deriv = (u.at(up) - u.at(down)) / (Scalar(2) * h);
        one_sided = true;
      }
      x_dot_grad += grid.point(i)(d) * deriv;
    }
    if (one_sided) ++report.one_sided_nodes;
    Scalar term = static_cast<Scalar>(n) * problem.f.primitive(u[i]) + problem.f.value(u[i]) * x_dot_grad;
    if (w(i) != Scalar(0)) term -= static_cast<Scalar>(n) / (p + Scalar(1)) * w(i) * std::pow(u[i], p + Scalar(1));
    common += term;
    full += lead * au(i) * au(i);
    half += lead * u[i] * au(i);
  }
  const Scalar hn = grid.cell_volume();
  report.printed = hn * (common + full);
  report.half_power = hn * (common + half);
  return report;
}

template <typename Scalar = double>
struct BoundaryFit {
  Scalar slope = 0;
  Scalar r2 = 0;
  std::size_t samples = 0;
};

namespace detail {

template <typename Scalar>
std::pair<Scalar, Scalar> least_squares_line(const std::vector<Scalar>& x, const std::vector<Scalar>& y,
                                             Scalar* r2 = nullptr) {
  const auto count = static_cast<Scalar>(x.size());
  Scalar mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= count;
  my /= count;
  Scalar sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= Scalar(0)) throw ConfigError("log-log fit needs at least two distinct abscissae");
  const Scalar slope = sxy / sxx;
  if (r2) *r2 = syy > Scalar(0) ? (sxy * sxy) / (sxx * syy) : Scalar(1);
  return {slope, my - slope * mx};
}

}  // namespace detail

/// Least-squares slope of log u against log d over nodes with d < band and u > 10 eps.
template <typename Scalar>
BoundaryFit<Scalar> boundary_exponent_fit(const Field<Scalar>& u, Scalar band = Scalar(0.2), Scalar eps = Scalar(1e-12)) {
  const auto& grid = u.grid();
  std::vector<Scalar> x, y;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const Scalar d = grid.boundary_distance(i);
    if (d < band && u[i] > Scalar(10) * eps) {
      x.push_back(std::log(d));
      y.push_back(std::log(u[i]));
    }
  }
  if (x.size() < 5) throw ConfigError("boundary band holds fewer than 5 usable nodes");
  BoundaryFit<Scalar> fit;
  fit.samples = x.size();
  fit.slope = detail::least_squares_line(x, y, &fit.r2).first;
  return fit;
}

template <typename Scalar = double>
struct SingularityBand {
  Scalar d_upper = 0;
  std::size_t nodes = 0;
  Scalar rhs_max = 0;
  Scalar rhs_distance = 0;
  Scalar lhs_max = 0;
  Scalar lhs_distance = 0;
};

template <typename Scalar = double>
struct SingularityReport {
  std::vector<SingularityBand<Scalar>> bands;
  /// log-log slope of max |w u^p + f(u)| against d (negative = blow-up)
  Scalar rhs_exponent = 0;
  /// log-log slope of max |(-Delta)^s u| against d
  Scalar lhs_exponent = 0;
  bool rhs_blows_up = false;
  bool nonexistence_signature = false;
  std::vector<std::string> notes;
};

struct SingularityOptions {
  /// Nodes with |x1| below this are skipped (on disks/intervals only).
  double min_abs_x1 = 0.5;
  int max_bands = 12;
  double blow_up_threshold = -0.1;
  double mismatch_threshold = 0.25;
};

/// Compares the growth of the reaction term and of the operator near the
/// boundary over dyadic bands d in [2^{-k-1}, 2^{-k}).
template <typename Scalar>
SingularityReport<Scalar> rhs_singularity_probe(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op,
                                                const Field<Scalar>& u, SingularityOptions opt = {}) {
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  detail::require(problem.p < 0.0, "singularity probe applies to negative exponents p < 0");
  if ((u.values().array() <= Scalar(0)).any()) throw ConfigError("singularity probe needs a positive field");
  const auto& grid = op.grid();
  const auto p = static_cast<Scalar>(problem.p);
  const auto w = detail::weights(problem, grid);
  const Vector<Scalar> au = op.matrix() * u.values();
  const bool filter_x1 = grid.domain().kind != DomainKind::half_space;

  SingularityReport<Scalar> report;
  std::vector<Scalar> ld_rhs, lr, ld_lhs, ll;
  for (int k = 1; k <= opt.max_bands; ++k) {
    SingularityBand<Scalar> band;
    band.d_upper = std::ldexp(Scalar(1), -k);
    const Scalar d_lower = band.d_upper / Scalar(2);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const Scalar d = grid.boundary_distance(i);
      if (d < d_lower || d >= band.d_upper) continue;
      if (filter_x1 && std::abs(grid.x1(i)) < static_cast<Scalar>(opt.min_abs_x1)) continue;
      ++band.nodes;
      const Scalar rhs = std::abs(w(i) * std::pow(u[i], p) + problem.f.value(u[i]));
      if (rhs > band.rhs_max) {
        band.rhs_max = rhs;
        band.rhs_distance = d;
      }
      if (std::abs(au(i)) > band.lhs_max) {
        band.lhs_max = std::abs(au(i));
        band.lhs_distance = d;
      }
    }
    if (band.nodes == 0) continue;
    if (band.rhs_max > Scalar(0)) {
      ld_rhs.push_back(std::log(band.rhs_distance));
      lr.push_back(std::log(band.rhs_max));
    }
    if (band.lhs_max > Scalar(0)) {
      ld_lhs.push_back(std::log(band.lhs_distance));
      ll.push_back(std::log(band.lhs_max));
    }
    report.bands.push_back(band);
  }
  auto fit = [&](const std::vector<Scalar>& x, const std::vector<Scalar>& y, const char* what) {
    if (x.size() < 2) {
      report.notes.push_back(std::string("fewer than two populated bands for ") + what);
      return Scalar(0);
    }
    try {
      return detail::least_squares_line(x, y).first;
    } catch (const ConfigError&) {
      report.notes.push_back(std::string("degenerate band distances for ") + what);
      return Scalar(0);
    }
  };
  report.rhs_exponent = fit(ld_rhs, lr, "the reaction term");
  report.lhs_exponent = fit(ld_lhs, ll, "the operator");
  report.rhs_blows_up = report.rhs_exponent < static_cast<Scalar>(opt.blow_up_threshold);
  report.nonexistence_signature =
      report.rhs_blows_up &&
      std::abs(report.rhs_exponent - report.lhs_exponent) > static_cast<Scalar>(opt.mismatch_threshold);
  if (report.nonexistence_signature) {
    report.notes.push_back("reaction term blows up faster than the operator can balance near the boundary");
  }
  return report;
}

template <typename Scalar = double>
struct DiagnosticsReport {
  std::optional<Scalar> symmetry_defect;
  Scalar monotone_fraction = 1;
  std::optional<Scalar> lambda0;  // empty: sweep never stopped (+inf)
  Scalar pohozaev_residual = 0;
  Scalar pohozaev_halfpower = 0;
  std::optional<Scalar> boundary_slope;
  std::optional<Scalar> boundary_r2;
  Regime regime = Regime::subcritical;
  std::vector<std::string> notes;
};

struct DiagnoseOptions {
  bool pohozaev_halfpower = false;  // report the half-power variant as the residual
  double eps = 1e-12;
};

/// Runs every field diagnostic appropriate for the domain kind.
template <typename Scalar>
DiagnosticsReport<Scalar> diagnose(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op,
                                   const Field<Scalar>& u, DiagnoseOptions opt = {}) {
  DiagnosticsReport<Scalar> report;
  report.regime = regime_classify(problem);
  const auto& grid = op.grid();
  const bool half = grid.domain().kind == DomainKind::half_space;

  if (grid.reflection_closed()) {
    report.symmetry_defect = symmetry_defect(u);
  } else {
    report.notes.push_back("symmetry defect skipped: grid is not closed under x1 -> -x1");
  }
  const auto mode = half ? MonotoneMode::increasing_all : MonotoneMode::decreasing_for_x1_positive;
  report.monotone_fraction = monotonicity_profile(u, mode).fraction;
  report.lambda0 =
      moving_plane_sweep(u, half ? SweepDirection::from_zero_halfspace : SweepDirection::from_left_disk).lambda0;

  const auto poho = pohozaev_residual(problem, op, u);
  report.pohozaev_residual = opt.pohozaev_halfpower ? poho.half_power : poho.printed;
  report.pohozaev_halfpower = poho.half_power;
  if (poho.one_sided_nodes > 0) {
    report.notes.push_back("pohozaev: one-sided differences at " + std::to_string(poho.one_sided_nodes) + " nodes");
  }
  try {
    const auto fit = boundary_exponent_fit(u, Scalar(0.2), static_cast<Scalar>(opt.eps));
    report.boundary_slope = fit.slope;
    report.boundary_r2 = fit.r2;
  } catch (const ConfigError& e) {
    report.notes.push_back(std::string("boundary fit skipped: ") + e.what());
  }
  return report;
}

}  // namespace fraclab
