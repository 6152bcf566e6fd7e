#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/operator.hpp"
#include "fraclab/problem.hpp"
#include "fraclab/spectrum.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fraclab {

/// Coefficients c_k = <u, phi_k> for the first m eigenfields.
template <typename Scalar>
Vector<Scalar> galerkin_project(const Spectrum<Scalar>& spectrum, const Field<Scalar>& u, Eigen::Index m) {
  if (m < 1 || m > spectrum.count()) {
    throw ConfigError("Galerkin size " + std::to_string(m) + " outside [1, " + std::to_string(spectrum.count()) + "]");
  }
  detail::require(u.grid_ptr() == spectrum.grid, "field and spectrum live on different grids");
  return u.grid().cell_volume() * (spectrum.modes.leftCols(m).transpose() * u.values());
}

template <typename Scalar>
Field<Scalar> galerkin_reconstruct(const Spectrum<Scalar>& spectrum, const Vector<Scalar>& coefficients) {
  detail::require(coefficients.size() <= spectrum.count(), "more coefficients than eigenfields");
  return Field<Scalar>(spectrum.grid, spectrum.modes.leftCols(coefficients.size()) * coefficients);
}

namespace detail {

template <typename Scalar>
Vector<Scalar> explicit_rhs(const ProblemSpec& problem, const Vector<Scalar>& w, const Vector<Scalar>& u, Scalar dt) {
  const auto p = static_cast<Scalar>(problem.p);
  Vector<Scalar> r = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Scalar source = problem.f.value(u(i));
    if (w(i) != Scalar(0)) source += w(i) * std::pow(u(i), p);
    r(i) += dt * source;
  }
  return r;
}

}  // namespace detail

/// One IMEX step (I + dt A) u+ = u + dt (w u^p + f(u)) with a cached
/// Cholesky factor; the reaction term is explicit.
template <typename Scalar = double>
class ImexStepper {
 public:
  ImexStepper(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op, Scalar dt, Scalar eps)
      : problem_(problem), grid_(op.grid_ptr()), dt_(dt), eps_(eps), w_(detail::weights(problem, op.grid())) {
    detail::require(dt > Scalar(0), "time step must be positive");
    detail::require(eps > Scalar(0), "positivity floor must be positive");
    Matrix<Scalar> m = dt * op.matrix();
    m.diagonal().array() += Scalar(1);
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) throw NumericalError("factorization of I + dt A failed");
  }

  Scalar dt() const { return dt_; }

  /// Step before the positivity floor is applied.
  Field<Scalar> step_unfloored(const Field<Scalar>& u) const {
    detail::require(u.grid_ptr() == grid_, "field and stepper live on different grids");
    return u.with_values(llt_.solve(detail::explicit_rhs(problem_, w_, u.values(), dt_)));
  }

  Field<Scalar> step(const Field<Scalar>& u) const {
    auto next = step_unfloored(u);
    next.values() = next.values().cwiseMax(eps_);
    return next;
  }

 private:
  ProblemSpec problem_;
  GridPtr<Scalar> grid_;
  Scalar dt_;
  Scalar eps_;
  Vector<Scalar> w_;
  Eigen::LLT<Matrix<Scalar>> llt_;
};

template <typename Scalar>
Field<Scalar> imex_step(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op, const Field<Scalar>& u, Scalar dt,
                        Scalar eps) {
  detail::require(dt > Scalar(0), "time step must be positive");
  return ImexStepper<Scalar>(problem, op, dt, eps).step(u);
}

/// Same step with the implicit solve done mode by mode: c_k / (1 + dt lambda_k).
/// With a truncated spectrum this is the Galerkin-projected step.
template <typename Scalar>
Field<Scalar> imex_step_spectral_unfloored(const ProblemSpec& problem, const Spectrum<Scalar>& spectrum,
                                           const Field<Scalar>& u, Scalar dt) {
  detail::require(dt > Scalar(0), "time step must be positive");
  const auto w = detail::weights(problem, u.grid());
  const Field<Scalar> rhs = u.with_values(detail::explicit_rhs(problem, w, u.values(), dt));
  Vector<Scalar> c = galerkin_project(spectrum, rhs, spectrum.count());
  c.array() /= (Scalar(1) + dt * spectrum.eigenvalues.array());
  return galerkin_reconstruct(spectrum, c);
}

template <typename Scalar>
Field<Scalar> imex_step_spectral(const ProblemSpec& problem, const Spectrum<Scalar>& spectrum, const Field<Scalar>& u,
                                 Scalar dt, Scalar eps) {
  auto next = imex_step_spectral_unfloored(problem, spectrum, u, dt);
  next.values() = next.values().cwiseMax(eps);
  return next;
}

template <typename Scalar = double>
struct Trajectory {
  Scalar dt = 0;
  std::vector<Scalar> times;
  std::vector<Field<Scalar>> snapshots;
  std::vector<Scalar> energies;
  /// ||(u^{k+1} - u^k)/dt||^2 for each step k.
  std::vector<Scalar> dissipation;
  bool halted_early = false;
};

/// Forward IMEX integration from `init` (projected onto u >= eps) up to
/// time T, stopping early once ||u^{k+1} - u^k||_inf / dt <= tolerance.
template <typename Scalar>
Trajectory<Scalar> integrate(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op, const Field<Scalar>& init,
                             Scalar horizon, Scalar dt, const SolverConfig& config) {
  problem.validate();
  detail::require(horizon > Scalar(0), "time horizon must be positive");
  detail::require(init.grid_ptr() == op.grid_ptr(), "initial field and operator live on different grids");
  const auto eps = static_cast<Scalar>(config.eps);
  const auto tol = static_cast<Scalar>(config.tolerance);
  const ImexStepper<Scalar> stepper(problem, op, dt, eps);

  Trajectory<Scalar> traj;
  traj.dt = dt;
  Field<Scalar> u = init.with_values(init.values().cwiseMax(eps));
  traj.times.push_back(Scalar(0));
  traj.energies.push_back(energy(problem, op, u));
  traj.snapshots.push_back(u);

  const auto steps = static_cast<long>(std::ceil(horizon / dt - Scalar(1e-9)));
  const Scalar hn = op.grid().cell_volume();
  for (long k = 1; k <= steps; ++k) {
    Field<Scalar> next = stepper.step(u);
    if (!next.all_finite()) throw NumericalError("non-finite field at step " + std::to_string(k));
    const Vector<Scalar> rate = (next.values() - u.values()) / dt;
    const Scalar j = energy(problem, op, next);
    if (!std::isfinite(static_cast<double>(j))) throw NumericalError("non-finite energy at step " + std::to_string(k));
    traj.times.push_back(static_cast<Scalar>(k) * dt);
    traj.energies.push_back(j);
    traj.dissipation.push_back(hn * rate.squaredNorm());
    traj.snapshots.push_back(next);
    u = std::move(next);
    if (rate.cwiseAbs().maxCoeff() <= tol) {
      traj.halted_early = true;
      break;
    }
  }
  return traj;
}

template <typename Scalar = double>
struct DissipationReport {
  /// max_k |(J^{k+1} - J^k)/dt + ||(u^{k+1} - u^k)/dt||^2|
  Scalar defect = 0;
  /// max_k of the same quantity without the absolute value
  Scalar max_signed = 0;
  /// defect / dt
  Scalar constant = 0;
  Scalar bound_constant = 10;
  bool passes = true;
  std::vector<Scalar> per_step;
};

/// Discrete check of dJ/dt = -||u_t||^2 along a trajectory.
template <typename Scalar>
DissipationReport<Scalar> dissipation_check(const Trajectory<Scalar>& traj, Scalar bound_constant = Scalar(10)) {
  detail::require(traj.snapshots.size() >= 3, "dissipation check needs at least 3 snapshots");
  DissipationReport<Scalar> report;
  report.bound_constant = bound_constant;
  report.max_signed = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k + 1 < traj.energies.size(); ++k) {
    const Scalar r = (traj.energies[k + 1] - traj.energies[k]) / traj.dt + traj.dissipation[k];
    report.per_step.push_back(r);
    report.defect = std::max(report.defect, std::abs(r));
    report.max_signed = std::max(report.max_signed, r);
  }
  report.constant = report.defect / traj.dt;
  report.passes = report.defect <= bound_constant * traj.dt;
  return report;
}

}  // namespace fraclab
