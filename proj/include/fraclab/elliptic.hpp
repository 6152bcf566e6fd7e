#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"
#include "fraclab/operator.hpp"
#include "fraclab/problem.hpp"
#include "fraclab/spectrum.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fraclab {

template <typename Scalar = double>
struct SolveResult {
  Field<Scalar> field;
  int iterations = 0;
  Scalar final_residual = 0;
  std::vector<Scalar> energy_trace;
  bool converged = false;
  std::string stop_reason;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> weights(const ProblemSpec& problem, const Grid<Scalar>& grid) {
  Vector<Scalar> w(grid.interior_count());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = problem.weight_at(grid.x1(i));
  return w;
}

inline bool is_integer(double p) { return std::floor(p) == p; }

template <typename Scalar>
void check_admissible(const ProblemSpec& problem, const Vector<Scalar>& u) {
  if (problem.p == -1.0) throw ConfigError("p = -1 makes the u^{p+1}/(p+1) term singular");
  if (!is_integer(problem.p) && (u.array() < Scalar(0)).any()) {
    throw ConfigError("negative nodal value with non-integer exponent p");
  }
}

/// J from u and A u (callers that already hold A u avoid a second product).
template <typename Scalar>
Scalar energy_from(const ProblemSpec& problem, const Vector<Scalar>& w, Scalar hn, const Vector<Scalar>& u,
                   const Vector<Scalar>& au) {
  const auto p = static_cast<Scalar>(problem.p);
  Scalar acc = Scalar(0.5) * u.dot(au);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    acc -= problem.f.primitive(u(i));
    if (w(i) != Scalar(0)) acc -= w(i) * std::pow(u(i), p + Scalar(1)) / (p + Scalar(1));
  }
  return hn * acc;
}

template <typename Scalar>
Vector<Scalar> gradient_from(const ProblemSpec& problem, const Vector<Scalar>& w, const Vector<Scalar>& u,
                             const Vector<Scalar>& au) {
  const auto p = static_cast<Scalar>(problem.p);
  Vector<Scalar> g = au;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    g(i) -= problem.f.value(u(i));
    if (w(i) != Scalar(0)) g(i) -= w(i) * std::pow(u(i), p);
  }
  return g;
}

}  // namespace detail

/// Discrete energy sum_i h^n [ u (Au)/2 - F(u) - w(x) u^{p+1}/(p+1) ].
template <typename Scalar>
Scalar energy(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op, const Field<Scalar>& u) {
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  detail::check_admissible(problem, u.values());
  const auto w = detail::weights(problem, op.grid());
  const Vector<Scalar> au = op.matrix() * u.values();
  return detail::energy_from(problem, w, op.grid().cell_volume(), u.values(), au);
}

/// L2 gradient of the discrete energy: A u - w u^p - f(u).
template <typename Scalar>
Field<Scalar> energy_gradient(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op, const Field<Scalar>& u) {
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  detail::check_admissible(problem, u.values());
  const auto w = detail::weights(problem, op.grid());
  const Vector<Scalar> au = op.matrix() * u.values();
  return u.with_values(detail::gradient_from(problem, w, u.values(), au));
}

/// Ground eigenfield scaled to the given sup-norm and floored at eps.
template <typename Scalar>
Field<Scalar> default_initial_guess(const NonlocalOperator<Scalar>& op, Scalar amplitude, Scalar eps,
                                    std::uint64_t seed = 12345) {
  EigenOptions opt;
  opt.seed = seed;
  const auto spectrum = eigendecompose(op, 1, opt);
  Vector<Scalar> v = spectrum.modes.col(0);
  v *= amplitude / v.cwiseAbs().maxCoeff();
  return Field<Scalar>(op.grid_ptr(), v.cwiseMax(eps));
}

namespace detail {

/// tau > 0 maximizing J(tau v); dJ/dtau = tau <Av,v> - sum h^n v (w tau^p v^p + f(tau v)).
template <typename Scalar>
Scalar ray_maximizer(const ProblemSpec& problem, const Vector<Scalar>& w, const Vector<Scalar>& v,
                     const Vector<Scalar>& av) {
  const auto p = static_cast<Scalar>(problem.p);
  const Scalar quad = v.dot(av);
  auto slope = [&](Scalar tau) {
    Scalar acc = tau * quad;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const Scalar tv = tau * v(i);
      acc -= v(i) * problem.f.value(tv);
      if (w(i) != Scalar(0)) acc -= v(i) * w(i) * std::pow(tv, p);
    }
    return acc;
  };
  Scalar lo = 1, hi = 1;
  if (slope(Scalar(1)) > Scalar(0)) {
    int guard = 0;
    while (slope(hi) > Scalar(0)) {
      lo = hi;
      hi *= 2;
      if (++guard > 400) throw NumericalError("energy is unbounded above along the ray; no mountain pass");
    }
  } else {
    int guard = 0;
    while (slope(lo) <= Scalar(0)) {
      hi = lo;
      lo /= 2;
      if (++guard > 400) throw NumericalError("energy ray has no interior maximum; no mountain pass");
    }
  }
  for (int k = 0; k < 200 && hi - lo > Scalar(4) * std::numeric_limits<Scalar>::epsilon() * hi; ++k) {
    const Scalar mid = (lo + hi) / 2;
    (slope(mid) > Scalar(0) ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace detail

/// Projected gradient flow u <- max(u - eta g, eps) with Armijo backtracking.
///
/// SolveMethod::descent minimizes J directly. SolveMethod::minimax rescales
/// every iterate to the maximum of J along its ray, so the iteration descends
/// on the mountain-pass level instead of falling into the trivial minimum at
/// u = 0 when p > 1.
template <typename Scalar>
SolveResult<Scalar> solve_elliptic(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op,
                                   const SolverConfig& config, const Field<Scalar>& init) {
  problem.validate();
  config.validate();
  detail::require(init.grid_ptr() == op.grid_ptr(), "initial field and operator live on different grids");
  const auto eps = static_cast<Scalar>(config.eps);
  if ((init.values().array() < eps).any()) throw ConfigError("initial field must be >= eps everywhere");
  detail::check_admissible(problem, init.values());

  const auto& a = op.matrix();
  const Scalar hn = op.grid().cell_volume();
  const auto w = detail::weights(problem, op.grid());
  const bool minimax = config.method == SolveMethod::minimax;
  const auto tol = static_cast<Scalar>(config.tolerance);
  constexpr Scalar armijo = Scalar(1e-4);
  const Scalar roundoff = Scalar(64) * std::numeric_limits<Scalar>::epsilon();

  Vector<Scalar> u = init.values();
  Vector<Scalar> au = a * u;
  Vector<Scalar> g = detail::gradient_from(problem, w, u, au);
  Scalar j = detail::energy_from(problem, w, hn, u, au);

  SolveResult<Scalar> result;
  auto finish = [&](bool converged, std::string reason) {
    result.field = init.with_values(u);
    result.final_residual = g.cwiseAbs().maxCoeff();
    result.converged = converged;
    result.stop_reason = std::move(reason);
    return result;
  };
  if (!std::isfinite(static_cast<double>(j)) || !g.allFinite()) {
    throw NumericalError("non-finite energy or gradient at the initial field");
  }
  if (g.cwiseAbs().maxCoeff() <= tol) {
    result.energy_trace.push_back(j);
    return finish(true, "initial field already stationary");
  }
  if (minimax) {
    const Scalar tau = detail::ray_maximizer(problem, w, u, au);
    u = (tau * u).cwiseMax(eps);
    au = a * u;
    g = detail::gradient_from(problem, w, u, au);
    j = detail::energy_from(problem, w, hn, u, au);
  }
  result.energy_trace.push_back(j);

  Scalar eta = Scalar(1) / a.diagonal().maxCoeff();
  for (int it = 1; it <= config.max_iterations; ++it) {
    bool accepted = false;
    bool flat = false;
    Vector<Scalar> v, av, gv;
    Scalar jv = 0;
    for (int bt = 0; bt < 80; ++bt) {
      v = (u - eta * g).cwiseMax(eps);
      const Scalar decrease = armijo * hn * g.dot(u - v);
      av = a * v;
      if (minimax) {
        const Scalar tau = detail::ray_maximizer(problem, w, v, av);
        v = (tau * v).cwiseMax(eps);
        av = a * v;
      }
      jv = detail::energy_from(problem, w, hn, v, av);
      if (std::isnan(static_cast<double>(jv))) {
        throw NumericalError("NaN energy at iteration " + std::to_string(it));
      }
      if (jv < j && jv <= j - decrease) {
        accepted = true;
        break;
      }
      // Near a critical point the decrease drops below the rounding error of
      // J itself; there a step that keeps J flat and shrinks the residual is
      // still progress.
      if (std::abs(jv - j) <= roundoff * (std::abs(j) + Scalar(1))) {
        gv = detail::gradient_from(problem, w, v, av);
        if (gv.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff()) {
          accepted = true;
          flat = true;
          break;
        }
      }
      eta /= 2;
    }
    if (!accepted) {
      result.iterations = it - 1;
      return finish(false, "line search stalled");
    }
    u = std::move(v);
    au = std::move(av);
    j = jv;
    g = flat ? std::move(gv) : detail::gradient_from(problem, w, u, au);
    if (!g.allFinite()) throw NumericalError("non-finite gradient at iteration " + std::to_string(it));
    result.energy_trace.push_back(j);
    result.iterations = it;
    if (g.cwiseAbs().maxCoeff() <= tol) return finish(true, "residual below tolerance");
    eta *= 2;
  }
  return finish(false, "iteration budget exhausted");
}

/// Energy along the ray tau -> J(tau u).
template <typename Scalar>
std::vector<std::pair<Scalar, Scalar>> scaling_probe(const ProblemSpec& problem, const NonlocalOperator<Scalar>& op,
                                                     const Field<Scalar>& u, const std::vector<Scalar>& taus) {
  detail::require(!taus.empty(), "scaling probe needs at least one tau");
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  const auto w = detail::weights(problem, op.grid());
  const Vector<Scalar> au = op.matrix() * u.values();
  const Scalar hn = op.grid().cell_volume();
  std::vector<std::pair<Scalar, Scalar>> ray;
  ray.reserve(taus.size());
  for (Scalar tau : taus) {
    detail::require(tau >= Scalar(0), "scaling probe needs nonnegative tau");
    const Vector<Scalar> tu = tau * u.values();
    detail::check_admissible(problem, tu);
    ray.emplace_back(tau, detail::energy_from<Scalar>(problem, w, hn, tu, tau * au));
  }
  return ray;
}

}  // namespace fraclab
