#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fraclab {

/// C_{n,s} = 4^s Gamma(n/2 + s) s / (pi^{n/2} Gamma(1 - s)); the operator
/// then has Fourier symbol |xi|^{2s}.
template <typename Scalar = double>
Scalar normalization_constant(int n, Scalar s) {
  detail::require(n >= 1, "dimension must be positive");
  detail::require(s > Scalar(0) && s < Scalar(1), "fractional order s must lie in (0,1)");
  const Scalar half_n = static_cast<Scalar>(n) / Scalar(2);
  return std::pow(Scalar(4), s) * std::tgamma(half_n + s) * s /
         (std::pow(detail::pi<Scalar>(), half_n) * std::tgamma(Scalar(1) - s));
}

struct OperatorOptions {
  /// Radius of the lattice ball summed explicitly around each node; beyond it
  /// the kernel is integrated in closed form. Zero picks max(4, 2 diam).
  double tail_radius = 0.0;
};

namespace detail {

template <typename Scalar, typename Fn>
Scalar simpson(Fn&& fn, Scalar a, Scalar b, int panels) {
  if (panels % 2 != 0) ++panels;
  const Scalar step = (b - a) / static_cast<Scalar>(panels);
  Scalar acc = fn(a) + fn(b);
  for (int k = 1; k < panels; ++k) acc += fn(a + step * static_cast<Scalar>(k)) * (k % 2 ? Scalar(4) : Scalar(2));
  return acc * step / Scalar(3);
}

/// Second moment of the kernel over the cell [-h/2,h/2]^n, divided by 2n:
/// kappa = (1/2n) int_cell |y|^{2-n-2s} dy. Multiplies -Laplacian(u) in the
/// Taylor expansion of the self-cell contribution.
template <typename Scalar>
Scalar self_cell_moment(int n, Scalar s, Scalar h) {
  const Scalar half = h / Scalar(2);
  const Scalar expo = Scalar(2) - Scalar(2) * s;
  if (n == 1) return Scalar(2) * std::pow(half, expo) / expo / Scalar(2);
  const Scalar angular =
      simpson<Scalar>([&](Scalar t) { return std::pow(Scalar(1) / std::cos(t), expo); }, Scalar(0),
                      detail::pi<Scalar>() / Scalar(4), 4000);
  return Scalar(8) * std::pow(half, expo) / expo * angular / Scalar(4);
}

/// Kernel mass of the exterior of the lattice ball of radius `radius`:
/// sum over lattice points 0 < |m| h <= radius of h^n |mh|^{-n-2s}, plus the
/// closed-form integral of |y|^{-n-2s} outside the ball whose volume equals
/// the counted cells.
template <typename Scalar>
Scalar far_field_mass(int n, Scalar s, Scalar h, Scalar radius) {
  const int reach = static_cast<int>(std::floor(radius / h));
  const Scalar decay = (static_cast<Scalar>(n) + Scalar(2) * s) / Scalar(2);
  const long long reach2 = static_cast<long long>(reach) * reach;
  Scalar lattice_sum = 0;
  long long counted = 0;
  if (n == 1) {
    for (int a = reach; a >= 1; --a) lattice_sum += Scalar(2) * std::pow(static_cast<Scalar>(a) * a, -decay);
    counted = 2LL * reach + 1;
  } else {
    // accumulate far rings first to keep the sum well conditioned
    for (int a = reach; a >= 0; --a) {
      for (int b = reach; b >= 0; --b) {
        const long long d2 = static_cast<long long>(a) * a + static_cast<long long>(b) * b;
        if (d2 == 0 || d2 > reach2) continue;
        const int mult = (a == 0 || b == 0) ? 2 : 4;
        lattice_sum += static_cast<Scalar>(mult) * std::pow(static_cast<Scalar>(d2), -decay);
        counted += mult;
      }
    }
    counted += 1;
  }
  const Scalar hn = n == 1 ? h : h * h;
  const Scalar volume = static_cast<Scalar>(counted) * hn;
  const Scalar equiv_radius =
      n == 1 ? volume / Scalar(2) : std::sqrt(volume / detail::pi<Scalar>());
  const Scalar sphere = n == 1 ? Scalar(2) : Scalar(2) * detail::pi<Scalar>();
  const Scalar tail = sphere * std::pow(equiv_radius, Scalar(-2) * s) / (Scalar(2) * s);
  return lattice_sum * std::pow(h, Scalar(-2) * s) + tail;
}

}  // namespace detail

/// Dense matrix of the fractional Laplacian restricted to interior nodes,
/// with u = 0 imposed on every exterior lattice point and beyond.
template <typename Scalar = double>
class NonlocalOperator {
 public:
  NonlocalOperator(GridPtr<Scalar> grid, Scalar s, Scalar cns, Matrix<Scalar> a)
      : grid_(std::move(grid)), s_(s), cns_(cns), a_(std::move(a)) {}

  const Matrix<Scalar>& matrix() const { return a_; }
  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  Scalar order() const { return s_; }
  Scalar cns() const { return cns_; }
  Eigen::Index size() const { return a_.rows(); }

 private:
  GridPtr<Scalar> grid_;
  Scalar s_;
  Scalar cns_;
  Matrix<Scalar> a_;
};

/// Singular-integral quadrature:
///   (A u)_i = C [ sum_{j != i} h^n (u_i - u_j)/|x_i - x_j|^{n+2s}
///               + u_i * (exterior lattice mass + analytic tail)
///               - kappa * (discrete Laplacian of u)_i ]
/// where the sum runs over every lattice point (exterior ones carry u = 0)
/// and the last term is the Taylor correction for the self cell.
template <typename Scalar = double>
NonlocalOperator<Scalar> assemble_operator(const GridPtr<Scalar>& grid, Scalar s, OperatorOptions options = {}) {
  detail::require(grid != nullptr, "operator needs a grid");
  detail::require(s > Scalar(0) && s < Scalar(1), "fractional order s must lie in (0,1)");
  const int n = grid->dimension();
  const Scalar h = grid->spacing();
  const Scalar cns = normalization_constant<Scalar>(n, s);
  const Eigen::Index size = grid->interior_count();

  Scalar radius = static_cast<Scalar>(options.tail_radius);
  if (radius <= Scalar(0)) radius = std::max(Scalar(4), Scalar(2) * grid->diameter());
  detail::require(radius > grid->diameter() + h, "tail radius must exceed the grid diameter");

  const Scalar far = detail::far_field_mass<Scalar>(n, s, h, radius);
  const Scalar kappa = detail::self_cell_moment<Scalar>(n, s, h);
  const Scalar stencil = kappa / (h * h);

  // Off-diagonal weights depend only on the squared integer offset.
  int max_span = 0;
  for (Eigen::Index i = 0; i < size; ++i) {
    for (int d = 0; d < n; ++d) max_span = std::max(max_span, std::abs(grid->lattice(i)[d]));
  }
  const long long max_d2 = static_cast<long long>(n) * (2LL * max_span + 1) * (2LL * max_span + 1);
  const Scalar decay = (static_cast<Scalar>(n) + Scalar(2) * s) / Scalar(2);
  const Scalar scale = cns * std::pow(h, Scalar(-2) * s);
  std::vector<Scalar> weight(static_cast<std::size_t>(max_d2 + 1), Scalar(0));
  for (long long d2 = 1; d2 <= max_d2; ++d2) weight[static_cast<std::size_t>(d2)] = scale * std::pow(static_cast<Scalar>(d2), -decay);

  Matrix<Scalar> a(size, size);
  for (Eigen::Index j = 0; j < size; ++j) {
    const auto& mj = grid->lattice(j);
    for (Eigen::Index i = j + 1; i < size; ++i) {
      const auto& mi = grid->lattice(i);
      long long d2 = 0;
      for (int d = 0; d < n; ++d) d2 += static_cast<long long>(mi[d] - mj[d]) * (mi[d] - mj[d]);
      const Scalar w = -weight[static_cast<std::size_t>(d2)];
      a(i, j) = w;
      a(j, i) = w;
    }
    a(j, j) = cns * (far + Scalar(2 * n) * stencil);
  }
  for (Eigen::Index i = 0; i < size; ++i) {
    const auto& m = grid->lattice(i);
    for (int d = 0; d < n; ++d) {
      for (int step : {-1, 1}) {
        LatticeIndex nb = m;
        nb[d] += step;
        const auto j = grid->interior_index(nb);
        if (j >= 0) a(i, j) -= cns * stencil;
      }
    }
  }
  return NonlocalOperator<Scalar>(grid, s, cns, std::move(a));
}

template <typename Scalar>
Field<Scalar> apply_operator(const NonlocalOperator<Scalar>& op, const Field<Scalar>& u) {
  detail::require(u.grid_ptr() == op.grid_ptr(), "field and operator live on different grids");
  return u.with_values(op.matrix() * u.values());
}

/// Debug dump: int32 n, float64 s, int64 node count, then row-major float64.
template <typename Scalar>
void write_operator_dump(const NonlocalOperator<Scalar>& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open operator dump '" + path + "'");
  const std::int32_t n = op.grid().dimension();
  const double s = static_cast<double>(op.order());
  const std::int64_t count = op.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&s), sizeof s);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (Eigen::Index i = 0; i < op.size(); ++i) {
    for (Eigen::Index j = 0; j < op.size(); ++j) {
      const double v = static_cast<double>(op.matrix()(i, j));
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}

}  // namespace fraclab
