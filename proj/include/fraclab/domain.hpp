#pragma once

#include "fraclab/common.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fraclab {

enum class DomainKind { interval, disk, half_space };

inline std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::disk: return "disk";
    case DomainKind::half_space: return "half_space";
  }
  return "?";
}

inline DomainKind parse_domain_kind(std::string_view text) {
  if (text == "interval") return DomainKind::interval;
  if (text == "disk") return DomainKind::disk;
  if (text == "half_space" || text == "half_space_truncated") return DomainKind::half_space;
  throw ConfigError("unknown domain kind '" + std::string(text) + "'");
}

/// Geometry of Omega. The interval is (-1,1), the disk is B_1(0) in R^2 and
/// the half-space {x1 > 0} is cut down to the box (0,R) x (-R,R).
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  int dimension = 1;
  std::optional<double> truncation_radius;
  int resolution = 16;  // nodes per unit length

  void validate() const {
    using detail::require;
    switch (kind) {
      case DomainKind::interval:
        require(dimension == 1, "interval domain requires n = 1");
        break;
      case DomainKind::disk:
        require(dimension == 2, "disk domain requires n = 2 (n >= 3 is not supported)");
        break;
      case DomainKind::half_space:
        require(dimension == 2, "half-space domain requires n = 2 (n >= 3 is not supported)");
        break;
    }
    require(truncation_radius.has_value() == (kind == DomainKind::half_space),
            "truncation radius R must be given for the half-space and only there");
    if (truncation_radius) {
      require(*truncation_radius > 0.0, "truncation radius R must be positive");
      const double cells = *truncation_radius * resolution;
      require(std::abs(cells - std::round(cells)) < 1e-9,
              "R * resolution must be an integer so the cut lands on the lattice");
    }
    require(resolution >= 4, "resolution must be at least 4 nodes per unit length");
  }
};

using LatticeIndex = std::array<int, 2>;

/// Uniform tensor lattice over the bounding box of the domain. Nodes outside
/// Omega (including the box faces) are exterior and carry the value zero.
template <typename Scalar = double>
class Grid {
 public:
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  static std::shared_ptr<const Grid> build(const DomainSpec& domain) {
    domain.validate();
    return std::shared_ptr<const Grid>(new Grid(domain));
  }

  const DomainSpec& domain() const { return domain_; }
  int dimension() const { return domain_.dimension; }
  Scalar spacing() const { return h_; }

  /// h^n, the cell volume used by every discrete integral.
  Scalar cell_volume() const { return dimension() == 1 ? h_ : h_ * h_; }

  std::size_t node_count() const { return nodes_.size(); }
  const Point& node(std::size_t k) const { return nodes_[k]; }
  bool is_interior(std::size_t k) const { return interior_mask_[k]; }
  const LatticeIndex& node_lattice(std::size_t k) const { return node_lattice_[k]; }

  Eigen::Index interior_count() const { return static_cast<Eigen::Index>(interior_nodes_.size()); }
  std::size_t interior_node(Eigen::Index i) const { return interior_nodes_[static_cast<std::size_t>(i)]; }
  const Point& point(Eigen::Index i) const { return nodes_[interior_node(i)]; }
  const LatticeIndex& lattice(Eigen::Index i) const { return node_lattice_[interior_node(i)]; }
  Scalar x1(Eigen::Index i) const { return point(i)(0); }

  /// Distance to the boundary for interior node i (x1 on the half-space).
  Scalar boundary_distance(Eigen::Index i) const { return distance_[interior_node(i)]; }

  /// Interior row for a lattice index, or -1 when the lattice point is exterior.
  Eigen::Index interior_index(const LatticeIndex& m) const {
    if (m[0] < lo_[0] || m[0] > hi_[0] || m[1] < lo_[1] || m[1] > hi_[1]) return -1;
    return lattice_to_interior_[flat(m)];
  }

  Point coordinates(const LatticeIndex& m) const {
    Point p = Point::Zero();
    p(0) = static_cast<Scalar>(m[0]) * h_;
    if (dimension() == 2) p(1) = static_cast<Scalar>(m[1]) * h_;
    return p;
  }

  /// Lattice extent in x1: smallest and largest lattice index of interior nodes.
  std::pair<int, int> x1_index_range() const { return {interior_lo_x1_, interior_hi_x1_}; }

  /// Diameter of the interior point cloud.
  Scalar diameter() const { return diameter_; }

  bool reflection_closed() const { return domain_.kind != DomainKind::half_space; }

  /// Permutation i -> row of (-x1, x') for reflection-closed grids.
  std::optional<std::vector<Eigen::Index>> reflection_permutation() const {
    if (!reflection_closed()) return std::nullopt;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(interior_count()));
    for (Eigen::Index i = 0; i < interior_count(); ++i) {
      const auto& m = lattice(i);
      perm[static_cast<std::size_t>(i)] = interior_index({-m[0], m[1]});
    }
    return perm;
  }

 private:
  explicit Grid(const DomainSpec& domain) : domain_(domain) {
    const int res = domain.resolution;
    h_ = Scalar(1) / static_cast<Scalar>(res);
    switch (domain.kind) {
      case DomainKind::interval:
        lo_ = {-res, 0};
        hi_ = {res, 0};
        break;
      case DomainKind::disk:
        lo_ = {-res, -res};
        hi_ = {res, res};
        break;
      case DomainKind::half_space: {
        const int cut = static_cast<int>(std::lround(*domain.truncation_radius * res));
        lo_ = {0, -cut};
        hi_ = {cut, cut};
        break;
      }
    }
    lattice_to_interior_.assign(static_cast<std::size_t>((hi_[0] - lo_[0] + 1) * (hi_[1] - lo_[1] + 1)), -1);
    interior_lo_x1_ = hi_[0];
    interior_hi_x1_ = lo_[0];
    for (int a = lo_[0]; a <= hi_[0]; ++a) {
      for (int b = lo_[1]; b <= hi_[1]; ++b) {
        const LatticeIndex m{a, b};
        const bool inside = contains(m);
        const Point p = coordinates(m);
        nodes_.push_back(p);
        node_lattice_.push_back(m);
        interior_mask_.push_back(inside);
        distance_.push_back(inside ? distance_of(p) : Scalar(0));
        if (inside) {
          lattice_to_interior_[flat(m)] = static_cast<Eigen::Index>(interior_nodes_.size());
          interior_nodes_.push_back(nodes_.size() - 1);
          interior_lo_x1_ = std::min(interior_lo_x1_, a);
          interior_hi_x1_ = std::max(interior_hi_x1_, a);
        }
      }
    }
    Scalar lo_corner[2] = {Scalar(0), Scalar(0)};
    Scalar hi_corner[2] = {Scalar(0), Scalar(0)};
    bool first = true;
    for (std::size_t k : interior_nodes_) {
      for (int d = 0; d < dimension(); ++d) {
        lo_corner[d] = first ? nodes_[k](d) : std::min(lo_corner[d], nodes_[k](d));
        hi_corner[d] = first ? nodes_[k](d) : std::max(hi_corner[d], nodes_[k](d));
      }
      first = false;
    }
    Scalar sq = 0;
    for (int d = 0; d < dimension(); ++d) sq += (hi_corner[d] - lo_corner[d]) * (hi_corner[d] - lo_corner[d]);
    diameter_ = std::sqrt(sq);
  }

  std::size_t flat(const LatticeIndex& m) const {
    return static_cast<std::size_t>((m[0] - lo_[0]) * (hi_[1] - lo_[1] + 1) + (m[1] - lo_[1]));
  }

  // Integer tests so that the mask is exactly reflection symmetric.
  bool contains(const LatticeIndex& m) const {
    const int res = domain_.resolution;
    switch (domain_.kind) {
      case DomainKind::interval:
        return std::abs(m[0]) < res;
      case DomainKind::disk:
        return m[0] * m[0] + m[1] * m[1] < res * res;
      case DomainKind::half_space:
        return m[0] > 0 && m[0] < hi_[0] && std::abs(m[1]) < hi_[1];
    }
    return false;
  }

  Scalar distance_of(const Point& p) const {
    switch (domain_.kind) {
      case DomainKind::interval:
        return Scalar(1) - std::abs(p(0));
      case DomainKind::disk:
        return Scalar(1) - p.norm();
      case DomainKind::half_space:
        return p(0);
    }
    return Scalar(0);
  }

  DomainSpec domain_;
  Scalar h_{};
  LatticeIndex lo_{}, hi_{};
  int interior_lo_x1_ = 0, interior_hi_x1_ = 0;
  Scalar diameter_{};
  std::vector<Point> nodes_;
  std::vector<LatticeIndex> node_lattice_;
  std::vector<bool> interior_mask_;
  std::vector<Scalar> distance_;
  std::vector<std::size_t> interior_nodes_;
  std::vector<Eigen::Index> lattice_to_interior_;
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const Grid<Scalar>>;

template <typename Scalar = double>
GridPtr<Scalar> build_grid(const DomainSpec& domain) {
  return Grid<Scalar>::build(domain);
}

/// Nodal values on the interior of a grid; the exterior extension is zero.
template <typename Scalar = double>
class Field {
 public:
  Field() = default;
  Field(GridPtr<Scalar> grid, Vector<Scalar> values) : grid_(std::move(grid)), values_(std::move(values)) {
    detail::require(grid_ != nullptr, "field needs a grid");
    detail::require(values_.size() == grid_->interior_count(), "field size does not match grid interior");
  }

  static Field zero(GridPtr<Scalar> grid) {
    const auto n = grid->interior_count();
    return Field(std::move(grid), Vector<Scalar>::Zero(n));
  }

  static Field constant(GridPtr<Scalar> grid, Scalar value) {
    const auto n = grid->interior_count();
    return Field(std::move(grid), Vector<Scalar>::Constant(n, value));
  }

  const Grid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }
  const Vector<Scalar>& values() const { return values_; }
  Vector<Scalar>& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_(i); }

  /// Value at any lattice point; zero off the interior.
  Scalar at(const LatticeIndex& m) const {
    const auto i = grid_->interior_index(m);
    return i < 0 ? Scalar(0) : values_(i);
  }

  /// Value at grid node k (interior or not).
  Scalar at_node(std::size_t k) const {
    return grid_->is_interior(k) ? at(grid_->node_lattice(k)) : Scalar(0);
  }

  Field with_values(Vector<Scalar> values) const { return Field(grid_, std::move(values)); }

  bool same_grid(const Field& other) const { return grid_ == other.grid_; }

  bool all_finite() const { return values_.allFinite(); }

 private:
  GridPtr<Scalar> grid_;
  Vector<Scalar> values_;
};

template <typename Scalar>
Field<Scalar> field_from_fn(const GridPtr<Scalar>& grid,
                            const std::function<Scalar(const typename Grid<Scalar>::Point&)>& fn) {
  Vector<Scalar> v(grid->interior_count());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = fn(grid->point(i));
    if (!std::isfinite(static_cast<double>(v(i)))) {
      throw ConfigError("field function is not finite at interior node " + std::to_string(i));
    }
  }
  return Field<Scalar>(grid, std::move(v));
}

template <typename Scalar>
Field<Scalar> distance_to_boundary(const GridPtr<Scalar>& grid) {
  Vector<Scalar> d(grid->interior_count());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = grid->boundary_distance(i);
  return Field<Scalar>(grid, std::move(d));
}

/// Discrete L2 inner product sum_i h^n u_i v_i.
template <typename Scalar>
Scalar inner(const Field<Scalar>& u, const Field<Scalar>& v) {
  detail::require(u.same_grid(v), "inner product of fields on different grids");
  return u.grid().cell_volume() * u.values().dot(v.values());
}

template <typename Scalar>
Scalar l2_norm(const Field<Scalar>& u) {
  return std::sqrt(inner(u, u));
}

}  // namespace fraclab
