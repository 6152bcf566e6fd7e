#pragma once

#include "fraclab/common.hpp"
#include "fraclab/domain.hpp"
#include "fraclab/operator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace fraclab {

/// Smallest eigenpairs of the discrete operator. Columns of `modes` are
/// orthonormal in the h^n-weighted L2 product.
template <typename Scalar = double>
struct Spectrum {
  GridPtr<Scalar> grid;
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> modes;

  Eigen::Index count() const { return eigenvalues.size(); }
  Field<Scalar> eigenfield(Eigen::Index k) const { return Field<Scalar>(grid, modes.col(k)); }
};

struct EigenOptions {
  std::uint64_t seed = 12345;
  int max_iterations = 2000;
  double tolerance = 1e-11;
  /// Above this size and for small k, block inverse iteration replaces the
  /// full symmetric solve.
  Eigen::Index dense_limit = 800;
};

namespace detail {

template <typename Scalar>
void orient(Matrix<Scalar>& modes) {
  for (Eigen::Index k = 0; k < modes.cols(); ++k) {
    const Scalar total = modes.col(k).sum();
    Eigen::Index pivot = 0;
    modes.col(k).cwiseAbs().maxCoeff(&pivot);
    const bool flip = std::abs(total) > Scalar(1e-8) * modes.col(k).cwiseAbs().sum() ? total < Scalar(0)
                                                                                  : modes(pivot, k) < Scalar(0);
    if (flip) modes.col(k) = -modes.col(k);
  }
}

// Block inverse iteration with Rayleigh-Ritz on A^{-1}; deterministic start.
template <typename Scalar>
void inverse_subspace(const Matrix<Scalar>& a, Eigen::Index k, const EigenOptions& opt, Vector<Scalar>& values,
                      Matrix<Scalar>& vectors) {
  const Eigen::Index size = a.rows();
  const Eigen::Index block = std::min(size, k + std::max<Eigen::Index>(k, 8));
  Eigen::LLT<Matrix<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("operator is not positive definite");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix<Scalar> x(size, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < size; ++i) x(i, j) = static_cast<Scalar>(gauss(rng));

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    Matrix<Scalar> y = llt.solve(x);
    Eigen::HouseholderQR<Matrix<Scalar>> qr(y);
    Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(size, block);
    Matrix<Scalar> aq = a * q;
    Matrix<Scalar> small = q.transpose() * aq;
    small = (small + small.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> ritz(small);
    x = q * ritz.eigenvectors();
    Matrix<Scalar> ax = aq * ritz.eigenvectors();
    bool done = true;
    for (Eigen::Index j = 0; j < k && done; ++j) {
      const Scalar theta = ritz.eigenvalues()(j);
      const Scalar resid = (ax.col(j) - theta * x.col(j)).norm();
      done = resid <= static_cast<Scalar>(opt.tolerance) * theta;
    }
    if (done) {
      values = ritz.eigenvalues().head(k);
      vectors = x.leftCols(k);
      return;
    }
  }
  throw NumericalError("eigensolver did not converge within " + std::to_string(opt.max_iterations) +
                       " iterations");
}

}  // namespace detail

template <typename Scalar>
Spectrum<Scalar> eigendecompose(const NonlocalOperator<Scalar>& op, Eigen::Index k, EigenOptions opt = {}) {
  const Eigen::Index size = op.size();
  if (k < 1 || k > size) {
    throw ConfigError("eigenpair count " + std::to_string(k) + " outside [1, " + std::to_string(size) + "]");
  }
  Vector<Scalar> values;
  Matrix<Scalar> vectors;
  if (size <= opt.dense_limit || 4 * k > size) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(op.matrix());
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    values = solver.eigenvalues().head(k);
    vectors = solver.eigenvectors().leftCols(k);
  } else {
    detail::inverse_subspace(op.matrix(), k, opt, values, vectors);
  }
  if (values.minCoeff() <= Scalar(0)) throw NumericalError("operator has a non-positive eigenvalue");
  vectors /= std::sqrt(op.grid().cell_volume());
  detail::orient(vectors);
  return Spectrum<Scalar>{op.grid_ptr(), std::move(values), std::move(vectors)};
}

}  // namespace fraclab
