#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "diffpath/errors.hpp"
#include "diffpath/vec_index.hpp"

namespace diffpath {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(m.eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Derived>
typename Derived::Scalar max_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(m.eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Symmetric d x d matrix with unit diagonal and entries in [-1, 1].
//
// The constructor accepts inputs that are symmetric and unit-diagonal to
// within 1e-10 and stores an exactly symmetric copy (upper triangle mirrored,
// diagonal set to 1). Positive semi-definiteness is not enforced here; use
// project_psd() or check min_eigenvalue() where it matters.
template <typename Scalar = double>
class CorrelationMatrix {
 public:
  using MatrixType = DenseMatrix<Scalar>;

  CorrelationMatrix() = default;

  explicit CorrelationMatrix(const MatrixType& m, Scalar tol = Scalar(1e-10)) : entries_(m) {
    if (m.rows() != m.cols()) {
      throw DimensionMismatch("CorrelationMatrix: matrix is not square");
    }
    if (!m.allFinite()) {
      throw std::invalid_argument("CorrelationMatrix: non-finite entry");
    }
    const Eigen::Index d = m.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(m(j, j) - Scalar(1)) > tol) {
        throw std::invalid_argument("CorrelationMatrix: diagonal entry " + std::to_string(j) +
                                    " is not 1");
      }
      entries_(j, j) = Scalar(1);
      for (Eigen::Index i = 0; i < j; ++i) {
        if (std::abs(m(i, j) - m(j, i)) > tol) {
          throw NotSymmetric("CorrelationMatrix: input is not symmetric");
        }
        if (std::abs(m(i, j)) > Scalar(1) + tol) {
          throw std::invalid_argument("CorrelationMatrix: entry outside [-1, 1]");
        }
        const Scalar value = std::clamp(m(i, j), Scalar(-1), Scalar(1));
        entries_(i, j) = value;
        entries_(j, i) = value;
      }
    }
  }

  static CorrelationMatrix identity(Eigen::Index d) {
    return CorrelationMatrix(MatrixType::Identity(d, d));
  }

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const MatrixType& matrix() const noexcept { return entries_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  Scalar min_eigenvalue() const { return diffpath::min_eigenvalue(entries_); }

 private:
  MatrixType entries_;
};

}  // namespace diffpath
