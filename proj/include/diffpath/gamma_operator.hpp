#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>

#include "diffpath/correlation_matrix.hpp"
#include "diffpath/errors.hpp"
#include "diffpath/vec_index.hpp"

namespace diffpath {

// Matrix-free view of the D-trace Hessian
//
//   Gamma = 1/2 (S (x) S' + S' (x) S)
//
// on column-major vec indices. For e = (i, j) and f = (k, l)
//
//   Gamma(e, f) = 1/2 (S(i,k) S'(j,l) + S'(i,k) S(j,l)),
//
// and Gamma * vec(X) = vec(1/2 (S X S' + S' X S)). Only the two d x d factors
// are stored. Immutable after construction; safe to share across threads.
template <typename Scalar = double>
class GammaOperator {
 public:
  using MatrixType = DenseMatrix<Scalar>;
  using VectorType = DenseVector<Scalar>;

  GammaOperator() = default;

  GammaOperator(const CorrelationMatrix<Scalar>& sigma, const CorrelationMatrix<Scalar>& sigma_prime)
      : sigma_(sigma.matrix()), sigma_prime_(sigma_prime.matrix()) {
    if (sigma_.rows() != sigma_prime_.rows()) {
      throw DimensionMismatch("GammaOperator: sigma and sigma_prime differ in dimension");
    }
  }

  Index dim() const noexcept { return sigma_.rows(); }
  Index vec_size() const noexcept { return dim() * dim(); }
  const MatrixType& sigma() const noexcept { return sigma_; }
  const MatrixType& sigma_prime() const noexcept { return sigma_prime_; }

  Scalar entry(VecIndex e, VecIndex f) const {
    const Index d = dim();
    const auto [i, j] = pair_of(e, d);
    const auto [k, l] = pair_of(f, d);
    return Scalar(0.5) * (sigma_(i, k) * sigma_prime_(j, l) + sigma_prime_(i, k) * sigma_(j, l));
  }

  // Column e = (k, l) as a d x d matrix: 1/2 (S(:,k) S'(:,l)^T + S'(:,k) S(:,l)^T).
  MatrixType column_matrix(VecIndex e) const {
    const auto [k, l] = pair_of(e, dim());
    MatrixType out(dim(), dim());
    out.noalias() = Scalar(0.5) * sigma_.col(k) * sigma_prime_.col(l).transpose();
    out.noalias() += Scalar(0.5) * sigma_prime_.col(k) * sigma_.col(l).transpose();
    return out;
  }

  VectorType column(VecIndex e) const {
    MatrixType m = column_matrix(e);
    return Eigen::Map<const VectorType>(m.data(), m.size());
  }

  // Gamma(:, A) * w reshaped to d x d, in O(|A| d^2).
  MatrixType apply_sparse(std::span<const VecIndex> active, const VectorType& weights) const {
    if (static_cast<Index>(active.size()) != weights.size()) {
      throw std::invalid_argument("GammaOperator::apply_sparse: size mismatch");
    }
    const Index d = dim();
    const Index n = weights.size();
    if (n == 0) return MatrixType::Zero(d, d);
    // Gathered columns: S(:, k_a) w_a / 2 and S'(:, l_a), and the mirrored pair.
    MatrixType left(d, n), right(d, n), left_prime(d, n), right_prime(d, n);
    for (Index a = 0; a < n; ++a) {
      const auto [k, l] = pair_of(active[static_cast<std::size_t>(a)], d);
      const Scalar w = Scalar(0.5) * weights(a);
      left.col(a) = w * sigma_.col(k);
      right.col(a) = sigma_prime_.col(l);
      left_prime.col(a) = w * sigma_prime_.col(k);
      right_prime.col(a) = sigma_.col(l);
    }
    MatrixType out(d, d);
    out.noalias() = left * right.transpose();
    out.noalias() += left_prime * right_prime.transpose();
    return out;
  }

  // Gamma * vec(X) reshaped to d x d, via two dense products.
  template <typename Derived>
  MatrixType apply(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != dim() || x.cols() != dim()) {
      throw DimensionMismatch("GammaOperator::apply: argument has the wrong shape");
    }
    MatrixType out(dim(), dim());
    out.noalias() = Scalar(0.5) * (sigma_ * x * sigma_prime_);
    out.noalias() += Scalar(0.5) * (sigma_prime_ * x * sigma_);
    return out;
  }

  // Gamma(A, A), assembled entrywise.
  MatrixType block(std::span<const VecIndex> active) const {
    const Index n = static_cast<Index>(active.size());
    MatrixType out(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) out(a, b) = entry(active[a], active[b]);
    }
    return out;
  }

 private:
  MatrixType sigma_;
  MatrixType sigma_prime_;
};

template <typename Scalar>
Scalar gamma_entry(const GammaOperator<Scalar>& op, VecIndex e, VecIndex f) {
  return op.entry(e, f);
}

template <typename Scalar>
DenseVector<Scalar> gamma_column(const GammaOperator<Scalar>& op, VecIndex e) {
  return op.column(e);
}

}  // namespace diffpath
