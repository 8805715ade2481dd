#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffpath/errors.hpp"
#include "diffpath/gamma_operator.hpp"
#include "diffpath/vec_index.hpp"

namespace diffpath {

// (Gamma(A, A))^{-1} for an ordered active set A, kept current under single
// insertions (Schur complement update) and removals (partitioned-inverse
// downdate), each O(|A|^2).
template <typename Scalar = double>
class ActiveInverse {
 public:
  using MatrixType = DenseMatrix<Scalar>;
  using VectorType = DenseVector<Scalar>;

  // Relative Schur-complement floor and condition ceiling below/above which
  // an extension counts as singular.
  static constexpr Scalar kSchurTolerance = Scalar(1e-10);
  static constexpr Scalar kMaxCondition = Scalar(1e12);

  const std::vector<VecIndex>& active() const noexcept { return active_; }
  const MatrixType& inverse() const noexcept { return inv_; }
  const MatrixType& block() const noexcept { return block_; }
  Scalar condition_estimate() const noexcept { return condition_; }
  Index size() const noexcept { return static_cast<Index>(active_.size()); }
  bool empty() const noexcept { return active_.empty(); }

  Index position(VecIndex e) const {
    const auto it = std::find(active_.begin(), active_.end(), e);
    return it == active_.end() ? Index(-1) : static_cast<Index>(it - active_.begin());
  }
  bool contains(VecIndex e) const { return position(e) >= 0; }

  // Strong guarantee: on SingularActiveSet the object is unchanged.
  void extend(const GammaOperator<Scalar>& op, VecIndex e) {
    if (contains(e)) {
      throw std::invalid_argument("ActiveInverse::extend: index already active");
    }
    const Index n = size();
    VectorType b(n);
    for (Index a = 0; a < n; ++a) b(a) = op.entry(active_[a], e);
    const Scalar c = op.entry(e, e);

    VectorType u = inv_ * b;
    const Scalar schur = c - b.dot(u);
    const Scalar scale = std::max(std::abs(c), std::numeric_limits<Scalar>::min());
    if (!(schur > kSchurTolerance * scale)) {
      throw SingularActiveSet("ActiveInverse::extend: Schur complement " + std::to_string(schur) +
                                  " is not positive",
                              static_cast<std::size_t>(e.value));
    }

    MatrixType next_inv(n + 1, n + 1);
    next_inv.topLeftCorner(n, n) = inv_ + (u * u.transpose()) / schur;
    next_inv.topRightCorner(n, 1) = -u / schur;
    next_inv.bottomLeftCorner(1, n) = -u.transpose() / schur;
    next_inv(n, n) = Scalar(1) / schur;

    MatrixType next_block(n + 1, n + 1);
    next_block.topLeftCorner(n, n) = block_;
    next_block.topRightCorner(n, 1) = b;
    next_block.bottomLeftCorner(1, n) = b.transpose();
    next_block(n, n) = c;

    const Scalar cond = one_norm(next_block) * one_norm(next_inv);
    if (!(cond <= kMaxCondition)) {
      throw SingularActiveSet("ActiveInverse::extend: condition estimate " + std::to_string(cond) +
                                  " exceeds limit",
                              static_cast<std::size_t>(e.value));
    }

    active_.push_back(e);
    inv_ = std::move(next_inv);
    block_ = std::move(next_block);
    condition_ = cond;
  }

  void shrink(VecIndex e) {
    const Index p = position(e);
    if (p < 0) {
      throw std::invalid_argument("ActiveInverse::shrink: index is not active");
    }
    const Index n = size();
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(n - 1));
    for (Index a = 0; a < n; ++a) {
      if (a != p) keep.push_back(a);
    }
    const Scalar r = inv_(p, p);
    const VectorType q = inv_(keep, p);
    MatrixType next_inv = inv_(keep, keep);
    next_inv.noalias() -= (q * q.transpose()) / r;
    // Keep the stored inverse exactly symmetric.
    next_inv = (Scalar(0.5) * (next_inv + next_inv.transpose())).eval();
    block_ = block_(keep, keep).eval();
    inv_ = std::move(next_inv);
    active_.erase(active_.begin() + p);
    condition_ = empty() ? Scalar(1) : one_norm(block_) * one_norm(inv_);
  }

  // Recompute the inverse from a fresh factorization of the stored block.
  void refresh() {
    if (empty()) return;
    inv_ = block_.ldlt().solve(MatrixType::Identity(size(), size()));
    inv_ = (Scalar(0.5) * (inv_ + inv_.transpose())).eval();
    condition_ = one_norm(block_) * one_norm(inv_);
  }

 private:
  static Scalar one_norm(const MatrixType& m) {
    return m.size() == 0 ? Scalar(0) : m.cwiseAbs().colwise().sum().maxCoeff();
  }

  std::vector<VecIndex> active_;
  MatrixType inv_;
  MatrixType block_;
  Scalar condition_ = Scalar(1);
};

template <typename Scalar>
ActiveInverse<Scalar> inverse_extend(ActiveInverse<Scalar> ai, const GammaOperator<Scalar>& op,
                                     VecIndex e) {
  ai.extend(op, e);
  return ai;
}

template <typename Scalar>
ActiveInverse<Scalar> inverse_shrink(ActiveInverse<Scalar> ai, VecIndex e) {
  ai.shrink(e);
  return ai;
}

}  // namespace diffpath
