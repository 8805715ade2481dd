#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "diffpath/correlation_matrix.hpp"
#include "diffpath/errors.hpp"
#include "diffpath/vec_index.hpp"

namespace diffpath {

// One heterogeneous source: m_s samples (rows) of d variables (columns).
struct Dataset {
  Eigen::MatrixXd samples;
  std::string source_id;
  std::vector<std::string> column_names;

  Index size() const noexcept { return samples.rows(); }
  Index dim() const noexcept { return samples.cols(); }
};

// Throws InsufficientSamples for m_s < 2 and std::invalid_argument for
// non-finite entries.
void validate(const Dataset& ds);

// Datasets sharing one latent correlation structure.
class DatasetCollection {
 public:
  DatasetCollection() = default;
  explicit DatasetCollection(std::vector<Dataset> datasets);

  const std::vector<Dataset>& datasets() const noexcept { return datasets_; }
  Index dim() const noexcept { return datasets_.empty() ? 0 : datasets_.front().dim(); }
  Index total_size() const noexcept { return total_m_; }
  std::size_t count() const noexcept { return datasets_.size(); }

 private:
  std::vector<Dataset> datasets_;
  Index total_m_ = 0;
};

struct TauMatrix {
  Eigen::MatrixXd entries;
  // Largest fraction of sample pairs tied in either coordinate, over all (k, l).
  double max_tie_fraction = 0.0;
};

struct KendallResult {
  double tau = 0.0;
  // Pairs tied in x or in y, as a fraction of m(m-1)/2.
  double tie_fraction = 0.0;
};

// 2/(m(m-1)) * sum_{i<j} sign((x_i - x_j)(y_i - y_j)), O(m log m) by counting
// inversions with a merge sort. Ties contribute 0.
KendallResult kendall_tau_detail(std::span<const double> x, std::span<const double> y);
double kendall_tau_pair(std::span<const double> x, std::span<const double> y);

TauMatrix tau_matrix(const Dataset& ds);

// Entrywise sum_s (m_s / m) tau_s.
TauMatrix combine_taus(std::span<const TauMatrix> taus, std::span<const Index> sizes);
TauMatrix weighted_tau(const DatasetCollection& coll);

// Off-diagonal sin(pi/2 * tau), unit diagonal. Not necessarily PSD.
CorrelationMatrix<double> tau_to_correlation(const TauMatrix& tau);

// Nearest-style PSD repair: eigenvalues below max(1e-8, mu/2) are raised to
// that floor, the matrix is reassembled and rescaled to unit diagonal. A
// matrix that is already PSD is returned as is (after exact symmetrization).
template <typename Derived>
CorrelationMatrix<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived>& sigma_tilde,
                                                         typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  using MatrixType = DenseMatrix<Scalar>;
  if (sigma_tilde.rows() != sigma_tilde.cols()) {
    throw DimensionMismatch("project_psd: matrix is not square");
  }
  if (mu < Scalar(0)) {
    throw std::invalid_argument("project_psd: mu must be non-negative");
  }
  const MatrixType input = sigma_tilde;
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
    throw NotSymmetric("project_psd: input is not symmetric");
  }
  MatrixType sym = Scalar(0.5) * (input + input.transpose());
  const Index d = sym.rows();
  if (d == 0) return CorrelationMatrix<Scalar>(sym);

  Eigen::SelfAdjointEigenSolver<MatrixType> es(sym);
  // Round-off on an exactly singular PSD input is not a violation.
  const Scalar already_psd = Scalar(-1e-12) * std::max(Scalar(1), es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() >= already_psd) {
    return CorrelationMatrix<Scalar>(sym);
  }

  const Scalar floor = std::max(Scalar(1e-8), mu / Scalar(2));
  const DenseVector<Scalar> clipped = es.eigenvalues().cwiseMax(floor);
  MatrixType repaired = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  const DenseVector<Scalar> inv_sqrt = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = (inv_sqrt.asDiagonal() * repaired * inv_sqrt.asDiagonal()).eval();
  for (Index j = 0; j < d; ++j) {
    repaired(j, j) = Scalar(1);
    for (Index i = 0; i < j; ++i) {
      const Scalar value = std::clamp(Scalar(0.5) * (repaired(i, j) + repaired(j, i)), Scalar(-1), Scalar(1));
      repaired(i, j) = value;
      repaired(j, i) = value;
    }
  }
  return CorrelationMatrix<Scalar>(repaired);
}

struct CorrelationEstimate {
  TauMatrix tau;
  CorrelationMatrix<double> pre_projection;
  CorrelationMatrix<double> correlation;
  double mu = 0.0;
};

// weighted_tau -> tau_to_correlation -> project_psd.
CorrelationEstimate estimate_correlation(const DatasetCollection& coll, double mu);

}  // namespace diffpath
