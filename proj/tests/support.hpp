#pragma once

#include <Eigen/Dense>

#include <random>

#include "diffpath/correlation_matrix.hpp"
#include "diffpath/random.hpp"

namespace testing {

using diffpath::CorrelationMatrix;
using diffpath::Index;

// Sample correlation of m Gaussian draws with a random mixing matrix; positive
// definite once m > d.
inline CorrelationMatrix<double> random_correlation(Index d, std::uint64_t seed, Index m = 0) {
  diffpath::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (m == 0) m = 3 * d;
  Eigen::MatrixXd mix(d, d), z(m, d);
  for (Index i = 0; i < mix.size(); ++i) mix.data()[i] = normal(rng);
  for (Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  const Eigen::MatrixXd x = z * mix;
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::VectorXd inv_sqrt = cov.diagonal().cwiseSqrt().cwiseInverse();
  cov = (inv_sqrt.asDiagonal() * cov * inv_sqrt.asDiagonal()).eval();
  cov = (0.5 * (cov + cov.transpose())).eval();
  cov.diagonal().setOnes();
  return CorrelationMatrix<double>(cov);
}

struct Pair {
  CorrelationMatrix<double> sigma;
  CorrelationMatrix<double> sigma_prime;
};

inline Pair random_pair(Index d, std::uint64_t seed, Index m = 0) {
  return {random_correlation(d, diffpath::derive_seed(seed, 0), m),
          random_correlation(d, diffpath::derive_seed(seed, 1), m)};
}

}  // namespace testing
