#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffpath/correlation_matrix.hpp"
#include "diffpath/errors.hpp"

// Fixed-lambda proximal gradient solver for the lasso-penalized D-trace
// problem. Slow but independent of the path machinery: it never forms an
// active set and works on the full d x d iterate.
namespace diffpath {

template <typename Scalar = double>
struct SolveReport {
  DenseMatrix<Scalar> delta;
  Index iterations = 0;
  Scalar final_objective = Scalar(0);
  Scalar stationarity_residual = Scalar(0);
  bool ok = false;
  // Objective at each iterate; filled only without acceleration.
  std::vector<Scalar> objective_history;
};

template <typename Scalar = double>
struct ProximalOptions {
  Index max_iter = 10000;
  Scalar tol = Scalar(1e-10);  // stop once the max-norm change of an update is <= tol
  bool accelerate = false;
};

// 1/2 (S X S' + S' X S), the action of Gamma on vec(X).
template <typename Scalar>
DenseMatrix<Scalar> dtrace_quadratic(const DenseMatrix<Scalar>& x, const DenseMatrix<Scalar>& s,
                                     const DenseMatrix<Scalar>& sp) {
  DenseMatrix<Scalar> out(x.rows(), x.cols());
  out.noalias() = Scalar(0.5) * (s * x * sp);
  out.noalias() += Scalar(0.5) * (sp * x * s);
  return out;
}

template <typename Scalar>
DenseMatrix<Scalar> dtrace_gradient(const DenseMatrix<Scalar>& delta, const CorrelationMatrix<Scalar>& sigma,
                                    const CorrelationMatrix<Scalar>& sigma_prime) {
  return dtrace_quadratic(delta, sigma.matrix(), sigma_prime.matrix()) - sigma.matrix() + sigma_prime.matrix();
}

// 1/4 (<S D, D S'> + <S' D, D S>) - <D, S - S'> + lambda |D|_1, <A, B> = tr(A B^T).
template <typename Scalar>
Scalar objective_value(const DenseMatrix<Scalar>& delta, const CorrelationMatrix<Scalar>& sigma,
                       const CorrelationMatrix<Scalar>& sigma_prime, Scalar lambda) {
  const auto& s = sigma.matrix();
  const auto& sp = sigma_prime.matrix();
  if (delta.rows() != s.rows() || delta.cols() != s.cols() || sp.rows() != s.rows()) {
    throw DimensionMismatch("objective_value: shapes do not match");
  }
  const Scalar quad = Scalar(0.25) * (((s * delta).cwiseProduct(delta * sp)).sum() +
                                      ((sp * delta).cwiseProduct(delta * s)).sum());
  return quad - delta.cwiseProduct(s - sp).sum() + lambda * delta.cwiseAbs().sum();
}

template <typename Scalar>
DenseMatrix<Scalar> soft_threshold(const DenseMatrix<Scalar>& x, Scalar threshold) {
  return x.unaryExpr([threshold](Scalar value) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return Scalar(0);
  });
}

// Max over entries of the distance from -gradient to lambda * d|Delta|_1.
template <typename Scalar>
Scalar stationarity_residual(const DenseMatrix<Scalar>& delta, const DenseMatrix<Scalar>& gradient, Scalar lambda) {
  Scalar worst = Scalar(0);
  for (Index e = 0; e < delta.size(); ++e) {
    const Scalar x = delta.data()[e];
    const Scalar g = gradient.data()[e];
    const Scalar r = x > 0 ? std::abs(g + lambda) : x < 0 ? std::abs(g - lambda) : std::max(std::abs(g) - lambda, Scalar(0));
    worst = std::max(worst, r);
  }
  return worst;
}

template <typename Scalar>
SolveReport<Scalar> proximal_gradient_solve(const CorrelationMatrix<Scalar>& sigma,
                                            const CorrelationMatrix<Scalar>& sigma_prime, Scalar lambda,
                                            const ProximalOptions<Scalar>& options = {}) {
  if (sigma.dim() != sigma_prime.dim()) {
    throw DimensionMismatch("proximal_gradient_solve: dimension mismatch");
  }
  if (!(lambda > Scalar(0))) throw std::invalid_argument("proximal_gradient_solve: lambda must be > 0");
  const Scalar lo = std::min(sigma.min_eigenvalue(), sigma_prime.min_eigenvalue());
  if (lo < Scalar(-1e-6)) {
    throw NotPSD("proximal_gradient_solve: input has eigenvalue " + std::to_string(lo), static_cast<double>(lo));
  }

  const auto& s = sigma.matrix();
  const auto& sp = sigma_prime.matrix();
  const Index d = s.rows();
  const DenseMatrix<Scalar> linear = sp - s;
  // Lipschitz constant of the gradient: |Gamma|_2 <= lmax(S) lmax(S').
  const Scalar lipschitz = std::max(max_eigenvalue(s) * max_eigenvalue(sp), std::numeric_limits<Scalar>::min());
  const Scalar step = Scalar(1) / lipschitz;

  SolveReport<Scalar> report;
  DenseMatrix<Scalar> x = DenseMatrix<Scalar>::Zero(d, d);
  DenseMatrix<Scalar> y = x;
  Scalar momentum = Scalar(1);

  for (Index it = 0; it < options.max_iter; ++it) {
    const DenseMatrix<Scalar> quad = dtrace_quadratic(y, s, sp);
    const DenseMatrix<Scalar> grad = quad + linear;
    if (!options.accelerate) {
      // Objective at the current iterate from the quadratic already computed.
      report.objective_history.push_back(Scalar(0.5) * y.cwiseProduct(quad).sum() + y.cwiseProduct(linear).sum() +
                                         lambda * y.cwiseAbs().sum());
    }
    DenseMatrix<Scalar> next = soft_threshold<Scalar>(y - step * grad, step * lambda);
    const Scalar change = (next - x).cwiseAbs().maxCoeff();
    report.iterations = it + 1;

    if (options.accelerate) {
      // Gradient-based adaptive restart.
      if ((y - next).cwiseProduct(next - x).sum() > Scalar(0)) momentum = Scalar(1);
      const Scalar next_momentum = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * momentum * momentum)) / Scalar(2);
      y = next + ((momentum - Scalar(1)) / next_momentum) * (next - x);
      momentum = next_momentum;
    } else {
      y = next;
    }
    x = std::move(next);
    if (change <= options.tol) {
      report.ok = true;
      break;
    }
  }

  report.delta = x;
  report.final_objective = objective_value(x, sigma, sigma_prime, lambda);
  report.stationarity_residual = stationarity_residual<Scalar>(x, dtrace_gradient(x, sigma, sigma_prime), lambda);
  return report;
}

}  // namespace diffpath
