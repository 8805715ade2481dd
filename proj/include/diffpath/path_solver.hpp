#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "diffpath/active_inverse.hpp"
#include "diffpath/correlation_matrix.hpp"
#include "diffpath/errors.hpp"
#include "diffpath/gamma_operator.hpp"
#include "diffpath/vec_index.hpp"

// Exact solution path of
//
//   min_Delta  1/4 (<S Delta, Delta S'> + <S' Delta, Delta S>) - <Delta, S - S'> + lambda |Delta|_1
//
// as lambda decreases from infinity. With Gamma = 1/2 (S (x) S' + S' (x) S) the
// optimality conditions read Gamma vec(Delta) + v + lambda nu = 0 with
// nu in the subdifferential of |.|_1 and
//
//   v = vec(S' - S).
//
// On an active set A with signs s_A
// the solution is vec(Delta)_A = -(Gamma_AA)^{-1} (v_A + lambda s_A), which is
// linear in lambda until a coordinate in A returns to zero (cross) or an
// inactive coordinate reaches the boundary |Gamma_e vec(Delta) + v_e| = lambda
// (hit).
namespace diffpath {

enum class EventKind { Hit, Cross, Terminal };

enum class Termination {
  Running,
  ZeroDifference,   // S == S', the path is identically zero
  BudgetExceeded,   // |A| > c
  SingularActiveSet,
  LambdaMin,        // reached the requested lower end of the path
  NoMoreEvents,     // no event above zero; the last segment extends to lambda = 0
};

const char* to_string(EventKind kind) noexcept;
const char* to_string(Termination reason) noexcept;

struct PathEvent {
  EventKind kind = EventKind::Terminal;
  // Entries that entered or left. Two entries for an off-diagonal pair.
  std::vector<VecIndex> indices;
  int sign = 0;  // sign of entering entries, 0 otherwise
  Termination reason = Termination::Running;
};

template <typename Scalar = double>
struct Knot {
  Scalar lambda = Scalar(0);
  Eigen::SparseMatrix<Scalar> delta;
  // Active set and signs in force on the segment just below this knot.
  std::vector<VecIndex> active;
  std::vector<int> signs;
  PathEvent event;
};

template <typename Scalar = double>
struct SolutionPath {
  Index dim = 0;
  Index budget_c = 0;
  Scalar lambda_min = Scalar(0);
  std::vector<Knot<Scalar>> knots;
  Termination termination = Termination::Running;

  Scalar first_lambda() const { return knots.empty() ? Scalar(0) : knots.front().lambda; }
  Scalar last_lambda() const { return knots.empty() ? Scalar(0) : knots.back().lambda; }
};

template <typename Scalar = double>
struct PathState {
  Index t = 0;
  Scalar lambda_t = std::numeric_limits<Scalar>::infinity();
  ActiveInverse<Scalar> inverse;
  std::vector<Scalar> signs;  // aligned with inverse.active()
  DenseVector<Scalar> v;      // vec(S' - S)

  const std::vector<VecIndex>& active() const noexcept { return inverse.active(); }

  DenseVector<Scalar> active_signs() const {
    return Eigen::Map<const DenseVector<Scalar>>(signs.data(), static_cast<Index>(signs.size()));
  }
  DenseVector<Scalar> active_v() const {
    DenseVector<Scalar> out(static_cast<Index>(active().size()));
    for (Index a = 0; a < out.size(); ++a) out(a) = v(active()[static_cast<std::size_t>(a)].value);
    return out;
  }
};

template <typename Scalar>
struct HitCandidate {
  Scalar lambda;
  VecIndex index;
  int sign;
};

template <typename Scalar>
struct CrossCandidate {
  Scalar lambda;
  VecIndex index;
};

namespace detail {

template <typename Scalar>
constexpr Scalar kDenominatorFloor = Scalar(1e-12);

// lambda is a valid next event below lambda_t.
template <typename Scalar>
bool strictly_below(Scalar lambda, Scalar lambda_t) {
  if (!std::isfinite(lambda)) return false;
  if (std::isinf(lambda_t)) return true;
  return lambda < lambda_t - Scalar(1e-12) * std::max(Scalar(1), lambda_t);
}

}  // namespace detail

template <typename Scalar>
PathState<Scalar> initial_state(const GammaOperator<Scalar>& op) {
  PathState<Scalar> st;
  const DenseMatrix<Scalar> diff = op.sigma_prime() - op.sigma();
  st.v = Eigen::Map<const DenseVector<Scalar>>(diff.data(), diff.size());
  return st;
}

// Largest lambda < lambda_t at which an inactive coordinate e reaches
//   Gamma_{e,A} vec(Delta)_A + v_e = -s lambda,
// i.e. (Gamma_{e,A} Gi v_A - v_e) / (s - Gamma_{e,A} Gi s_A) with Gi = (Gamma_AA)^{-1}.
// Only the sign whose boundary is approached from inside the band is
// admitted; in exact arithmetic the other root lies above lambda_t.
template <typename Scalar>
std::optional<HitCandidate<Scalar>> hitting_event(const GammaOperator<Scalar>& op,
                                                  const PathState<Scalar>& st) {
  const Index d = op.dim();
  const Index n = d * d;
  std::vector<char> in_active(static_cast<std::size_t>(n), 0);
  for (const VecIndex e : st.active()) in_active[static_cast<std::size_t>(e.value)] = 1;

  DenseMatrix<Scalar> gv = DenseMatrix<Scalar>::Zero(d, d);
  DenseMatrix<Scalar> gs = DenseMatrix<Scalar>::Zero(d, d);
  if (!st.active().empty()) {
    const DenseVector<Scalar> wv = st.inverse.inverse() * st.active_v();
    const DenseVector<Scalar> ws = st.inverse.inverse() * st.active_signs();
    gv = op.apply_sparse(st.active(), wv);
    gs = op.apply_sparse(st.active(), ws);
  }

  std::optional<HitCandidate<Scalar>> best;
  for (Index e = 0; e < n; ++e) {
    if (in_active[static_cast<std::size_t>(e)]) continue;
    const Scalar numerator = gv.data()[e] - st.v(e);
    for (const int s : {-1, 1}) {
      const Scalar denominator = Scalar(s) - gs.data()[e];
      if (std::abs(denominator) < detail::kDenominatorFloor<Scalar>) continue;
      if (Scalar(s) * denominator <= Scalar(0)) continue;
      const Scalar lambda = numerator / denominator;
      if (!detail::strictly_below(lambda, st.lambda_t)) continue;
      if (!best || lambda > best->lambda) best = HitCandidate<Scalar>{lambda, VecIndex{e}, s};
    }
  }
  return best;
}

// Largest lambda < lambda_t at which an active coordinate returns to zero:
// -[Gi v_A]_e / [Gi s_A]_e, restricted to coordinates moving toward zero.
template <typename Scalar>
std::optional<CrossCandidate<Scalar>> crossing_event(const PathState<Scalar>& st) {
  if (st.active().empty()) return std::nullopt;
  const DenseVector<Scalar> wv = st.inverse.inverse() * st.active_v();
  const DenseVector<Scalar> ws = st.inverse.inverse() * st.active_signs();

  std::optional<CrossCandidate<Scalar>> best;
  for (Index a = 0; a < ws.size(); ++a) {
    if (std::abs(ws(a)) < detail::kDenominatorFloor<Scalar>) continue;
    if (st.signs[static_cast<std::size_t>(a)] * ws(a) >= Scalar(0)) continue;
    const Scalar lambda = -wv(a) / ws(a);
    if (!detail::strictly_below(lambda, st.lambda_t)) continue;
    const VecIndex e = st.active()[static_cast<std::size_t>(a)];
    if (!best || lambda > best->lambda || (lambda == best->lambda && e < best->index)) {
      best = CrossCandidate<Scalar>{lambda, e};
    }
  }
  return best;
}

// vec(Delta(lambda))_A = -(Gamma_AA)^{-1} (v_A + lambda s_A); zero elsewhere.
template <typename Scalar>
DenseVector<Scalar> active_solution(const PathState<Scalar>& st, Scalar lambda) {
  if (st.active().empty()) return DenseVector<Scalar>();
  return -(st.inverse.inverse() * (st.active_v() + lambda * st.active_signs()));
}

namespace detail {

template <typename Scalar>
Eigen::SparseMatrix<Scalar> to_sparse(Index d, const std::vector<VecIndex>& active,
                                      const DenseVector<Scalar>& values) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const Scalar value = values(static_cast<Index>(a));
    if (value == Scalar(0)) continue;
    const auto [i, j] = pair_of(active[a], d);
    triplets.emplace_back(i, j, value);
  }
  Eigen::SparseMatrix<Scalar> out(d, d);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

template <typename Scalar>
Knot<Scalar> make_knot(Index d, const PathState<Scalar>& st, Scalar lambda,
                       const DenseVector<Scalar>& values, PathEvent event) {
  Knot<Scalar> knot;
  knot.lambda = lambda;
  knot.delta = to_sparse(d, st.active(), values);
  knot.event = std::move(event);
  return knot;
}

template <typename Scalar>
void record_active(Knot<Scalar>& knot, const PathState<Scalar>& st) {
  knot.active = st.active();
  knot.signs.assign(st.signs.size(), 0);
  for (std::size_t a = 0; a < st.signs.size(); ++a) knot.signs[a] = st.signs[a] > 0 ? 1 : -1;
}

template <typename Scalar>
void check_inputs(const CorrelationMatrix<Scalar>& sigma, const CorrelationMatrix<Scalar>& sigma_prime) {
  if (sigma.dim() != sigma_prime.dim()) {
    throw DimensionMismatch("compute_path: sigma is " + std::to_string(sigma.dim()) +
                            "-dimensional, sigma_prime is " + std::to_string(sigma_prime.dim()));
  }
  for (const auto* m : {&sigma, &sigma_prime}) {
    const Scalar lo = m->min_eigenvalue();
    if (lo < Scalar(-1e-6)) {
      throw NotPSD("compute_path: input has eigenvalue " + std::to_string(lo), static_cast<double>(lo));
    }
  }
}

}  // namespace detail

// Knots from lambda_1 = |S - S'|_max downward. Stops when more than c entries
// are active, Gamma_AA turns singular, or lambda reaches lambda_min.
template <typename Scalar>
SolutionPath<Scalar> compute_path(const CorrelationMatrix<Scalar>& sigma,
                                  const CorrelationMatrix<Scalar>& sigma_prime, Index c,
                                  Scalar lambda_min = Scalar(0)) {
  if (c < 1) throw std::invalid_argument("compute_path: budget c must be at least 1");
  if (!(lambda_min >= Scalar(0))) throw std::invalid_argument("compute_path: lambda_min must be >= 0");
  detail::check_inputs(sigma, sigma_prime);

  const GammaOperator<Scalar> op(sigma, sigma_prime);
  const Index d = op.dim();
  SolutionPath<Scalar> path;
  path.dim = d;
  path.budget_c = c;
  path.lambda_min = lambda_min;

  PathState<Scalar> st = initial_state(op);
  if (d == 0 || st.v.cwiseAbs().maxCoeff() == Scalar(0)) {
    PathEvent event{EventKind::Terminal, {}, 0, Termination::ZeroDifference};
    path.knots.push_back(detail::make_knot(d, st, Scalar(0), DenseVector<Scalar>(), event));
    path.termination = Termination::ZeroDifference;
    return path;
  }

  while (true) {
    const auto hit = hitting_event(op, st);
    const auto cross = crossing_event(st);

    bool take_hit = false;
    Scalar next = -std::numeric_limits<Scalar>::infinity();
    if (hit && (!cross || !detail::strictly_below(hit->lambda, cross->lambda))) {
      take_hit = true;
      next = hit->lambda;
    } else if (cross) {
      next = cross->lambda;
    }

    if (!(hit || cross) || next <= lambda_min) {
      const Termination reason = (hit || cross) ? Termination::LambdaMin : Termination::NoMoreEvents;
      PathEvent event{EventKind::Terminal, {}, 0, reason};
      Knot<Scalar> knot = detail::make_knot(d, st, lambda_min, active_solution(st, lambda_min), event);
      detail::record_active(knot, st);
      path.knots.push_back(std::move(knot));
      path.termination = reason;
      return path;
    }

    DenseVector<Scalar> values = active_solution(st, next);

    if (take_hit) {
      std::vector<VecIndex> entering{hit->index};
      if (!is_diagonal(hit->index, d)) entering.push_back(exchange_partner(hit->index, d));
      PathEvent event{EventKind::Hit, entering, hit->sign, Termination::Running};
      Knot<Scalar> knot = detail::make_knot(d, st, next, values, event);
      try {
        for (const VecIndex e : entering) {
          st.inverse.extend(op, e);
          st.signs.push_back(Scalar(hit->sign));
        }
      } catch (const SingularActiveSet&) {
        // Roll back a half-entered pair so the recorded state stays symmetric.
        for (const VecIndex e : entering) {
          if (st.inverse.contains(e)) {
            st.signs.erase(st.signs.begin() + st.inverse.position(e));
            st.inverse.shrink(e);
          }
        }
        knot.event = PathEvent{EventKind::Terminal, entering, hit->sign, Termination::SingularActiveSet};
        detail::record_active(knot, st);
        path.knots.push_back(std::move(knot));
        path.termination = Termination::SingularActiveSet;
        return path;
      }
      detail::record_active(knot, st);
      path.knots.push_back(std::move(knot));
    } else {
      std::vector<VecIndex> leaving{cross->index};
      const VecIndex partner = exchange_partner(cross->index, d);
      if (!is_diagonal(cross->index, d) && st.inverse.contains(partner)) leaving.push_back(partner);
      for (const VecIndex e : leaving) values(st.inverse.position(e)) = Scalar(0);
      PathEvent event{EventKind::Cross, leaving, 0, Termination::Running};
      Knot<Scalar> knot = detail::make_knot(d, st, next, values, event);
      for (const VecIndex e : leaving) {
        st.signs.erase(st.signs.begin() + st.inverse.position(e));
        st.inverse.shrink(e);
      }
      detail::record_active(knot, st);
      path.knots.push_back(std::move(knot));
    }

    st.lambda_t = next;
    ++st.t;
    if (st.inverse.size() > c) {
      path.termination = Termination::BudgetExceeded;
      return path;
    }
  }
}

// Delta(lambda) by linear interpolation between the bracketing knots. Zero
// above lambda_1; OutOfRange below the last knot.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> interpolate(const SolutionPath<Scalar>& path, Scalar lambda) {
  const Index d = path.dim;
  Eigen::SparseMatrix<Scalar> zero(d, d);
  if (path.knots.empty() || path.termination == Termination::ZeroDifference) return zero;
  if (lambda > path.first_lambda()) return zero;
  if (lambda < path.last_lambda()) {
    throw OutOfRange("interpolate: lambda " + std::to_string(lambda) + " is below the last knot " +
                         std::to_string(path.last_lambda()),
                     static_cast<double>(path.last_lambda()));
  }
  const auto& knots = path.knots;
  // First knot with knot.lambda <= lambda.
  const auto it = std::partition_point(knots.begin(), knots.end(),
                                       [&](const Knot<Scalar>& k) { return k.lambda > lambda; });
  if (it->lambda == lambda) return it->delta;
  const Knot<Scalar>& lower = *it;
  const Knot<Scalar>& upper = *(it - 1);
  const Scalar span = upper.lambda - lower.lambda;
  const Scalar w_lower = (upper.lambda - lambda) / span;
  const Scalar w_upper = (lambda - lower.lambda) / span;
  Eigen::SparseMatrix<Scalar> out = w_lower * lower.delta + w_upper * upper.delta;
  out.prune(Scalar(0));
  return out;
}

template <typename Scalar = double>
struct KktReport {
  Scalar max_stationarity_residual = Scalar(0);
  Scalar max_dual_violation = Scalar(0);
  bool ok = true;
};

// Checks, with the full Gamma rows,
//   |Gamma_e vec(Delta) + v_e + lambda sign(Delta_e)| <= tol   where Delta_e != 0,
//   |Gamma_e vec(Delta) + v_e| <= lambda + tol                 where Delta_e == 0.
template <typename Derived, typename Scalar = typename Derived::Scalar>
KktReport<Scalar> kkt_check(const Eigen::EigenBase<Derived>& delta, Scalar lambda,
                            const CorrelationMatrix<Scalar>& sigma,
                            const CorrelationMatrix<Scalar>& sigma_prime, Scalar tol) {
  const DenseMatrix<Scalar> dense = delta.derived();
  const GammaOperator<Scalar> op(sigma, sigma_prime);
  const DenseMatrix<Scalar> grad = op.apply(dense) + sigma_prime.matrix() - sigma.matrix();
  KktReport<Scalar> report;
  for (Index e = 0; e < dense.size(); ++e) {
    const Scalar x = dense.data()[e];
    const Scalar g = grad.data()[e];
    if (x != Scalar(0)) {
      const Scalar r = std::abs(g + lambda * (x > 0 ? Scalar(1) : Scalar(-1)));
      report.max_stationarity_residual = std::max(report.max_stationarity_residual, r);
    } else {
      report.max_dual_violation = std::max(report.max_dual_violation, std::abs(g) - lambda);
    }
  }
  report.max_dual_violation = std::max(report.max_dual_violation, Scalar(0));
  report.ok = report.max_stationarity_residual <= tol && report.max_dual_violation <= tol;
  return report;
}

}  // namespace diffpath
