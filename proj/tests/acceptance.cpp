#include <unsupported/Eigen/KroneckerProduct>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "diffpath/covariance.hpp"
#include "diffpath/datagen.hpp"
#include "diffpath/evaluation.hpp"
#include "diffpath/path_solver.hpp"
#include "diffpath/random.hpp"
#include "diffpath/reference_solver.hpp"

using namespace diffpath;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

constexpr std::uint64_t kMaster = 20240601;

struct Instance {
  CorrelationMatrix<double> sigma;
  CorrelationMatrix<double> sigma_prime;
  EdgeSet truth;
};

// Estimated correlations of one simulated protocol draw.
Instance make_instance(Index d, Index k, std::vector<Index> sizes, std::uint64_t seed) {
  SimulationConfig config;
  config.d = d;
  config.k_delete = k / 2;
  config.k_insert = k - k / 2;
  config.sizes_a = sizes;
  config.sizes_b = sizes;
  const SyntheticInstance sim = simulate(config, seed);
  return {estimate_correlation(sim.group_a, 1e-8).correlation, estimate_correlation(sim.group_b, 1e-8).correlation,
          sim.precision.true_delta_support};
}

// Every path computed below is checked against the first-knot law and symmetry.
struct PathAudit {
  Index paths = 0;
  double worst_first_knot = 0.0;
  double worst_asymmetry = 0.0;

  void record(const SolutionPath<double>& path, const CorrelationMatrix<double>& s,
              const CorrelationMatrix<double>& sp) {
    ++paths;
    const double expected = (s.matrix() - sp.matrix()).cwiseAbs().maxCoeff();
    worst_first_knot = std::max(worst_first_knot, std::abs(path.first_lambda() - expected));
    for (const auto& knot : path.knots) {
      const Eigen::MatrixXd m = knot.delta;
      if (m.size() > 0) worst_asymmetry = std::max(worst_asymmetry, (m - m.transpose()).cwiseAbs().maxCoeff());
    }
  }
};

PathAudit audit;

SolutionPath<double> audited_path(const Instance& inst, Index c) {
  auto path = compute_path(inst.sigma, inst.sigma_prime, c);
  audit.record(path, inst.sigma, inst.sigma_prime);
  return path;
}

std::vector<Instance> kkt_instances() {
  std::vector<Instance> out;
  for (int i = 0; i < 20; ++i) {
    const Index d = i < 10 ? 10 : 30;
    out.push_back(make_instance(d, d == 10 ? 4 : 10, {200}, derive_seed(kMaster, 100 + i)));
  }
  return out;
}

Outcome kkt_exactness(const std::vector<Instance>& instances) {
  const auto start = Clock::now();
  double worst = 0.0;
  Index checks = 0;
  bool ok = true;
  for (const auto& inst : instances) {
    const auto path = audited_path(inst, 100);
    for (std::size_t k = 0; k < path.knots.size(); ++k) {
      const auto& knot = path.knots[k];
      auto report = kkt_check(knot.delta, knot.lambda, inst.sigma, inst.sigma_prime, 1e-8);
      ok = ok && report.ok;
      worst = std::max({worst, report.max_stationarity_residual, report.max_dual_violation});
      ++checks;
      if (k + 1 < path.knots.size()) {
        const double mid = 0.5 * (knot.lambda + path.knots[k + 1].lambda);
        report = kkt_check(interpolate(path, mid), mid, inst.sigma, inst.sigma_prime, 1e-8);
        ok = ok && report.ok;
        worst = std::max({worst, report.max_stationarity_residual, report.max_dual_violation});
        ++checks;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 60.0,
          fmt("%ld checks on 20 instances, worst KKT residual %.2e (tol 1e-8), %.1f s (limit 60 s)",
              static_cast<long>(checks), worst, elapsed)};
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  double worst = 0.0, worst_stationarity = 0.0;
  ProximalOptions<double> opts;
  opts.accelerate = true;
  opts.tol = 1e-14;
  opts.max_iter = 1000000;
  for (int i = 0; i < 10; ++i) {
    const Instance inst = make_instance(20, 6, {200}, derive_seed(kMaster, 200 + i));
    const auto path = audited_path(inst, 400);
    const double hi = path.first_lambda(), lo = path.last_lambda();
    for (int g = 1; g <= 10; ++g) {
      const double lambda = lo + (hi - lo) * g / 11.0;
      const auto report = proximal_gradient_solve(inst.sigma, inst.sigma_prime, lambda, opts);
      worst_stationarity = std::max(worst_stationarity, report.stationarity_residual);
      worst = std::max(worst, (Eigen::MatrixXd(interpolate(path, lambda)) - report.delta).cwiseAbs().maxCoeff());
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-5 && worst_stationarity <= 1e-10 && elapsed < 300.0,
          fmt("max |path - oracle| = %.2e (tol 1e-5) over 100 lambdas, oracle stationarity %.1e (tol 1e-10), "
              "%.1f s (limit 300 s)",
              worst, worst_stationarity, elapsed)};
}

Outcome first_knot_law() {
  return {audit.paths > 0 && audit.worst_first_knot <= 1e-12,
          fmt("%ld paths, max |lambda_1 - |S - S'|_max| = %.2e (tol 1e-12)", static_cast<long>(audit.paths),
              audit.worst_first_knot)};
}

Outcome piecewise_linearity(const std::vector<Instance>& instances) {
  double worst = 0.0;
  Index midpoints = 0;
  for (const auto& inst : instances) {
    const auto path = audited_path(inst, 100);
    const Index d = inst.sigma.dim();
    const Eigen::MatrixXd gamma = 0.5 * (Eigen::MatrixXd(Eigen::kroneckerProduct(inst.sigma.matrix(), inst.sigma_prime.matrix())) +
                                         Eigen::MatrixXd(Eigen::kroneckerProduct(inst.sigma_prime.matrix(), inst.sigma.matrix())));
    const Eigen::MatrixXd diff = inst.sigma_prime.matrix() - inst.sigma.matrix();
    for (std::size_t k = 0; k + 1 < path.knots.size(); ++k) {
      const auto& upper = path.knots[k];
      const double mid = 0.5 * (upper.lambda + path.knots[k + 1].lambda);
      const Index n = static_cast<Index>(upper.active.size());
      Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(d, d);
      if (n > 0) {
        Eigen::MatrixXd block(n, n);
        Eigen::VectorXd rhs(n);
        for (Index a = 0; a < n; ++a) {
          for (Index b = 0; b < n; ++b) block(a, b) = gamma(upper.active[a].value, upper.active[b].value);
          rhs(a) = diff.data()[upper.active[a].value] + mid * upper.signs[static_cast<std::size_t>(a)];
        }
        const Eigen::VectorXd x = -block.partialPivLu().solve(rhs);
        for (Index a = 0; a < n; ++a) direct.data()[upper.active[a].value] = x(a);
      }
      worst = std::max(worst, (Eigen::MatrixXd(interpolate(path, mid)) - direct).cwiseAbs().maxCoeff());
      ++midpoints;
    }
  }
  return {worst <= 1e-10, fmt("%ld segment midpoints, max |interpolated - direct solve| = %.2e (tol 1e-10)",
                              static_cast<long>(midpoints), worst)};
}

double brute_force_tau(const std::vector<double>& x, const std::vector<double>& y) {
  std::int64_t net = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      net += ((x[i] > x[j]) - (x[i] < x[j])) * ((y[i] > y[j]) - (y[i] < y[j]));
    }
  }
  const double m = static_cast<double>(x.size());
  return 2.0 * static_cast<double>(net) / (m * (m - 1.0));
}

Outcome kendall_correctness() {
  Rng rng(derive_seed(kMaster, 300));
  std::uniform_int_distribution<std::size_t> size(2, 200);
  std::normal_distribution<double> normal(0.0, 1.0);
  int mismatches = 0, with_ties = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = size(rng);
    const bool ties = trial % 2 == 0;
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = ties ? std::round(2.0 * normal(rng)) : normal(rng);
      y[i] = ties ? std::round(2.0 * normal(rng)) : normal(rng);
    }
    with_ties += ties;
    if (kendall_tau_pair(x, y) != brute_force_tau(x, y)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d of 100 vector pairs differ from the O(m^2) definition (%d with ties)", mismatches,
                               with_ties)};
}

Outcome lemma_concentration() {
  const Index d = 5, m = 2000;
  Eigen::MatrixXd target(d, d);
  target << 1.0, 0.6, 0.3, -0.2, 0.0,  //
      0.6, 1.0, 0.4, 0.1, -0.3,        //
      0.3, 0.4, 1.0, 0.5, 0.2,         //
      -0.2, 0.1, 0.5, 1.0, 0.7,        //
      0.0, -0.3, 0.2, 0.7, 1.0;
  const CorrelationMatrix<double> sigma(target);
  if (sigma.min_eigenvalue() <= 0.0) return {false, "target correlation is not positive definite"};
  const std::vector<double> ts{0.1, 0.15, 0.2};
  std::vector<std::vector<int>> exceed(ts.size(), std::vector<int>(static_cast<std::size_t>(d * d), 0));
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(kMaster, 400 + static_cast<std::uint64_t>(trial));
    const Dataset ds = sample_npn(sigma, random_transforms(d, derive_seed(seed, 0)), m, derive_seed(seed, 1));
    const auto tilde = tau_to_correlation(tau_matrix(ds));
    for (std::size_t t = 0; t < ts.size(); ++t) {
      for (Index e = 0; e < d * d; ++e) {
        if (std::abs(tilde.matrix().data()[e] - target.data()[e]) >= ts[t]) ++exceed[t][static_cast<std::size_t>(e)];
      }
    }
  }
  bool ok = true;
  std::string detail;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    const double worst = *std::max_element(exceed[t].begin(), exceed[t].end()) / static_cast<double>(trials);
    const double bound = std::exp(-static_cast<double>(m) * ts[t] * ts[t] / (2.0 * std::numbers::pi * std::numbers::pi));
    ok = ok && worst <= bound + 0.02;
    detail += fmt("%st=%.2f: worst entry %.3f vs bound %.3f+0.02", t ? "; " : "", ts[t], worst, bound);
  }
  return {ok, detail};
}

Outcome transform_invariance() {
  int differing = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t seed = derive_seed(kMaster, 700 + static_cast<std::uint64_t>(trial));
    Rng rng(seed);
    std::uniform_int_distribution<Index> dim(2, 8), rows(5, 200);
    const Index d = dim(rng), m = rows(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset ds;
    ds.samples.resize(m, d);
    for (Index i = 0; i < ds.samples.size(); ++i) ds.samples.data()[i] = normal(rng);
    ds.source_id = "raw";
    Dataset moved = ds;
    const auto ts = random_transforms(d, derive_seed(seed, 1));
    for (Index c = 0; c < d; ++c) {
      const Transform t = ts[static_cast<std::size_t>(c)];
      moved.samples.col(c) = ds.samples.col(c).unaryExpr([t](double x) { return apply_forward(t, x); });
    }
    if (tau_matrix(ds).entries != tau_matrix(moved).entries) ++differing;
  }
  return {differing == 0, fmt("%d of 50 transformed datasets change the tau matrix", differing)};
}

double mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (const double x : xs) total += x;
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

Outcome heterogeneous_integration() {
  const auto start = Clock::now();
  std::vector<double> het, hom, single;
  for (int s = 0; s < 20; ++s) {
    const std::uint64_t seed = derive_seed(kMaster, 800 + static_cast<std::uint64_t>(s));
    // One latent structure per seed, three sampling designs.
    for (const auto& [sizes, out] : {std::pair{std::vector<Index>{200, 200, 200, 200}, &het},
                                     std::pair{std::vector<Index>{800}, &hom}, std::pair{std::vector<Index>{200}, &single}}) {
      const Instance inst = make_instance(50, 20, sizes, seed);
      const auto path = audited_path(inst, 100);
      out->push_back(pr_area(precision_recall(path, inst.truth)));
    }
  }
  const double h = mean(het), o = mean(hom), g = mean(single);
  const double elapsed = seconds_since(start);
  const bool ok = std::abs(h - o) <= 0.1 && h >= g + 0.05 && o >= g + 0.05 && elapsed < 900.0;
  return {ok, fmt("mean PR area: 4x200 heterogeneous %.3f, 1x800 homogeneous %.3f, 1x200 single %.3f; "
                  "|het - hom| = %.3f (<= 0.1), min(het, hom) - single = %.3f (>= 0.05), %.1f s (limit 900 s)",
                  h, o, g, std::abs(h - o), std::min(h, o) - g, elapsed)};
}

// Mean over oracle PR points (within the path's recall range) of the path's
// interpolated precision at that recall minus the oracle precision.
double dominance_margin(const PRCurve& path, const PRCurve& oracle, Index& compared) {
  double reach = 0.0;
  for (const auto& p : path.points) reach = std::max(reach, p.recall);
  double total = 0.0;
  for (const auto& p : oracle.points) {
    if (p.recall > reach) continue;
    total += interpolated_precision(path, p.recall) - p.precision;
    ++compared;
  }
  return total;
}

Outcome path_vs_oracle() {
  BenchSpec spec;
  spec.d = 50;
  spec.m = 1000;
  spec.n_seeds = 20;
  spec.c = 100;
  spec.k_changes = 20;
  spec.lambda_grid = make_grid(GridSpec{0.1, 2.0, 50, true});
  spec.seed = derive_seed(kMaster, 900);
  const BenchResult result = timing_benchmark(spec);

  double knots = 0.0, min_knots = 1e300, path_ms = 0.0, apgd_ms = 0.0, margin = 0.0;
  Index compared = 0;
  const std::size_t per_seed = spec.methods.size();
  for (std::size_t s = 0; s < static_cast<std::size_t>(spec.n_seeds); ++s) {
    const auto& path_row = result.timings[s * per_seed];
    const PRCurve& path_curve = result.curves[s * per_seed];
    const PRCurve& apgd5_curve = result.curves[s * per_seed + 1];
    knots += static_cast<double>(path_row.knots);
    min_knots = std::min(min_knots, static_cast<double>(path_row.knots));
    path_ms += path_row.wall_ms;
    apgd_ms += result.timings[s * per_seed + 2].wall_ms;
    margin += dominance_margin(path_curve, apgd5_curve, compared);
  }
  const double n = static_cast<double>(spec.n_seeds);
  const double mean_margin = compared > 0 ? margin / static_cast<double>(compared) : 0.0;
  const bool ok = min_knots >= 20 && mean_margin >= 0.0 && path_ms < apgd_ms;
  return {ok, fmt("knots mean %.1f min %.0f (>= 20); path precision minus 5-iteration oracle precision at equal "
                  "recall, mean over %ld points %.3f (>= 0); wall time path %.1f ms vs converged 50-lambda sweep "
                  "%.1f ms per seed",
                  knots / n, min_knots, static_cast<long>(compared), mean_margin, path_ms / n, apgd_ms / n)};
}

Outcome symmetry_and_support() {
  std::vector<double> recalls;
  for (int s = 0; s < 20; ++s) {
    const Instance inst = make_instance(30, 10, {5000}, derive_seed(kMaster, 1000 + static_cast<std::uint64_t>(s)));
    const auto path = audited_path(inst, 40);
    recalls.push_back(pr_point(upper_support(path.knots.back().delta), inst.truth, 0.0).recall);
  }
  const double r = mean(recalls);
  return {audit.worst_asymmetry <= 1e-10 && r >= 0.6,
          fmt("max asymmetry over %ld paths %.2e (tol 1e-10); mean recall at a 40-entry budget %.3f (>= 0.6)",
              static_cast<long>(audit.paths), audit.worst_asymmetry, r)};
}

}  // namespace

int main() {
  const std::vector<Instance> instances = kkt_instances();
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"KKT exactness", [&] { return kkt_exactness(instances); }},
      {"oracle equivalence", oracle_equivalence},
      {"first-knot law", first_knot_law},
      {"piecewise linearity", [&] { return piecewise_linearity(instances); }},
      {"Kendall correctness", kendall_correctness},
      {"concentration bound", lemma_concentration},
      {"transform invariance", transform_invariance},
      {"heterogeneous integration", heterogeneous_integration},
      {"path versus proximal oracle", path_vs_oracle},
      {"symmetry and support", symmetry_and_support},
  };
  // The first-knot law is judged over every path computed here, so it runs last.
  std::vector<Outcome> outcomes(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (i != 2) outcomes[i] = criteria[i].second();
  }
  outcomes[2] = criteria[2].second();

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::printf("[%s] %zu %s: %s\n", outcomes[i].pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcomes[i].detail.c_str());
    failed += !outcomes[i].pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
