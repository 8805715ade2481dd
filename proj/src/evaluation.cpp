#include "diffpath/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "diffpath/random.hpp"
#include "diffpath/reference_solver.hpp"

namespace diffpath {

EdgeSet upper_support(const Eigen::SparseMatrix<double>& delta) {
  EdgeSet out;
  for (int col = 0; col < delta.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(delta, col); it; ++it) {
      if (it.row() < it.col() && it.value() != 0.0) out.insert({it.row(), it.col()});
    }
  }
  return out;
}

EdgeSet upper_support(const Eigen::MatrixXd& delta) {
  EdgeSet out;
  for (Index j = 1; j < delta.cols(); ++j) {
    for (Index i = 0; i < j; ++i) {
      if (delta(i, j) != 0.0) out.insert({i, j});
    }
  }
  return out;
}

PRPoint pr_point(const EdgeSet& selected, const EdgeSet& truth, double lambda) {
  if (truth.empty()) throw std::invalid_argument("pr_point: ground truth is empty");
  PRPoint p;
  p.lambda = lambda;
  p.n_selected = static_cast<Index>(selected.size());
  for (const auto& e : selected) p.true_positives += truth.count(e) > 0 ? 1 : 0;
  p.precision = p.n_selected == 0 ? 1.0 : static_cast<double>(p.true_positives) / static_cast<double>(p.n_selected);
  p.recall = static_cast<double>(p.true_positives) / static_cast<double>(truth.size());
  return p;
}

PRCurve precision_recall(const SolutionPath<double>& path, const EdgeSet& truth) {
  if (truth.empty()) throw std::invalid_argument("precision_recall: ground truth is empty");
  PRCurve curve;
  curve.ground_truth_size = static_cast<Index>(truth.size());
  for (const auto& knot : path.knots) curve.points.push_back(pr_point(upper_support(knot.delta), truth, knot.lambda));
  return curve;
}

PRCurve grid_precision_recall(const std::vector<Eigen::MatrixXd>& solutions, const std::vector<double>& grid,
                              const EdgeSet& truth) {
  if (solutions.size() != grid.size()) throw std::invalid_argument("grid_precision_recall: size mismatch");
  PRCurve curve;
  curve.ground_truth_size = static_cast<Index>(truth.size());
  for (std::size_t g = 0; g < grid.size(); ++g) curve.points.push_back(pr_point(upper_support(solutions[g]), truth, grid[g]));
  return curve;
}

double interpolated_precision(const PRCurve& curve, double recall) {
  double best = 0.0;
  for (const auto& p : curve.points) {
    if (p.recall >= recall) best = std::max(best, p.precision);
  }
  return best;
}

double pr_area(const PRCurve& curve) {
  std::vector<double> levels{0.0};
  for (const auto& p : curve.points) levels.push_back(p.recall);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double area = 0.0;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    area += (levels[k] - levels[k - 1]) * interpolated_precision(curve, levels[k]);
  }
  return area;
}

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 4) throw std::invalid_argument("grid must look like a:b:n:log|lin, got '" + text + "'");
  GridSpec spec;
  try {
    spec.lo = std::stod(parts[0]);
    spec.hi = std::stod(parts[1]);
    spec.n = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid has a non-numeric field: '" + text + "'");
  }
  if (parts[3] == "log") {
    spec.log_spaced = true;
  } else if (parts[3] == "lin") {
    spec.log_spaced = false;
  } else {
    throw std::invalid_argument("grid spacing must be 'log' or 'lin', got '" + parts[3] + "'");
  }
  if (spec.lo > spec.hi) std::swap(spec.lo, spec.hi);
  if (spec.n < 1 || !(spec.lo > 0.0) || !std::isfinite(spec.hi)) {
    throw std::invalid_argument("grid needs n >= 1 and 0 < a <= b");
  }
  return spec;
}

std::vector<double> make_grid(const GridSpec& spec) {
  std::vector<double> out;
  if (spec.n == 1) return {spec.hi};
  for (Index k = 0; k < spec.n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(spec.n - 1);
    out.push_back(spec.log_spaced ? std::exp(std::log(spec.hi) + t * (std::log(spec.lo) - std::log(spec.hi)))
                                  : spec.hi + t * (spec.lo - spec.hi));
  }
  out.front() = spec.hi;
  out.back() = spec.lo;
  return out;
}

DatasetCollection subsample(const DatasetCollection& coll, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("subsample: fraction must be in (0, 1]");
  std::vector<Dataset> out;
  for (std::size_t s = 0; s < coll.count(); ++s) {
    const Dataset& ds = coll.datasets()[s];
    const Index keep = static_cast<Index>(std::ceil(fraction * static_cast<double>(ds.size()) - 1e-9));
    if (keep < 2) throw InsufficientSamples("subsample: dataset '" + ds.source_id + "' too small to subsample");
    std::vector<Index> rows(static_cast<std::size_t>(ds.size()));
    for (Index r = 0; r < ds.size(); ++r) rows[static_cast<std::size_t>(r)] = r;
    Rng rng(derive_seed(seed, s));
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(keep));
    std::sort(rows.begin(), rows.end());
    Dataset sub;
    sub.samples = ds.samples(rows, Eigen::all);
    sub.source_id = ds.source_id;
    sub.column_names = ds.column_names;
    out.push_back(std::move(sub));
  }
  return DatasetCollection(std::move(out));
}

StabilityProfile stability_profile(const std::vector<double>& grid,
                                   const std::vector<std::vector<EdgeSet>>& selections,
                                   const std::vector<std::vector<bool>>& covered, Index d, double threshold) {
  StabilityProfile profile;
  profile.lambdas = grid;
  profile.threshold = threshold;
  const double pairs = static_cast<double>(d) * static_cast<double>(d - 1) / 2.0;
  const double repeats = static_cast<double>(selections.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    bool all_covered = !selections.empty();
    std::map<Edge, Index> counts;  // ordered, so the sum below is deterministic
    for (std::size_t r = 0; r < selections.size(); ++r) {
      all_covered = all_covered && covered[r][g];
      for (const auto& e : selections[r][g]) ++counts[e];
    }
    double total = 0.0;
    for (const auto& [edge, count] : counts) total += edge_instability(static_cast<double>(count) / repeats);
    profile.covered.push_back(all_covered);
    profile.instability.push_back(pairs > 0 ? total / pairs : 0.0);
  }
  return profile;
}

StarsResult stars_select(const DatasetCollection& group_a, const DatasetCollection& group_b,
                         const StarsOptions& options) {
  if (group_a.dim() != group_b.dim()) {
    throw DimensionMismatch("stars_select: groups have " + std::to_string(group_a.dim()) + " and " +
                            std::to_string(group_b.dim()) + " variables");
  }
  if (options.repeats < 1) throw std::invalid_argument("stars_select: repeats must be >= 1");
  const Index d = group_a.dim();

  StarsResult result;
  const auto sigma = estimate_correlation(group_a, options.mu).correlation;
  const auto sigma_prime = estimate_correlation(group_b, options.mu).correlation;
  result.full_path = compute_path(sigma, sigma_prime, options.c);

  std::vector<double> grid = options.lambda_grid;
  if (grid.empty()) {
    const double hi = std::max(result.full_path.first_lambda(), 1e-12);
    const double lo = std::max(result.full_path.last_lambda(), hi * 1e-3);
    grid = make_grid(GridSpec{lo, hi, 50, true});
  }
  std::sort(grid.begin(), grid.end(), std::greater<>());
  if (grid.empty()) throw std::invalid_argument("stars_select: empty lambda grid");

  const auto n_repeats = static_cast<std::size_t>(options.repeats);
  std::vector<std::vector<EdgeSet>> selections(n_repeats, std::vector<EdgeSet>(grid.size()));
  std::vector<std::vector<bool>> covered(n_repeats, std::vector<bool>(grid.size(), false));
  parallel_for(options.repeats, options.threads, [&](Index r) {
    const auto ur = static_cast<std::uint64_t>(r);
    const auto sub_a = subsample(group_a, options.fraction, derive_seed(options.seed, 2 * ur));
    const auto sub_b = subsample(group_b, options.fraction, derive_seed(options.seed, 2 * ur + 1));
    const auto path = compute_path(estimate_correlation(sub_a, options.mu).correlation,
                                   estimate_correlation(sub_b, options.mu).correlation, options.c);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (grid[g] < path.last_lambda()) continue;
      covered[static_cast<std::size_t>(r)][g] = true;
      selections[static_cast<std::size_t>(r)][g] = upper_support(interpolate(path, grid[g]));
    }
  });

  result.profile = stability_profile(grid, selections, covered, d, options.threshold);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g] < result.full_path.last_lambda()) result.profile.covered[g] = false;
  }

  double running = 0.0;
  std::optional<double> chosen;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!result.profile.covered[g]) break;
    running = std::max(running, result.profile.instability[g]);
    if (running > options.threshold) break;
    chosen = grid[g];
  }
  if (!chosen) {
    throw NoStableLambda("stars_select: no grid value has instability <= " + std::to_string(options.threshold),
                         result.profile);
  }
  result.chosen_lambda = *chosen;
  result.profile.chosen_lambda = *chosen;
  result.delta_hat = interpolate(result.full_path, *chosen);
  return result;
}

bool is_known_method(const std::string& method) {
  return method == "path" || method == "apgd5" || method == "apgd";
}

BenchResult timing_benchmark(const BenchSpec& spec) {
  for (const auto& m : spec.methods) {
    if (!is_known_method(m)) throw std::invalid_argument("timing_benchmark: unknown method '" + m + "'");
  }
  if (spec.d < 3 || spec.m < 2 || spec.n_seeds < 1 || spec.c < 1) {
    throw std::invalid_argument("timing_benchmark: need d >= 3, m >= 2, n_seeds >= 1, c >= 1");
  }
  const std::vector<double> grid = spec.lambda_grid.empty() ? make_grid(GridSpec{}) : spec.lambda_grid;

  std::vector<BenchResult> per_seed(static_cast<std::size_t>(spec.n_seeds));
  for (Index s = 0; s < spec.n_seeds; ++s) {
    const std::uint64_t seed = derive_seed(spec.seed, static_cast<std::uint64_t>(s));
    SimulationConfig config;
    config.d = spec.d;
    config.k_delete = spec.k_changes / 2;
    config.k_insert = spec.k_changes - spec.k_changes / 2;
    config.sizes_a = {spec.m};
    config.sizes_b = {spec.m};
    const SyntheticInstance inst = simulate(config, seed);
    const auto sigma = estimate_correlation(inst.group_a, 1e-8).correlation;
    const auto sigma_prime = estimate_correlation(inst.group_b, 1e-8).correlation;
    const EdgeSet& truth = inst.precision.true_delta_support;

    BenchResult& out = per_seed[static_cast<std::size_t>(s)];
    for (const auto& method : spec.methods) {
      TimingRow row{method, spec.d, spec.m, seed, 0.0, 0};
      const auto start = std::chrono::steady_clock::now();
      PRCurve curve;
      if (method == "path") {
        const auto path = compute_path(sigma, sigma_prime, spec.c);
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        row.knots = static_cast<Index>(path.knots.size());
        curve = precision_recall(path, truth);
      } else {
        ProximalOptions<double> opts;
        opts.accelerate = true;
        if (method == "apgd5") {
          opts.max_iter = 5;
          opts.tol = 0.0;
        } else {
          opts.max_iter = 20000;
          opts.tol = 1e-8;
        }
        std::vector<Eigen::MatrixXd> solutions;
        for (const double lambda : grid) {
          solutions.push_back(proximal_gradient_solve(sigma, sigma_prime, lambda, opts).delta);
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        row.knots = static_cast<Index>(grid.size());
        curve = grid_precision_recall(solutions, grid, truth);
      }
      out.timings.push_back(row);
      out.curves.push_back(std::move(curve));
    }
  }

  BenchResult merged;
  for (auto& r : per_seed) {
    merged.timings.insert(merged.timings.end(), r.timings.begin(), r.timings.end());
    merged.curves.insert(merged.curves.end(), r.curves.begin(), r.curves.end());
  }
  return merged;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream out;
  out << "method,d,m,seed,wall_ms,knots\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.d << ',' << r.m << ',' << r.seed << ',' << fmt(r.wall_ms) << ',' << r.knots << '\n';
  }
  return out.str();
}

std::string pr_curve_csv(const PRCurve& curve) {
  std::ostringstream out;
  out << "lambda,precision,recall,n_selected\n";
  for (const auto& p : curve.points) {
    out << fmt(p.lambda) << ',' << fmt(p.precision) << ',' << fmt(p.recall) << ',' << p.n_selected << '\n';
  }
  return out.str();
}

std::string stability_csv(const StabilityProfile& profile) {
  std::ostringstream out;
  out << "lambda,instability,covered\n";
  for (std::size_t g = 0; g < profile.lambdas.size(); ++g) {
    out << fmt(profile.lambdas[g]) << ',' << fmt(profile.instability[g]) << ',' << (profile.covered[g] ? 1 : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace diffpath
