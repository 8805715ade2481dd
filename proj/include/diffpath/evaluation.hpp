#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffpath/covariance.hpp"
#include "diffpath/datagen.hpp"
#include "diffpath/parallel.hpp"
#include "diffpath/path_solver.hpp"

namespace diffpath {

// Upper-triangle (i < j) nonzero pattern.
EdgeSet upper_support(const Eigen::SparseMatrix<double>& delta);
EdgeSet upper_support(const Eigen::MatrixXd& delta);

struct PRPoint {
  double lambda = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  Index n_selected = 0;
  Index true_positives = 0;
};

struct PRCurve {
  std::vector<PRPoint> points;
  Index ground_truth_size = 0;
};

// Precision is 1 for an empty selection.
PRPoint pr_point(const EdgeSet& selected, const EdgeSet& truth, double lambda);
// One point per knot.
PRCurve precision_recall(const SolutionPath<double>& path, const EdgeSet& truth);

// max precision over points whose recall is >= r; 0 when none reaches r.
double interpolated_precision(const PRCurve& curve, double recall);
// Area under the interpolated (upper-envelope) precision-recall step curve,
// integrated from recall 0 up to the largest recall reached.
double pr_area(const PRCurve& curve);

struct GridSpec {
  double lo = 0.1;
  double hi = 2.0;
  Index n = 50;
  bool log_spaced = true;
};

// "a:b:n:log" or "a:b:n:lin".
GridSpec parse_grid(const std::string& text);
// Decreasing grid from hi to lo.
std::vector<double> make_grid(const GridSpec& spec);

inline double edge_instability(double theta) { return 2.0 * theta * (1.0 - theta); }

struct StabilityProfile {
  std::vector<double> lambdas;      // decreasing
  std::vector<double> instability;  // mean 2 theta (1 - theta) over i < j
  std::vector<bool> covered;        // every subsample path reaches this lambda
  double chosen_lambda = 0.0;
  double threshold = 0.0;
};

class NoStableLambda : public std::runtime_error {
 public:
  NoStableLambda(const std::string& what, StabilityProfile profile)
      : std::runtime_error(what), profile_(std::move(profile)) {}
  const StabilityProfile& profile() const noexcept { return profile_; }

 private:
  StabilityProfile profile_;
};

struct StarsOptions {
  Index repeats = 10;
  double fraction = 0.8;
  double threshold = 0.001;
  std::vector<double> lambda_grid;  // empty: 50 log-spaced values spanning the full-data path
  Index c = 100;
  double mu = 1e-8;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct StarsResult {
  double chosen_lambda = 0.0;
  Eigen::SparseMatrix<double> delta_hat;
  StabilityProfile profile;
  SolutionPath<double> full_path;
};

// Random subcollection with ceil(fraction * m_s) rows of every dataset, drawn
// without replacement.
DatasetCollection subsample(const DatasetCollection& coll, double fraction, std::uint64_t seed);

// StARS-style choice of lambda: the smallest grid value whose running maximum
// instability (over the grid values above it) stays <= threshold.
StarsResult stars_select(const DatasetCollection& group_a, const DatasetCollection& group_b,
                         const StarsOptions& options);

// Instability per grid value from per-repeat selections (one EdgeSet per
// repeat and grid value; covered[r][g] false when repeat r does not reach
// grid value g).
StabilityProfile stability_profile(const std::vector<double>& grid,
                                   const std::vector<std::vector<EdgeSet>>& selections,
                                   const std::vector<std::vector<bool>>& covered, Index d, double threshold);

struct BenchSpec {
  Index d = 50;
  Index m = 1000;
  Index n_seeds = 3;
  Index c = 100;
  Index k_changes = 20;
  std::vector<double> lambda_grid;  // for the proximal methods
  std::vector<std::string> methods{"path", "apgd5", "apgd"};
  std::uint64_t seed = 0;
};

struct TimingRow {
  std::string method;
  Index d = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  Index knots = 0;  // knots for the path, grid size for proximal methods
};

struct BenchResult {
  std::vector<TimingRow> timings;
  // One curve per (method, seed), same order as timings.
  std::vector<PRCurve> curves;
};

bool is_known_method(const std::string& method);

// "apgd5": 5 accelerated proximal iterations per grid value; "apgd": run to
// a 1e-8 max-norm change; "path": compute_path once.
BenchResult timing_benchmark(const BenchSpec& spec);

// PR curve of fixed-lambda solutions over a grid.
PRCurve grid_precision_recall(const std::vector<Eigen::MatrixXd>& solutions, const std::vector<double>& grid,
                              const EdgeSet& truth);

std::string timing_csv(const std::vector<TimingRow>& rows);
std::string pr_curve_csv(const PRCurve& curve);
std::string stability_csv(const StabilityProfile& profile);

}  // namespace diffpath
