#include "diffpath/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffpath/random.hpp"

namespace diffpath {

std::vector<Index> GraphStructure::degrees() const {
  std::vector<Index> deg(static_cast<std::size_t>(d), 0);
  for (const auto& [i, j] : edges) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return deg;
}

GraphStructure scale_free_graph(Index d, Index attach_m, std::uint64_t seed) {
  if (d < 3) throw std::invalid_argument("scale_free_graph: d must be at least 3");
  if (attach_m < 1 || attach_m >= d) {
    throw std::invalid_argument("scale_free_graph: attach_m must lie in [1, d)");
  }
  Rng rng(seed);
  GraphStructure g;
  g.d = d;
  // Each node appears once per incident edge.
  std::vector<Index> endpoints;
  for (Index i = 0; i < attach_m; ++i) {
    g.edges.insert(make_edge(i, attach_m));
    endpoints.push_back(i);
    endpoints.push_back(attach_m);
  }
  for (Index node = attach_m + 1; node < d; ++node) {
    std::set<Index> targets;
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    while (static_cast<Index>(targets.size()) < attach_m) targets.insert(endpoints[pick(rng)]);
    for (const Index t : targets) {
      g.edges.insert(make_edge(t, node));
      endpoints.push_back(t);
      endpoints.push_back(node);
    }
  }
  return g;
}

GraphStructure perturb_graph(const GraphStructure& g, Index k_delete, Index k_insert, std::uint64_t seed) {
  if (k_delete < 0 || k_insert < 0) throw InfeasiblePerturbation("perturb_graph: negative change count");
  const Index possible = g.d * (g.d - 1) / 2;
  const Index present = static_cast<Index>(g.edges.size());
  if (k_delete > present) {
    throw InfeasiblePerturbation("perturb_graph: cannot delete " + std::to_string(k_delete) + " of " +
                                 std::to_string(present) + " edges");
  }
  if (k_insert > possible - present) {
    throw InfeasiblePerturbation("perturb_graph: not enough absent edges to insert " + std::to_string(k_insert));
  }
  Rng rng(seed);
  std::vector<Edge> existing(g.edges.begin(), g.edges.end());
  std::shuffle(existing.begin(), existing.end(), rng);
  std::vector<Edge> absent;
  absent.reserve(static_cast<std::size_t>(possible - present));
  for (Index j = 1; j < g.d; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (!g.has_edge(i, j)) absent.emplace_back(i, j);
    }
  }
  std::shuffle(absent.begin(), absent.end(), rng);

  GraphStructure out = g;
  for (Index k = 0; k < k_delete; ++k) out.edges.erase(existing[static_cast<std::size_t>(k)]);
  for (Index k = 0; k < k_insert; ++k) out.edges.insert(absent[static_cast<std::size_t>(k)]);
  return out;
}

GraphStructure perturb_graph(const GraphStructure& g, Index k, std::uint64_t seed) {
  if (k < 0 || k % 2 != 0) throw InfeasiblePerturbation("perturb_graph: k must be a non-negative even number");
  return perturb_graph(g, k / 2, k / 2, seed);
}

PrecisionPair build_precision_pair(const GraphStructure& g, const GraphStructure& g_prime, double gamma_margin,
                                   std::uint64_t seed) {
  if (g.d != g_prime.d) throw DimensionMismatch("build_precision_pair: graphs differ in d");
  if (!(gamma_margin > 0.0)) throw std::invalid_argument("build_precision_pair: gamma_margin must be > 0");
  const Index d = g.d;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw_weight = [&] {
    const double v = normal(rng);
    return (v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0) + v;
  };

  EdgeSet all = g.edges;
  all.insert(g_prime.edges.begin(), g_prime.edges.end());

  PrecisionPair out;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd w_prime = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [i, j] : all) {
    const double weight = draw_weight();
    const bool in_a = g.edges.count({i, j}) > 0;
    const bool in_b = g_prime.edges.count({i, j}) > 0;
    if (in_a) w(i, j) = w(j, i) = weight;
    if (in_b) w_prime(i, j) = w_prime(j, i) = weight;
    if (in_a != in_b) out.true_delta_support.insert({i, j});
  }
  const double lowest = std::min(min_eigenvalue(w), min_eigenvalue(w_prime));
  out.gamma = std::max(0.0, -lowest) + gamma_margin;
  const Eigen::MatrixXd boost = (1.0 + out.gamma) * Eigen::MatrixXd::Identity(d, d);
  out.omega = w + boost;
  out.omega_prime = w_prime + boost;
  return out;
}

CorrelationMatrix<double> precision_to_correlation(const Eigen::MatrixXd& omega) {
  if (omega.rows() != omega.cols()) throw DimensionMismatch("precision_to_correlation: not square");
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("precision_to_correlation: matrix is not positive definite");
  }
  Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(omega.rows(), omega.cols()));
  const Eigen::VectorXd inv_sqrt = sigma.diagonal().cwiseSqrt().cwiseInverse();
  sigma = (inv_sqrt.asDiagonal() * sigma * inv_sqrt.asDiagonal()).eval();
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  sigma.diagonal().setOnes();
  return CorrelationMatrix<double>(sigma);
}

const char* to_string(Transform t) noexcept {
  switch (t) {
    case Transform::Shift2:
      return "shift2";
    case Transform::Scale2:
      return "scale2";
    case Transform::Exp2:
      return "exp2";
    case Transform::Cube:
      return "cube";
    case Transform::Cbrt:
      return "cbrt";
  }
  return "unknown";
}

Transform transform_from_string(const std::string& s) {
  for (const auto t : {Transform::Shift2, Transform::Scale2, Transform::Exp2, Transform::Cube, Transform::Cbrt}) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown transform '" + s + "'");
}

double apply_forward(Transform t, double x) {
  switch (t) {
    case Transform::Shift2:
      return 2.0 + x;
    case Transform::Scale2:
      return 2.0 * x;
    case Transform::Exp2:
      return std::exp2(x);
    case Transform::Cube:
      return x * x * x;
    case Transform::Cbrt:
      return std::cbrt(x);
  }
  return x;
}

double observe(Transform t, double z) {
  switch (t) {
    case Transform::Shift2:
      return z - 2.0;
    case Transform::Scale2:
      return z / 2.0;
    case Transform::Exp2:
      return std::exp2(z);
    case Transform::Cube:
      return std::cbrt(z);
    case Transform::Cbrt:
      return z * z * z;
  }
  return z;
}

TransformSet random_transforms(Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, 4);
  TransformSet out(static_cast<std::size_t>(d));
  for (auto& t : out) t = static_cast<Transform>(pick(rng));
  return out;
}

Eigen::MatrixXd sample_gaussian(const CorrelationMatrix<double>& sigma, Index m, std::uint64_t seed) {
  const Index d = sigma.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix());
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(m, d);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < d; ++c) g(r, c) = normal(rng);
  }
  return g * factor;  // factor is symmetric
}

Dataset sample_npn(const CorrelationMatrix<double>& sigma, const TransformSet& transforms, Index m,
                   std::uint64_t seed, std::string source_id) {
  if (static_cast<Index>(transforms.size()) != sigma.dim()) {
    throw DimensionMismatch("sample_npn: need one transform per coordinate");
  }
  if (m < 2) throw InsufficientSamples("sample_npn: m must be at least 2");
  Dataset out;
  out.samples = sample_gaussian(sigma, m, seed);
  for (Index c = 0; c < out.samples.cols(); ++c) {
    const Transform t = transforms[static_cast<std::size_t>(c)];
    out.samples.col(c) = out.samples.col(c).unaryExpr([t](double z) { return observe(t, z); });
  }
  out.source_id = std::move(source_id);
  for (Index c = 0; c < sigma.dim(); ++c) out.column_names.push_back("X" + std::to_string(c + 1));
  return out;
}

SyntheticInstance simulate(const SimulationConfig& config, std::uint64_t seed) {
  SyntheticInstance out;
  out.graph = scale_free_graph(config.d, config.attach_m, derive_seed(seed, 0));
  out.graph_prime = perturb_graph(out.graph, config.k_delete, config.k_insert, derive_seed(seed, 1));
  out.precision = build_precision_pair(out.graph, out.graph_prime, config.gamma_margin, derive_seed(seed, 2));
  out.sigma = precision_to_correlation(out.precision.omega);
  out.sigma_prime = precision_to_correlation(out.precision.omega_prime);

  const auto make_group = [&](const CorrelationMatrix<double>& sigma, const std::vector<Index>& sizes,
                              std::uint64_t stream, const std::string& label, std::vector<TransformSet>& transforms) {
    std::vector<Dataset> datasets;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const std::uint64_t base = derive_seed(seed, stream + 2 * s);
      transforms.push_back(random_transforms(config.d, derive_seed(base, 0)));
      datasets.push_back(sample_npn(sigma, transforms.back(), sizes[s], derive_seed(base, 1),
                                    label + "_" + std::to_string(s + 1)));
    }
    return DatasetCollection(std::move(datasets));
  };
  out.group_a = make_group(out.sigma, config.sizes_a, 100, "group_a", out.transforms_a);
  out.group_b = make_group(out.sigma_prime, config.sizes_b, 1000, "group_b", out.transforms_b);
  return out;
}

}  // namespace diffpath
