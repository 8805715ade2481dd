#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "diffpath/correlation_matrix.hpp"
#include "diffpath/covariance.hpp"
#include "diffpath/vec_index.hpp"

namespace diffpath {

using Edge = std::pair<Index, Index>;  // i < j
using EdgeSet = std::set<Edge>;

inline Edge make_edge(Index i, Index j) { return i < j ? Edge{i, j} : Edge{j, i}; }

struct GraphStructure {
  Index d = 0;
  EdgeSet edges;

  bool has_edge(Index i, Index j) const { return edges.count(make_edge(i, j)) > 0; }
  std::vector<Index> degrees() const;
};

// Barabasi-Albert preferential attachment: a star on attach_m + 1 nodes, then
// each new node links to attach_m distinct existing nodes chosen with
// probability proportional to degree.
GraphStructure scale_free_graph(Index d, Index attach_m, std::uint64_t seed);

// Deletes k_delete existing edges and inserts k_insert edges absent from g,
// uniformly at random. The symmetric difference has exactly
// k_delete + k_insert edges.
GraphStructure perturb_graph(const GraphStructure& g, Index k_delete, Index k_insert, std::uint64_t seed);
// k total changes, split evenly; k must be even.
GraphStructure perturb_graph(const GraphStructure& g, Index k, std::uint64_t seed);

struct PrecisionPair {
  Eigen::MatrixXd omega;
  Eigen::MatrixXd omega_prime;
  EdgeSet true_delta_support;
  double gamma = 0.0;
};

// Edge weights w = sign(v) + v, v ~ N(0, 1). Shared edges carry the same
// weight in both matrices. Both get the diagonal (1 + gamma) with one common
// gamma = max(0, -lambda_min) + gamma_margin over the two weighted adjacency
// matrices.
PrecisionPair build_precision_pair(const GraphStructure& g, const GraphStructure& g_prime,
                                   double gamma_margin, std::uint64_t seed);

// Omega^{-1} rescaled to unit diagonal.
CorrelationMatrix<double> precision_to_correlation(const Eigen::MatrixXd& omega);

enum class Transform { Shift2, Scale2, Exp2, Cube, Cbrt };
using TransformSet = std::vector<Transform>;

const char* to_string(Transform t) noexcept;
Transform transform_from_string(const std::string& s);

// The monotone marginal f with f(x) Gaussian: 2 + x, 2x, 2^x, x^3, cbrt(x).
double apply_forward(Transform t, double x);
// Observation generated from a Gaussian coordinate z. For every tag except
// Exp2 this is f^{-1}(z). 2^x has no inverse on z <= 0, so Exp2 emits 2^z;
// ranks (and therefore Kendall's tau) are the same for any increasing map.
double observe(Transform t, double z);

TransformSet random_transforms(Index d, std::uint64_t seed);

// m draws of N(0, sigma) through a symmetric square root of sigma.
Eigen::MatrixXd sample_gaussian(const CorrelationMatrix<double>& sigma, Index m, std::uint64_t seed);

// sample_gaussian followed by observe() per coordinate.
Dataset sample_npn(const CorrelationMatrix<double>& sigma, const TransformSet& transforms, Index m,
                   std::uint64_t seed, std::string source_id = "npn");

struct SimulationConfig {
  Index d = 50;
  Index attach_m = 1;
  Index k_delete = 10;
  Index k_insert = 10;
  double gamma_margin = 0.05;
  std::vector<Index> sizes_a{200, 200, 200, 200};
  std::vector<Index> sizes_b{200, 200, 200, 200};
};

struct SyntheticInstance {
  GraphStructure graph;
  GraphStructure graph_prime;
  PrecisionPair precision;
  CorrelationMatrix<double> sigma;
  CorrelationMatrix<double> sigma_prime;
  std::vector<TransformSet> transforms_a;
  std::vector<TransformSet> transforms_b;
  DatasetCollection group_a;
  DatasetCollection group_b;
};

// Full synthetic protocol: scale-free base graph, perturbed copy, precision
// pair, and heterogeneous NPN datasets (one random transform set each).
SyntheticInstance simulate(const SimulationConfig& config, std::uint64_t seed);

}  // namespace diffpath
