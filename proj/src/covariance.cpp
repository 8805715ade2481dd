#include "diffpath/covariance.hpp"

#include <cstdint>
#include <numbers>
#include <numeric>

namespace diffpath {

void validate(const Dataset& ds) {
  if (ds.size() < 2) {
    throw InsufficientSamples("dataset '" + ds.source_id + "' has fewer than 2 samples");
  }
  if (ds.dim() < 1) {
    throw std::invalid_argument("dataset '" + ds.source_id + "' has no columns");
  }
  if (!ds.samples.allFinite()) {
    throw std::invalid_argument("dataset '" + ds.source_id + "' contains non-finite values");
  }
}

DatasetCollection::DatasetCollection(std::vector<Dataset> datasets) : datasets_(std::move(datasets)) {
  if (datasets_.empty()) {
    throw std::invalid_argument("DatasetCollection: no datasets");
  }
  const Index d = datasets_.front().dim();
  for (const auto& ds : datasets_) {
    validate(ds);
    if (ds.dim() != d) {
      throw DimensionMismatch("DatasetCollection: dataset '" + ds.source_id + "' has " +
                              std::to_string(ds.dim()) + " columns, expected " + std::to_string(d));
    }
    total_m_ += ds.size();
  }
}

namespace {

// Number of pairs i < j with y[i] > y[j]; sorts y in place.
std::int64_t count_inversions(std::vector<double>& y, std::vector<double>& buffer) {
  const std::size_t n = y.size();
  std::int64_t swaps = 0;
  buffer.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (y[j] < y[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buffer[k++] = y[j++];
        } else {
          buffer[k++] = y[i++];
        }
      }
      while (i < mid) buffer[k++] = y[i++];
      while (j < hi) buffer[k++] = y[j++];
    }
    std::swap(y, buffer);
  }
  return swaps;
}

template <typename Equal>
std::int64_t tied_pairs(std::size_t n, Equal equal) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += static_cast<std::int64_t>(run) * static_cast<std::int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

KendallResult kendall_tau_detail(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("kendall_tau_pair: vectors differ in length");
  }
  const std::size_t m = x.size();
  if (m < 2) {
    throw InsufficientSamples("kendall_tau_pair: need at least 2 samples");
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  const std::int64_t n0 = static_cast<std::int64_t>(m) * static_cast<std::int64_t>(m - 1) / 2;
  const std::int64_t tied_x = tied_pairs(m, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::int64_t tied_xy = tied_pairs(
      m, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });

  std::vector<double> buffer;
  const std::int64_t swaps = count_inversions(ys, buffer);
  const std::int64_t tied_y = tied_pairs(m, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  // concordant - discordant
  const std::int64_t net = n0 - tied_x - tied_y + tied_xy - 2 * swaps;

  KendallResult out;
  out.tau = 2.0 * static_cast<double>(net) / (static_cast<double>(m) * static_cast<double>(m - 1));
  out.tie_fraction = static_cast<double>(tied_x + tied_y - tied_xy) / static_cast<double>(n0);
  return out;
}

double kendall_tau_pair(std::span<const double> x, std::span<const double> y) {
  return kendall_tau_detail(x, y).tau;
}

TauMatrix tau_matrix(const Dataset& ds) {
  validate(ds);
  const Index d = ds.dim();
  TauMatrix out;
  out.entries = Eigen::MatrixXd::Identity(d, d);
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) {
    const auto col = ds.samples.col(k);
    columns[static_cast<std::size_t>(k)].assign(col.data(), col.data() + col.size());
  }
  for (Index l = 0; l < d; ++l) {
    for (Index k = 0; k < l; ++k) {
      const KendallResult r = kendall_tau_detail(columns[static_cast<std::size_t>(k)],
                                                 columns[static_cast<std::size_t>(l)]);
      out.entries(k, l) = r.tau;
      out.entries(l, k) = r.tau;
      out.max_tie_fraction = std::max(out.max_tie_fraction, r.tie_fraction);
    }
  }
  return out;
}

TauMatrix combine_taus(std::span<const TauMatrix> taus, std::span<const Index> sizes) {
  if (taus.empty() || taus.size() != sizes.size()) {
    throw std::invalid_argument("combine_taus: need one size per tau matrix");
  }
  const Index d = taus.front().entries.rows();
  double total = 0.0;
  for (std::size_t s = 0; s < taus.size(); ++s) {
    if (taus[s].entries.rows() != d || taus[s].entries.cols() != d) {
      throw DimensionMismatch("combine_taus: tau matrices differ in dimension");
    }
    total += static_cast<double>(sizes[s]);
  }
  TauMatrix out;
  out.entries = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < taus.size(); ++s) {
    out.entries += (static_cast<double>(sizes[s]) / total) * taus[s].entries;
    out.max_tie_fraction = std::max(out.max_tie_fraction, taus[s].max_tie_fraction);
  }
  out.entries.diagonal().setOnes();
  return out;
}

TauMatrix weighted_tau(const DatasetCollection& coll) {
  if (coll.count() == 0) {
    throw std::invalid_argument("weighted_tau: empty collection");
  }
  std::vector<TauMatrix> taus;
  std::vector<Index> sizes;
  for (const auto& ds : coll.datasets()) {
    taus.push_back(tau_matrix(ds));
    sizes.push_back(ds.size());
  }
  return combine_taus(taus, sizes);
}

CorrelationMatrix<double> tau_to_correlation(const TauMatrix& tau) {
  const Index d = tau.entries.rows();
  Eigen::MatrixXd out(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      out(i, j) = i == j ? 1.0 : std::sin(std::numbers::pi / 2.0 * tau.entries(i, j));
    }
  }
  return CorrelationMatrix<double>(out);
}

CorrelationEstimate estimate_correlation(const DatasetCollection& coll, double mu) {
  CorrelationEstimate out;
  out.tau = weighted_tau(coll);
  out.pre_projection = tau_to_correlation(out.tau);
  out.correlation = project_psd(out.pre_projection.matrix(), mu);
  out.mu = mu;
  return out;
}

}  // namespace diffpath
