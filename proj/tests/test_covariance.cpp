#include <doctest.h>

#include <numbers>

#include "diffpath/covariance.hpp"
#include "diffpath/datagen.hpp"
#include "support.hpp"

using namespace diffpath;

namespace {

double brute_force_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  std::int64_t net = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const int sx = (x[i] > x[j]) - (x[i] < x[j]);
      const int sy = (y[i] > y[j]) - (y[i] < y[j]);
      net += sx * sy;
    }
  }
  return 2.0 * static_cast<double>(net) / (static_cast<double>(m) * static_cast<double>(m - 1));
}

std::vector<double> random_vector(Rng& rng, std::size_t m, int levels) {
  std::vector<double> out(m);
  if (levels > 0) {
    std::uniform_int_distribution<int> pick(0, levels - 1);
    for (auto& v : out) v = pick(rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out) v = normal(rng);
  }
  return out;
}

Dataset make_dataset(Eigen::MatrixXd samples, std::string id = "ds") {
  Dataset ds;
  ds.samples = std::move(samples);
  ds.source_id = std::move(id);
  for (Index c = 0; c < ds.samples.cols(); ++c) ds.column_names.push_back("X" + std::to_string(c + 1));
  return ds;
}

}  // namespace

TEST_SUITE("covariance") {
  TEST_CASE("kendall tau on monotone pairs") {
    const std::vector<double> x{1, 2, 3};
    CHECK(kendall_tau_pair(x, std::vector<double>{10, 20, 30}) == 1.0);
    CHECK(kendall_tau_pair(x, std::vector<double>{3, 2, 1}) == -1.0);
  }

  TEST_CASE("kendall tau equals the pair enumeration") {
    Rng rng(7);
    std::uniform_int_distribution<std::size_t> size(2, 60);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t m = trial < 20 ? 7 : size(rng);
      const int levels = trial % 3 == 0 ? 0 : trial % 3 == 1 ? 3 : 8;
      const auto x = random_vector(rng, m, levels);
      const auto y = random_vector(rng, m, trial % 2 == 0 ? levels : 0);
      CHECK(kendall_tau_pair(x, y) == brute_force_tau(x, y));
    }
  }

  TEST_CASE("kendall tau input errors") {
    CHECK_THROWS_AS(kendall_tau_pair(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), DimensionMismatch);
    CHECK_THROWS_AS(kendall_tau_pair(std::vector<double>{1}, std::vector<double>{1}), InsufficientSamples);
  }

  TEST_CASE("tie fraction counts pairs tied in either coordinate") {
    const std::vector<double> x{1, 1, 2, 3};
    const std::vector<double> y{5, 6, 6, 7};
    // tied in x: (0,1); tied in y: (1,2)
    CHECK(kendall_tau_detail(x, y).tie_fraction == doctest::Approx(2.0 / 6.0));
  }

  TEST_CASE("tau matrix") {
    const Dataset one = make_dataset(Eigen::MatrixXd::Random(10, 1));
    CHECK(tau_matrix(one).entries == Eigen::MatrixXd::Ones(1, 1));

    Eigen::MatrixXd dup = Eigen::MatrixXd::Random(30, 3);
    dup.col(2) = dup.col(0);
    const TauMatrix t = tau_matrix(make_dataset(dup));
    CHECK(t.entries(0, 2) == 1.0);
    CHECK(t.entries(2, 0) == 1.0);

    Rng rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd small(6, 3);
    for (Index i = 0; i < small.size(); ++i) small.data()[i] = normal(rng);
    const TauMatrix ts = tau_matrix(make_dataset(small));
    for (Index k = 0; k < 3; ++k) {
      for (Index l = 0; l < 3; ++l) {
        const std::vector<double> a(small.col(k).data(), small.col(k).data() + 6);
        const std::vector<double> b(small.col(l).data(), small.col(l).data() + 6);
        CHECK(ts.entries(k, l) == brute_force_tau(a, b));
      }
    }
  }

  TEST_CASE("combined tau weights by sample size") {
    TauMatrix a{Eigen::MatrixXd::Identity(3, 3), 0.0};
    TauMatrix b{Eigen::MatrixXd::Constant(3, 3, 0.4), 0.0};
    b.entries.diagonal().setOnes();
    const std::vector<TauMatrix> taus{a, b};
    const std::vector<Index> sizes{100, 300};
    const TauMatrix c = combine_taus(taus, sizes);
    CHECK(c.entries(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(c.entries(1, 1) == 1.0);

    const Dataset ds = make_dataset(Eigen::MatrixXd::Random(25, 4));
    const DatasetCollection single({ds});
    CHECK(weighted_tau(single).entries == tau_matrix(ds).entries);
    const DatasetCollection twice({ds, ds});
    CHECK((weighted_tau(twice).entries - tau_matrix(ds).entries).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("sine transform") {
    TauMatrix t{Eigen::MatrixXd::Identity(3, 3), 0.0};
    t.entries(0, 1) = t.entries(1, 0) = 1.0;
    t.entries(0, 2) = t.entries(2, 0) = 1.0 / 3.0;
    const auto c = tau_to_correlation(t);
    CHECK(c(0, 1) == doctest::Approx(1.0));
    CHECK(c(0, 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c(1, 2) == 0.0);
    CHECK(c(2, 2) == 1.0);
  }

  TEST_CASE("psd projection") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    CHECK(project_psd(id, 1e-8).matrix() == id);

    Eigen::Matrix2d bad;
    bad << 1.0, 1.2, 1.2, 1.0;
    const auto fixed = project_psd(bad, 0.0);
    CHECK(fixed(0, 0) == 1.0);
    CHECK(fixed(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(fixed.min_eigenvalue() >= -1e-10);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto c = testing::random_correlation(6, seed);
      CHECK((project_psd(c.matrix(), 1e-8).matrix() - c.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("psd projection of an indefinite matrix has unit diagonal and no negative eigenvalues") {
    Eigen::Matrix3d m;
    m << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    REQUIRE(min_eigenvalue(Eigen::MatrixXd(m)) < 0.0);
    const auto out = project_psd(m, 1e-4);
    CHECK(out.matrix().diagonal() == Eigen::Vector3d::Ones());
    CHECK(out.min_eigenvalue() > 0.0);
    CHECK_THROWS_AS(project_psd(m, -1.0), std::invalid_argument);
  }

  TEST_CASE("independent coordinates estimate near zero") {
    const auto id = CorrelationMatrix<double>::identity(4);
    const auto ds = sample_npn(id, TransformSet(4, Transform::Shift2), 5000, 99, "ind");
    const auto est = estimate_correlation(DatasetCollection({ds}), 1e-8);
    Eigen::MatrixXd off = est.correlation.matrix();
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() < 0.1);
    CHECK(est.correlation.matrix().diagonal() == Eigen::Vector4d::Ones());
  }

  TEST_CASE("heterogeneous transforms leave the estimate unchanged") {
    const auto sigma = testing::random_correlation(5, 4, 8);
    const Eigen::MatrixXd z = sample_gaussian(sigma, 400, 17);
    Dataset doubled = make_dataset(2.0 * z, "doubled");
    Dataset cubed = make_dataset(z.array().cube().matrix(), "cubed");
    Dataset raw = make_dataset(z, "raw");
    const auto het = estimate_correlation(DatasetCollection({doubled, cubed}), 1e-8);
    const auto hom = estimate_correlation(DatasetCollection({raw, raw}), 1e-8);
    CHECK((het.correlation.matrix() - hom.correlation.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("collection validation") {
    CHECK_THROWS_AS(DatasetCollection({make_dataset(Eigen::MatrixXd::Random(1, 3))}), InsufficientSamples);
    CHECK_THROWS_AS(DatasetCollection({make_dataset(Eigen::MatrixXd::Random(5, 3)),
                                       make_dataset(Eigen::MatrixXd::Random(5, 4))}),
                    DimensionMismatch);
    Eigen::MatrixXd nan = Eigen::MatrixXd::Random(5, 2);
    nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DatasetCollection({make_dataset(nan)}), std::invalid_argument);
  }
}
