#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmi/datasets.hpp"

using cmi::GaussianPairFamily;
using cmi::Mat2;

TEST(AnalyticMi, DefaultFamily) {
  EXPECT_NEAR(cmi::analytic_gaussian_mi(GaussianPairFamily{}), 0.020410997260127583, 1e-12);
  EXPECT_NEAR(cmi::analytic_gaussian_mi(GaussianPairFamily{}), 0.02041, 1e-5);
}

TEST(AnalyticMi, DiagonalIsZero) {
  GaussianPairFamily f{{2.0, 0.0, 0.0, 3.0}, {1.0, 0.0, 0.0, 1.0}};
  EXPECT_EQ(cmi::analytic_gaussian_mi(f), 0.0);
}

TEST(AnalyticMi, UnitCorrelationHalf) {
  GaussianPairFamily f{{1.0, 0.5, 0.5, 1.0}, {0.0, 0.0, 0.0, 0.0}};
  EXPECT_NEAR(cmi::analytic_gaussian_mi(f), 0.14384103622589045, 1e-12);
}

TEST(AnalyticMiProperty, SymmetricUnderSwappingXAndY) {
  cmi::Rng rng(1);
  for (int it = 0; it < 100; ++it) {
    const double a = cmi::uniform_real(rng, 0.5, 3), b = cmi::uniform_real(rng, 0.5, 3);
    const double r = cmi::uniform_real(rng, -0.9, 0.9) * std::sqrt(a * b);
    GaussianPairFamily f{{a, r, r, b}, {1.0, 0.2, 0.2, 0.7}};
    GaussianPairFamily swapped{{b, r, r, a}, {0.7, 0.2, 0.2, 1.0}};
    EXPECT_NEAR(cmi::analytic_gaussian_mi(f), cmi::analytic_gaussian_mi(swapped), 1e-14);
  }
}

TEST(GaussianFamily, RejectsNonPositiveDefinite) {
  GaussianPairFamily bad{{1.0, 2.0, 2.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
  EXPECT_THROW(bad.validate(), std::domain_error);
  GaussianPairFamily asym{{1.0, 0.1, 0.2, 1.0}, {1.0, 0.0, 0.0, 1.0}};
  cmi::Rng rng(0);
  EXPECT_THROW(cmi::sample_gaussian_pairs(asym, 10, rng), std::domain_error);
  EXPECT_THROW(cmi::cholesky(Mat2{-1.0, 0.0, 0.0, 1.0}), std::domain_error);
}

TEST(GaussianSampling, IndependentFamilyHasNoCorrelation) {
  GaussianPairFamily f{{1.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 0.0}};
  cmi::Rng rng(2);
  const std::size_t n = 100000;
  const auto s = cmi::sample_gaussian_pairs(f, n, rng);
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += s.x[i] * s.y[i];
  EXPECT_NEAR(sxy / n, 0.0, 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GaussianSampling, DefaultCovarianceConverges) {
  cmi::Rng rng(3);
  const std::size_t n = 200000;
  const auto s = cmi::sample_gaussian_pairs(GaussianPairFamily{}, n, rng);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += s.x[i] / n;
    my += s.y[i] / n;
  }
  double cxx = 0, cxy = 0, cyy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cxx += (s.x[i] - mx) * (s.x[i] - mx) / (n - 1);
    cxy += (s.x[i] - mx) * (s.y[i] - my) / (n - 1);
    cyy += (s.y[i] - my) * (s.y[i] - my) / (n - 1);
  }
  // Sigma_Z + Sigma_eps = [[2, 0.4], [0.4, 2]].
  const double tol = 3.0 / std::sqrt(static_cast<double>(n)) * 2.0;
  EXPECT_NEAR(cxx, 2.0, tol);
  EXPECT_NEAR(cxy, 0.4, tol);
  EXPECT_NEAR(cyy, 2.0, tol);
}

TEST(Spirals, BalancedArmsInsideBox) {
  cmi::Rng rng(4);
  const auto s = cmi::make_spirals(1000, rng);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ones += s.labels[i];
    EXPECT_LE(std::abs(s.points.at(i, 0)), 2.0);
    EXPECT_LE(std::abs(s.points.at(i, 1)), 2.0);
  }
  EXPECT_EQ(ones, 500u);
  EXPECT_THROW(cmi::make_spirals(7, rng), std::domain_error);
}

TEST(Spirals, ArmsAreDisjoint) {
  cmi::Rng rng(5);
  const auto s = cmi::make_spirals(2000, rng);
  double min_d = INFINITY;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (s.labels[i] == 0 && s.labels[j] == 1)
        min_d = std::min(min_d, cmi::squared_distance(s.points.row_span(i), s.points.row_span(j)));
  EXPECT_GT(min_d, 0.0);
}

TEST(Spirals, DeterministicPerSeed) {
  cmi::Rng a(6), b(6);
  const auto s1 = cmi::make_spirals(500, a), s2 = cmi::make_spirals(500, b);
  EXPECT_EQ(s1.labels, s2.labels);
  for (std::size_t i = 0; i < s1.points.size(); ++i) EXPECT_EQ(s1.points[i], s2.points[i]);
}

TEST(Blobs, LabelsCycleAndDimensionsMatch) {
  cmi::Rng rng(7);
  const auto b = cmi::make_blobs(30, 3, 5, 4.0, 1.0, rng);
  EXPECT_EQ(b.points.rows(), 30u);
  EXPECT_EQ(b.points.cols(), 5u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(b.labels[i], i % 3);
  EXPECT_THROW(cmi::make_blobs(10, 0, 2, 1.0, 1.0, rng), std::domain_error);
}

TEST(Views, ZeroNoiseIsIdentity) {
  cmi::Rng rng(8);
  const std::vector<double> p{0.3, -1.2};
  EXPECT_EQ(cmi::apply_view({cmi::ViewKind::UniformNoise, 0.0, {}}, p, rng), p);
  EXPECT_EQ(cmi::apply_view({cmi::ViewKind::Identity, 3.0, {}}, p, rng), p);
}

TEST(Views, NoiseOffsetsInRangeWithMeanHalfEta) {
  cmi::Rng rng(9);
  const std::vector<double> p{0.0, 0.0};
  const cmi::ViewFunction v{cmi::ViewKind::UniformNoise, 5.0, {}};
  const std::size_t n = 100000;
  double sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = cmi::apply_view(v, p, rng);
    EXPECT_GE(o[0], 0.0);
    EXPECT_LE(o[0], 5.0);
    EXPECT_GE(o[1], 0.0);
    EXPECT_LE(o[1], 5.0);
    sum0 += o[0];
    sum1 += o[1];
  }
  // U(0, 5) has std 5/sqrt(12); five standard errors.
  const double tol = 5 * 5.0 / std::sqrt(12.0 * n);
  EXPECT_NEAR(sum0 / n, 2.5, tol);
  EXPECT_NEAR(sum1 / n, 2.5, tol);
}

TEST(Views, NegativeEtaRejected) {
  cmi::Rng rng(0);
  EXPECT_THROW(cmi::apply_view({cmi::ViewKind::UniformNoise, -0.1, {}}, std::vector<double>{1.0}, rng),
               std::domain_error);
}

TEST(Views, ChannelAndPermuteKinds) {
  cmi::Rng rng(10);
  const std::vector<double> p{1.0, 2.0, 3.0};
  EXPECT_EQ(cmi::apply_view({cmi::ViewKind::Channel, 0.0, {0, 2}}, p, rng), (std::vector<double>{1.0, 0.0, 3.0}));
  EXPECT_THROW(cmi::apply_view({cmi::ViewKind::Channel, 0.0, {3}}, p, rng), std::out_of_range);
  auto q = cmi::apply_view({cmi::ViewKind::PermuteCoordinates, 0.0, {}}, p, rng);
  std::sort(q.begin(), q.end());
  EXPECT_EQ(q, p);
  EXPECT_THROW(cmi::view_kind_from_string("crop"), cmi::ConfigError);
}

TEST(ViewsProperty, StoredDatasetNeverMutated) {
  cmi::Rng rng(11);
  const auto s = cmi::make_spirals(100, rng);
  const cmi::Tensor before = s.points;
  for (std::size_t i = 0; i < s.size(); ++i)
    cmi::apply_view({cmi::ViewKind::UniformNoise, 2.0, {}}, s.points.row_span(i), rng);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], s.points[i]);
}

TEST(PointsCsv, HeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "cmi_points_test.csv";
  cmi::Rng rng(12);
  const auto s = cmi::make_spirals(4, rng);
  cmi::write_points_csv(path, s.points, s.labels);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,label,c0,c1");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4u);
  std::filesystem::remove(path);
  EXPECT_THROW(cmi::write_points_csv("/nonexistent-dir/x.csv", s.points, s.labels), std::runtime_error);
}
