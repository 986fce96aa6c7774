#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cmi/bank.hpp"
#include "cmi/checks.hpp"
#include "cmi/datasets.hpp"
#include "cmi/kmeans.hpp"

using cmi::MemoryBank;
using cmi::Tensor;

TEST(MemoryBank, AlphaZeroOverwrites) {
  MemoryBank b(3, 2, 0.0);
  const std::vector<double> e{0.3, -0.7};
  b.update(1, e);
  EXPECT_EQ(b.row(1)[0], 0.3);
  EXPECT_EQ(b.row(1)[1], -0.7);
}

TEST(MemoryBank, HalfAlphaMidpoint) {
  MemoryBank b(1, 2, 0.5);
  b.assign(0, std::vector<double>{1.0, 0.0});
  b.update(0, std::vector<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(b.row(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(b.row(0)[1], 0.5);
}

TEST(MemoryBank, ConstantUpdatesFollowGeometricClosedForm) {
  const std::vector<double> v{0.6, -0.8};
  MemoryBank b(1, 2, 0.5);
  for (int m = 1; m <= 20; ++m) {
    b.update(0, v);
    const double f = 1.0 - std::pow(0.5, m);
    EXPECT_NEAR(b.row(0)[0], f * v[0], 1e-15);
    EXPECT_NEAR(b.row(0)[1], f * v[1], 1e-15);
  }
}

TEST(MemoryBank, RenormalizedRowsStayUnit) {
  cmi::Rng rng(1);
  MemoryBank b(5, 4, 0.7, true);
  for (std::size_t i = 0; i < 5; ++i) b.assign(i, cmi::checks::random_unit(4, rng));
  for (int t = 0; t < 200; ++t) {
    b.update(cmi::uniform_index(rng, 5), cmi::checks::random_unit(4, rng));
  }
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(cmi::dot(b.row(i), b.row(i)), 1.0, 1e-9);
}

TEST(MemoryBank, Errors) {
  EXPECT_THROW(MemoryBank(2, 2, 1.0), std::domain_error);
  EXPECT_THROW(MemoryBank(2, 2, -0.1), std::domain_error);
  MemoryBank b(2, 2, 0.5);
  EXPECT_THROW(b.update(2, std::vector<double>{0, 0}), std::out_of_range);
  EXPECT_THROW(b.update(0, std::vector<double>{0}), std::domain_error);
  EXPECT_THROW(b.assign(5, std::vector<double>{0, 0}), std::out_of_range);
}

TEST(BankRecurrenceProperty, MatchesWeightedSum) {
  cmi::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = cmi::uniform_real(rng, 0.0, 0.99);
    const std::size_t m = 1 + cmi::uniform_index(rng, 12);
    MemoryBank b(1, 3, alpha);
    std::vector<std::vector<double>> g;
    for (std::size_t j = 0; j < m; ++j) {
      g.push_back(cmi::checks::random_unit(3, rng));
      b.update(0, g.back());
    }
    for (std::size_t c = 0; c < 3; ++c) {
      double expect = 0.0;
      for (std::size_t j = 0; j < m; ++j) expect += (1 - alpha) * std::pow(alpha, static_cast<double>(m - 1 - j)) * g[j][c];
      EXPECT_NEAR(b.row(0)[c], expect, 1e-12);
    }
  }
}

TEST(WeightedViewEncode, SingleViewUnitWeight) {
  auto enc = [](std::size_t a) { return std::vector<double>{static_cast<double>(a), 1.0}; };
  const std::vector<std::size_t> idx{4};
  const std::vector<double> w{1.0};
  EXPECT_EQ(cmi::weighted_view_encode(enc, idx, w), (std::vector<double>{4.0, 1.0}));
}

TEST(WeightedViewEncode, BankIsOneMinusAlphaTimesWeightedSum) {
  cmi::Rng rng(3);
  const double alpha = 0.3;
  std::vector<std::vector<double>> views;
  for (int i = 0; i < 3; ++i) views.push_back(cmi::checks::random_unit(4, rng));
  MemoryBank b(1, 4, alpha);
  for (const auto& v : views) b.update(0, v);
  // The most recent view carries weight 1, earlier ones alpha, alpha^2.
  const std::vector<std::size_t> idx{2, 1, 0};
  const std::vector<double> w{1.0, alpha, alpha * alpha};
  const auto sum = cmi::weighted_view_encode([&](std::size_t a) { return views[a]; }, idx, w);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(b.row(0)[j], (1 - alpha) * sum[j], 1e-15);
}

TEST(WeightedViewEncode, TailBoundHolds) {
  cmi::Rng rng(4);
  const double alpha = 0.5;
  const std::size_t total = 30, kept = 5;
  std::vector<std::vector<double>> views;
  for (std::size_t i = 0; i < total; ++i) views.push_back(cmi::checks::random_unit(3, rng));
  std::vector<std::size_t> all(total), head(kept);
  std::iota(all.begin(), all.end(), 0);
  std::iota(head.begin(), head.end(), 0);
  std::vector<double> w_all(total), w_head(kept);
  for (std::size_t m = 0; m < total; ++m) w_all[m] = std::pow(alpha, static_cast<double>(m));
  for (std::size_t m = 0; m < kept; ++m) w_head[m] = w_all[m];
  auto enc = [&](std::size_t a) { return views[a]; };
  const auto full = cmi::weighted_view_encode(enc, all, w_all);
  const auto trunc = cmi::weighted_view_encode(enc, head, w_head);
  double err = 0.0;
  for (std::size_t j = 0; j < 3; ++j) err += (full[j] - trunc[j]) * (full[j] - trunc[j]);
  EXPECT_LE(std::sqrt(err), std::pow(alpha, static_cast<double>(kept)) / (1 - alpha));
}

TEST(WeightedViewEncode, LengthMismatchThrows) {
  const std::vector<std::size_t> idx{0, 1};
  const std::vector<double> w{1.0};
  EXPECT_THROW(cmi::weighted_view_encode([](std::size_t) { return std::vector<double>{0.0}; }, idx, w),
               std::domain_error);
}

TEST(RankBySimilarity, ExactMatchFirst) {
  cmi::Rng rng(5);
  const Tensor pts = cmi::checks::random_normal(20, 3, rng);
  EXPECT_EQ(cmi::rank_by_similarity(pts, pts.row_span(7)).front(), 7u);
}

TEST(RankBySimilarity, ThreePointsOnALineByHand) {
  const Tensor pts = Tensor::from_rows({{0.0}, {5.0}, {2.0}});
  // Distances from 1.5: 1.5, 3.5, 0.5.
  EXPECT_EQ(cmi::rank_by_similarity(pts, std::vector<double>{1.5}), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(RankBySimilarity, TiesByAscendingIndex) {
  const Tensor pts = Tensor::from_rows({{1.0}, {-1.0}, {1.0}, {-1.0}});
  EXPECT_EQ(cmi::rank_by_similarity(pts, std::vector<double>{0.0}), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_THROW(cmi::rank_by_similarity(pts, std::vector<double>{0.0, 1.0}), std::domain_error);
}

TEST(RankBySimilarityProperty, UnitBankL2OrderEqualsDotOrder) {
  cmi::Rng rng(6);
  for (int it = 0; it < 20; ++it) {
    const Tensor pts = cmi::checks::random_unit_rows(40, 4, rng);
    const auto q = cmi::checks::random_unit(4, rng);
    const auto order = cmi::rank_by_similarity(pts, q);
    for (std::size_t r = 1; r < order.size(); ++r) {
      EXPECT_GE(cmi::dot(pts.row_span(order[r - 1]), q), cmi::dot(pts.row_span(order[r]), q) - 1e-12);
    }
  }
}

TEST(KMeans, SingleClusterCentroidIsMean) {
  cmi::Rng rng(7);
  const Tensor pts = cmi::checks::random_normal(30, 2, rng);
  const auto r = cmi::kmeans(pts, 1, 3, rng);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    mx += pts.at(i, 0) / 30;
    my += pts.at(i, 1) / 30;
    EXPECT_EQ(r.assignment[i], 0u);
  }
  EXPECT_NEAR(r.centroids.at(0, 0), mx, 1e-12);
  EXPECT_NEAR(r.centroids.at(0, 1), my, 1e-12);
}

TEST(KMeans, TwoSeparatedBlobsRecovered) {
  cmi::Rng rng(8);
  const auto blobs = cmi::make_blobs(200, 2, 3, 20.0, 0.5, rng);
  const auto r = cmi::kmeans(blobs.points, 2, 3, rng);
  const std::size_t flip = r.assignment[0] == blobs.labels[0] ? 0 : 1;
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(r.assignment[i] ^ flip, blobs.labels[i]);
}

TEST(KMeans, KEqualsNGivesZeroInertia) {
  cmi::Rng rng(9);
  const Tensor pts = cmi::checks::random_normal(12, 2, rng);
  const auto r = cmi::kmeans(pts, 12, 1, rng);
  EXPECT_NEAR(r.inertia, 0.0, 1e-24);
  std::vector<std::size_t> a = r.assignment;
  std::sort(a.begin(), a.end());
  EXPECT_EQ(std::unique(a.begin(), a.end()), a.end());
}

TEST(KMeans, Errors) {
  cmi::Rng rng(1);
  EXPECT_THROW(cmi::kmeans(Tensor::zeros(3, 2), 4, 1, rng), std::domain_error);
  EXPECT_THROW(cmi::kmeans(Tensor::zeros(3, 2), 0, 1, rng), std::domain_error);
}

TEST(KMeansProperty, InertiaNonIncreasingAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cmi::Rng data(seed);
    const Tensor pts = cmi::checks::random_normal(150, 3, data);
    cmi::Rng a(seed + 100), b(seed + 100);
    const auto r = cmi::kmeans(pts, 6, 2, a);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-9);
    EXPECT_EQ(cmi::kmeans(pts, 6, 2, b).assignment, r.assignment);
  }
}
