#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cmi/checks.hpp"
#include "cmi/datasets.hpp"
#include "cmi/kmeans.hpp"
#include "cmi/samplers.hpp"

using cmi::MemoryBank;
using cmi::NegativeSpec;
using cmi::NeighborSpec;
using cmi::Tensor;

namespace {

MemoryBank random_bank(std::size_t n, std::size_t d, cmi::Rng& rng) {
  return MemoryBank(cmi::checks::random_unit_rows(n, d, rng), 0.5);
}

// 0-based position of every index in the oracle ranking.
std::vector<std::size_t> rank_of(const MemoryBank& bank, std::span<const double> q) {
  const auto order = cmi::rank_by_similarity(bank, q);
  std::vector<std::size_t> pos(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) pos[order[r]] = r;
  return pos;
}

}  // namespace

TEST(Anneal, EndpointsAndMidpoint) {
  const cmi::AnnealSchedule s{100.0, 10.0, 0.0, 100.0};
  EXPECT_EQ(cmi::anneal_value(s, -5.0), 100.0);
  EXPECT_EQ(cmi::anneal_value(s, 0.0), 100.0);
  EXPECT_DOUBLE_EQ(cmi::anneal_value(s, 50.0), 55.0);
  EXPECT_EQ(cmi::anneal_value(s, 100.0), 10.0);
  EXPECT_EQ(cmi::anneal_value(s, 1e6), 10.0);
}

TEST(AnnealProperty, MonotoneBetweenEndpoints) {
  const cmi::AnnealSchedule down{100.0, 10.0, 3.0, 17.0}, up{0.0, 5.0, 0.0, 8.0};
  for (double t = 0.0; t < 20.0; t += 0.25) {
    EXPECT_LE(cmi::anneal_value(down, t + 0.25), cmi::anneal_value(down, t));
    EXPECT_GE(cmi::anneal_value(up, t + 0.25), cmi::anneal_value(up, t));
  }
}

TEST(RankCutoff, CeilingAndClamping) {
  EXPECT_EQ(cmi::rank_cutoff(10.0, 1000), 100u);
  EXPECT_EQ(cmi::rank_cutoff(10.0, 95), 10u);   // 9.5 rounds up
  EXPECT_EQ(cmi::rank_cutoff(0.01, 50), 1u);    // at least one
  EXPECT_EQ(cmi::rank_cutoff(100.0, 37), 37u);
  EXPECT_EQ(cmi::rank_cutoff(0.0, 37), 0u);
}

TEST(NegativeSpec, Validation) {
  EXPECT_NO_THROW(NegativeSpec::marginal().validate());
  EXPECT_THROW(NegativeSpec::ball(0.0).validate(), cmi::ConfigError);
  EXPECT_THROW(NegativeSpec::ball(120.0).validate(), cmi::ConfigError);
  EXPECT_THROW(NegativeSpec::ring(20.0, 10.0).validate(), cmi::ConfigError);
  EXPECT_THROW(NegativeSpec::ring(10.0, 10.0).validate(), cmi::ConfigError);
  EXPECT_NO_THROW(NegativeSpec::ring(1.0, 10.0).validate());
  EXPECT_THROW(cmi::negative_kind_from_string("donut"), cmi::ConfigError);
  EXPECT_THROW(cmi::neighbor_kind_from_string("x"), cmi::ConfigError);
}

TEST(NegativeSpec, AnnealedCopyKeepsRingValid) {
  NegativeSpec s = NegativeSpec::ring(20.0, 50.0);
  s.anneal = cmi::AnnealSchedule{100.0, 10.0, 0.0, 10.0};
  const NegativeSpec late = s.at(10.0);
  EXPECT_EQ(late.outer_percent, 10.0);
  EXPECT_LT(late.inner_percent, late.outer_percent);
  EXPECT_NO_THROW(late.validate());
}

TEST(SampleNegatives, MarginalIsUniformOverOthers) {
  cmi::Rng rng(1);
  const MemoryBank bank = random_bank(10, 3, rng);
  const std::size_t draws = 90000;
  const auto s = cmi::sample_negatives(NegativeSpec::marginal(), bank, bank.row(4), 4, draws, rng);
  std::vector<double> counts(10, 0.0);
  for (std::size_t i : s) counts[i] += 1;
  EXPECT_EQ(counts[4], 0.0);
  double chi2 = 0.0;
  const double expect = static_cast<double>(draws) / 9.0;
  for (std::size_t i = 0; i < 10; ++i)
    if (i != 4) chi2 += (counts[i] - expect) * (counts[i] - expect) / expect;
  EXPECT_LT(chi2, 26.12);  // chi-squared, 8 dof, p = 0.001
}

TEST(SampleNegatives, BallTenPercentOfHundred) {
  cmi::Rng rng(2);
  const MemoryBank bank = random_bank(100, 4, rng);
  const auto q = cmi::checks::random_unit(4, rng);
  const auto pos = rank_of(bank, q);
  for (std::size_t i : cmi::sample_negatives(NegativeSpec::ball(10.0), bank, q, 99, 500, rng)) {
    EXPECT_LT(pos[i], 10u);
    EXPECT_NE(i, 99u);
  }
}

TEST(SampleNegatives, RingOneToTenPercentOfThousand) {
  cmi::Rng rng(3);
  const MemoryBank bank = random_bank(1000, 4, rng);
  const auto q = cmi::checks::random_unit(4, rng);
  const auto pos = rank_of(bank, q);
  for (std::size_t i : cmi::sample_negatives(NegativeSpec::ring(1.0, 10.0), bank, q, 0, 2000, rng)) {
    // 1-based rank in (10, 100].
    EXPECT_GT(pos[i] + 1, 10u);
    EXPECT_LE(pos[i] + 1, 100u);
  }
}

TEST(SampleNegatives, CaveExcludesAnchorCluster) {
  cmi::Rng rng(4);
  const MemoryBank bank = random_bank(200, 3, rng);
  const auto clusters = cmi::kmeans(bank.entries(), 8, 1, rng).assignment;
  const std::size_t anchor = 17;
  const auto pos = rank_of(bank, bank.row(anchor));
  for (std::size_t i : cmi::sample_negatives(NegativeSpec::cave(30.0, 8), bank, bank.row(anchor), anchor, 500, rng,
                                             clusters)) {
    EXPECT_NE(clusters[i], clusters[anchor]);
    EXPECT_LT(pos[i], 60u);
  }
}

TEST(SampleNegatives, DegeneratePoolsRaise) {
  cmi::Rng rng(5);
  const MemoryBank one = random_bank(1, 2, rng);
  EXPECT_THROW(cmi::sample_negatives(NegativeSpec::marginal(), one, one.row(0), 0, 3, rng), cmi::DegeneratePoolError);
  // Every point in one cluster: the cave pool is empty.
  const MemoryBank bank = random_bank(20, 2, rng);
  const std::vector<std::size_t> same(20, 0);
  EXPECT_THROW(cmi::sample_negatives(NegativeSpec::cave(50.0, 1), bank, bank.row(3), 3, 3, rng, same),
               cmi::DegeneratePoolError);
  // A 1-element ball holding only the anchor.
  EXPECT_THROW(cmi::sample_negatives(NegativeSpec::ball(1.0), bank, bank.row(3), 3, 3, rng), cmi::DegeneratePoolError);
  EXPECT_THROW(cmi::sample_negatives(NegativeSpec::marginal(), bank, bank.row(3), 20, 3, rng), std::out_of_range);
}

TEST(SampleNegativesProperty, EveryDrawSatisfiesItsPredicate) {
  cmi::Rng rng(6);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 50 + cmi::uniform_index(rng, 150);
    const MemoryBank bank = random_bank(n, 3, rng);
    const auto clusters = cmi::kmeans(bank.entries(), 5, 1, rng).assignment;
    const std::size_t anchor = cmi::uniform_index(rng, n);
    const auto q = bank.row(anchor);
    const auto pos = rank_of(bank, q);
    const double outer = cmi::uniform_real(rng, 20.0, 100.0), inner = cmi::uniform_real(rng, 1.0, outer / 2);
    const std::size_t hi = cmi::rank_cutoff(outer, n), lo = cmi::rank_cutoff(inner, n);
    for (const NegativeSpec& spec :
         {NegativeSpec::marginal(), NegativeSpec::ball(outer), NegativeSpec::ring(inner, outer),
          NegativeSpec::cave(outer, 5)}) {
      std::vector<std::size_t> draws;
      try {
        draws = cmi::sample_negatives(spec, bank, q, anchor, 200, rng, clusters);
      } catch (const cmi::DegeneratePoolError&) {
        continue;
      }
      for (std::size_t i : draws) {
        EXPECT_NE(i, anchor);
        if (spec.kind != cmi::NegativeKind::Marginal) { EXPECT_LT(pos[i], hi); }
        if (spec.kind == cmi::NegativeKind::Ring) { EXPECT_GE(pos[i], lo); }
        if (spec.kind == cmi::NegativeKind::Cave) { EXPECT_NE(clusters[i], clusters[anchor]); }
      }
    }
  }
}

TEST(SampleNegativesProperty, FullBallPoolEqualsMarginalPool) {
  cmi::Rng rng(7);
  const MemoryBank bank = random_bank(64, 3, rng);
  const auto ranking = cmi::rank_by_similarity(bank, bank.row(5));
  auto ball = cmi::negative_pool(NegativeSpec::ball(100.0), ranking, 5);
  auto marg = cmi::negative_pool(NegativeSpec::marginal(), ranking, 5);
  std::sort(ball.begin(), ball.end());
  std::sort(marg.begin(), marg.end());
  EXPECT_EQ(ball, marg);
  EXPECT_EQ(ball.size(), 63u);
  // Same draws from the same stream.
  cmi::Rng a(9), b(9);
  EXPECT_EQ(cmi::sample_negatives(NegativeSpec::ball(100.0), bank, bank.row(5), 5, 100, a),
            cmi::sample_negatives(NegativeSpec::marginal(), bank, bank.row(5), 5, 100, b));
}

TEST(RankedWindow, SameSetAsSortedRanking) {
  cmi::Rng rng(8);
  for (int it = 0; it < 20; ++it) {
    const Tensor pts = cmi::checks::random_normal(80, 3, rng);
    const auto q = cmi::checks::random_unit(3, rng);
    const auto order = cmi::rank_by_similarity(pts, q);
    const std::size_t lo = cmi::uniform_index(rng, 40), hi = lo + 1 + cmi::uniform_index(rng, 40);
    auto w = cmi::ranked_window(pts, q, lo, hi);
    std::vector<std::size_t> expect(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                    order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(w.begin(), w.end());
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(w, expect);
  }
}

TEST(CloseNeighbors, NoneGivesAnchorOnly) {
  cmi::Rng rng(9);
  const MemoryBank bank = random_bank(30, 3, rng);
  EXPECT_EQ(cmi::sample_close_neighbors(NeighborSpec::none(), bank, bank.row(2), 2, 5, rng),
            (std::vector<std::size_t>{2}));
}

TEST(CloseNeighbors, SNeighWithinPercentile) {
  cmi::Rng rng(10);
  const MemoryBank bank = random_bank(1000, 3, rng);
  const auto pos = rank_of(bank, bank.row(11));
  const auto c = cmi::sample_close_neighbors(NeighborSpec::s_neigh(1.0), bank, bank.row(11), 11, 300, rng);
  EXPECT_EQ(c.front(), 11u);
  EXPECT_EQ(c.size(), 301u);
  for (std::size_t i : c) EXPECT_LT(pos[i], 10u);
}

TEST(CloseNeighbors, KNeighStaysInBlob) {
  cmi::Rng rng(11);
  const auto blobs = cmi::make_blobs(100, 2, 3, 20.0, 0.5, rng);
  const MemoryBank bank(blobs.points, 0.0);
  const auto clusters = cmi::kmeans(bank.entries(), 2, 3, rng).assignment;
  for (std::size_t anchor : {0u, 1u, 50u, 99u}) {
    for (std::size_t i :
         cmi::sample_close_neighbors(NeighborSpec::k_neigh(2), bank, bank.row(anchor), anchor, 100, rng, clusters)) {
      EXPECT_EQ(blobs.labels[i], blobs.labels[anchor]);
    }
  }
}

TEST(CloseNeighborsProperty, AnchorAlwaysInCloseSet) {
  cmi::Rng rng(12);
  for (int it = 0; it < 30; ++it) {
    const MemoryBank bank = random_bank(40, 3, rng);
    const auto clusters = cmi::kmeans(bank.entries(), 4, 1, rng).assignment;
    const std::size_t anchor = cmi::uniform_index(rng, 40);
    const auto ranking = cmi::rank_by_similarity(bank, bank.row(anchor));
    for (const NeighborSpec& s : {NeighborSpec::none(), NeighborSpec::s_neigh(cmi::uniform_real(rng, 0.5, 50.0)),
                                  NeighborSpec::k_neigh(4)}) {
      const auto c = cmi::close_set(s, ranking, anchor, clusters);
      EXPECT_EQ(c.front(), anchor);
      EXPECT_EQ(std::count(c.begin(), c.end(), anchor), 1);
    }
  }
}
