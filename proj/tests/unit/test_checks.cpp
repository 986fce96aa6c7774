#include <gtest/gtest.h>

#include "cmi/checks.hpp"

TEST(Checks, FastSuitePassesForSeveralSeeds) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    for (const auto& r : cmi::checks::run_fast_checks(seed)) {
      EXPECT_TRUE(r.passed) << r.name << " seed " << seed << " worst " << r.worst << " tol " << r.tolerance << " "
                            << r.detail;
      EXPECT_GT(r.instances, 0u) << r.name;
    }
  }
}

TEST(Checks, EveryObjectiveHasAGradientCase) {
  const auto results = cmi::checks::check_gradients(5);
  EXPECT_GE(results.size(), 8u);
  for (const auto& r : results) EXPECT_EQ(r.instances, 20u) << r.name;
}
