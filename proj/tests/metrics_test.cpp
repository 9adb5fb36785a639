// Copyright 2026 The pmcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pmcal/metrics.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pmcal/core.hpp"
#include "pmcal/random.hpp"
#include "pmcal/theory.hpp"
#include "test_util.hpp"

namespace pmcal {
namespace {

using testing::random_dataset;
using testing::single_attr;

const Discretization kOneBin = make_discretization(BinKind::kUniform, 1.0);

// Ten rows, one category: ybar 0.6, rbar 0.4.
AuditDataset one_category() {
  return single_attr({1, 1, 1, 1, 1, 1, 0, 0, 0, 0},
                     std::vector<double>(10, 0.4),
                     std::vector<std::string>(10, "a"));
}

// Brute-force max of |ybar - rbar| directly from rows.
double brute_mc(const AuditDataset& d, const GroupCollection& groups,
                const Discretization& disc) {
  const Membership members = group_members(groups, d);
  double best = 0.0;
  for (const auto& mem : members) {
    for (std::size_t b = 0; b < disc.size(); ++b) {
      double sy = 0.0, sr = 0.0;
      std::size_t n = 0;
      for (auto i : mem) {
        if (!disc.bins()[b].contains(d.score(i))) continue;
        sy += d.outcome(i);
        sr += d.score(i);
        ++n;
      }
      if (n) best = std::max(best, std::abs(sy - sr) / static_cast<double>(n));
    }
  }
  return best;
}

TEST(LossTest, SingleCategory) {
  const AuditDataset d = one_category();
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto mc = mc_loss(d, groups, kOneBin, 0.1, 0.0);
  const auto pmc = pmc_loss(d, groups, kOneBin, 0.1, 0.0, 0.01);
  ASSERT_TRUE(mc.defined());
  ASSERT_TRUE(pmc.defined());
  EXPECT_NEAR(*mc.value, 0.2, 1e-12);
  EXPECT_NEAR(*pmc.value, 0.2 / 0.6, 1e-12);
  EXPECT_EQ(mc.witness->group_id, 0u);
  EXPECT_EQ(mc.n_categories_considered, 1u);
  const auto dc = dc_loss(d, groups, kOneBin, 0.1, 0.0);
  ASSERT_TRUE(dc.defined());
  EXPECT_DOUBLE_EQ(*dc.value, 0.0);
}

TEST(LossTest, PerfectCalibrationIsZero) {
  const AuditDataset d = single_attr({1, 0, 1, 0}, {0.5, 0.5, 0.5, 0.5},
                                     {"a", "a", "b", "b"});
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  EXPECT_DOUBLE_EQ(*mc_loss(d, groups, kOneBin, 0.1, 0.0).value, 0.0);
  EXPECT_DOUBLE_EQ(*pmc_loss(d, groups, kOneBin, 0.1, 0.0, 0.01).value, 0.0);
  EXPECT_DOUBLE_EQ(*dc_loss(d, groups, kOneBin, 0.1, 0.0).value, 0.0);
}

TEST(LossTest, DcOfTwoGroupsInOneBin) {
  // Group A: ybar 0.2, group B: ybar 0.4.
  std::vector<int> y = {1, 0, 0, 0, 0, 1, 1, 0, 0, 0};
  std::vector<std::string> g = {"A", "A", "A", "A", "A",
                                "B", "B", "B", "B", "B"};
  const AuditDataset d = single_attr(y, std::vector<double>(10, 0.3), g);
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto dc = dc_loss(d, groups, kOneBin, 0.1, 0.0);
  ASSERT_TRUE(dc.defined());
  EXPECT_NEAR(*dc.value, std::log(2.0), 1e-12);
  EXPECT_NE(dc.witness->group_id, dc.witness_other->group_id);
}

TEST(LossTest, DcIgnoresPairsAcrossBins) {
  std::vector<int> y = {1, 0, 0, 0, 1, 1, 1, 0};
  std::vector<double> r = {0.2, 0.2, 0.2, 0.2, 0.8, 0.8, 0.8, 0.8};
  std::vector<std::string> g = {"A", "A", "A", "A", "B", "B", "B", "B"};
  const AuditDataset d = single_attr(y, r, g);
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto disc = make_discretization(BinKind::kUniform, 0.5);
  EXPECT_DOUBLE_EQ(*dc_loss(d, groups, disc, 0.0, 0.0).value, 0.0);
}

TEST(LossTest, RhoFilterAndUndefinedLosses) {
  const AuditDataset d = single_attr({0, 0, 0, 0}, {0.1, 0.1, 0.1, 0.1},
                                     {"a", "a", "a", "a"});
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto pmc = pmc_loss(d, groups, kOneBin, 0.1, 0.0, 0.01);
  EXPECT_FALSE(pmc.defined());
  EXPECT_FALSE(pmc.reason.empty());
  EXPECT_FALSE(dc_loss(d, groups, kOneBin, 0.1, 0.0).defined());
  EXPECT_NEAR(*mc_loss(d, groups, kOneBin, 0.1, 0.0).value, 0.1, 1e-12);
}

TEST(LossTest, MassFiltersApply) {
  // Group B has 1 of 10 rows; with alpha*lambda = 0.2 its category is dropped.
  std::vector<int> y = {1, 0, 1, 0, 1, 0, 1, 0, 1, 1};
  std::vector<std::string> g(10, "A");
  g[9] = "B";
  const AuditDataset d = single_attr(y, std::vector<double>(10, 0.5), g);
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto table = category_stats(d, groups, kOneBin);
  EXPECT_EQ(qualifying_categories(table, 0.2, 1.0, 0.0).size(), 1u);
  EXPECT_EQ(qualifying_categories(table, 0.1, 1.0, 0.0).size(), 2u);
  EXPECT_EQ(qualifying_categories(table, 0.0, 1.0, 0.5).size(), 1u);
  EXPECT_NEAR(*mc_loss(table, {0.2, 1.0, 0.0, std::nullopt}).value,
              1.0 / 18.0, 1e-12);
  EXPECT_NEAR(*mc_loss(table, {0.1, 1.0, 0.0, std::nullopt}).value, 0.5,
              1e-12);
  EXPECT_FALSE(mc_loss(table, {1.0, 1.0, 0.0, std::nullopt}).defined());
  EXPECT_THROW(pmc_loss(table, {0.1, 1.0, 0.0, std::nullopt}), ConfigError);
}

TEST(LossTest, McMatchesBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const AuditDataset d = random_dataset(rng, 150, 2, 3, false);
    const auto groups = enumerate_groups(d, {"a0", "a1"}, true, 0.0);
    const auto disc = make_discretization(BinKind::kUniform, 0.25);
    EXPECT_NEAR(*mc_loss(d, groups, disc, 0.0, 0.0).value,
                brute_mc(d, groups, disc), 1e-12);
  }
}

TEST(LossTest, PmcDominatesMcOnSharedCategories) {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const AuditDataset d = random_dataset(rng, 20 + rng.below(200), 2, 2, false);
    const auto groups = enumerate_groups(d, {"a0", "a1"}, true, 0.0);
    const auto table = category_stats(d, groups,
                                      make_discretization(BinKind::kUniform, 0.2));
    const auto cats = with_min_outcome(qualifying_categories(table, 0.05, 0.2, 0.0),
                                       0.05);
    const auto mc = mc_loss_over(cats);
    const auto pmc = pmc_loss_over(cats);
    if (!mc.defined()) continue;
    ASSERT_TRUE(pmc.defined());
    EXPECT_LE(*mc.value, *pmc.value + 1e-12);
    if (*pmc.value < 1.0) {
      EXPECT_LE(*mc.value, *pmc_to_mc_bound(*pmc.value) + 1e-12);
    }
  }
}

TEST(LossTest, ContinuousScoresCanBreakTheDcBound) {
  // Two groups share the single bin but not the prediction: each is
  // perfectly calibrated, so pmc is 0, yet their outcome rates differ.
  std::vector<int> y = {1, 0, 0, 0, 0, 1, 1, 1, 1, 0};
  std::vector<double> r = {0.2, 0.2, 0.2, 0.2, 0.2, 0.8, 0.8, 0.8, 0.8, 0.8};
  std::vector<std::string> g = {"A", "A", "A", "A", "A",
                                "B", "B", "B", "B", "B"};
  const AuditDataset d = single_attr(y, r, g);
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto pmc = pmc_loss(d, groups, kOneBin, 0.1, 0.0, 0.01);
  const auto dc = dc_loss(d, groups, kOneBin, 0.1, 0.0);
  EXPECT_NEAR(*pmc.value, 0.0, 1e-12);
  EXPECT_NEAR(*dc.value, std::log(4.0), 1e-12);
  EXPECT_GT(*dc.value, *pmc_to_dc_bound(*pmc.value));
}

TEST(LossTest, ParamsAreEchoed) {
  const AuditDataset d = one_category();
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto r = pmc_loss(d, groups, kOneBin, 0.1, 0.05, 0.02);
  EXPECT_DOUBLE_EQ(r.params.alpha, 0.1);
  EXPECT_DOUBLE_EQ(r.params.gamma, 0.05);
  EXPECT_DOUBLE_EQ(*r.params.rho, 0.02);
}

TEST(AurocTest, HandExamples) {
  const std::vector<double> r = {0.9, 0.8, 0.7, 0.1};
  const std::vector<std::uint8_t> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(*auroc(r, y), 0.75);
  const std::vector<double> sep = {0.9, 0.8, 0.2, 0.1};
  const std::vector<std::uint8_t> ys = {1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(*auroc(sep, ys), 1.0);
  const std::vector<double> tied = {0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(*auroc(tied, y), 0.5);
  const std::vector<std::uint8_t> one_class = {1, 1, 1, 1};
  EXPECT_FALSE(auroc(r, one_class).has_value());
}

TEST(AurocTest, MatchesPairCount) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 60; ++i) {
      r.push_back(std::round(rng.uniform() * 10.0) / 10.0);
      y.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a) {
      for (std::size_t b = 0; b < r.size(); ++b) {
        if (y[a] != 1 || y[b] != 0) continue;
        den += 1.0;
        num += r[a] > r[b] ? 1.0 : (r[a] == r[b] ? 0.5 : 0.0);
      }
    }
    if (den == 0.0) continue;
    EXPECT_NEAR(*auroc(r, y), num / den, 1e-12);
  }
}

TEST(CalibrationCurveTest, ProjectsCategoryTable) {
  const AuditDataset d = one_category();
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto curve = calibration_curve(d, groups, kOneBin);
  ASSERT_EQ(curve.size(), 1u);
  ASSERT_EQ(curve[0].size(), 1u);
  EXPECT_DOUBLE_EQ(curve[0][0].rbar, 0.4);
  EXPECT_DOUBLE_EQ(curve[0][0].ybar, 0.6);
  EXPECT_EQ(curve[0][0].n, 10u);

  Rng rng(8);
  const AuditDataset big = random_dataset(rng, 300, 2, 2, false);
  const auto g2 = enumerate_groups(big, {"a0", "a1"}, true, 0.0);
  const auto disc = make_discretization(BinKind::kUniform, 0.1);
  const auto table = category_stats(big, g2, disc);
  const auto curves = calibration_curve(big, g2, disc);
  std::size_t k = 0;
  for (const auto& c : curves) {
    for (const auto& p : c) {
      const Category& e = table.entries[k++];
      EXPECT_EQ(p.bin_index, e.bin_index);
      EXPECT_EQ(p.rbar, e.rbar);
      EXPECT_EQ(p.ybar, e.ybar);
      EXPECT_EQ(p.n, e.n);
    }
  }
  EXPECT_EQ(k, table.entries.size());
}

}  // namespace
}  // namespace pmcal
