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

#include "pmcal/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pmcal/error.hpp"
#include "pmcal/random.hpp"
#include "test_util.hpp"

namespace pmcal {
namespace {

using testing::random_dataset;
using testing::single_attr;

AuditDataset two_by_two() {
  std::vector<Row> rows = {
      {1, 0.9, {"F", "A"}, std::nullopt}, {0, 0.2, {"F", "B"}, std::nullopt},
      {1, 0.6, {"M", "A"}, std::nullopt}, {0, 0.4, {"M", "B"}, std::nullopt},
      {1, 0.7, {"F", "A"}, std::nullopt}, {0, 0.1, {"M", "B"}, std::nullopt},
  };
  return AuditDataset({"gender", "race"}, rows);
}

TEST(AuditDatasetTest, StoresColumns) {
  const AuditDataset d = two_by_two();
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(d.attribute_count(), 2u);
  EXPECT_EQ(d.outcome(0), 1);
  EXPECT_DOUBLE_EQ(d.score(3), 0.4);
  EXPECT_EQ(d.level(3, 0), "M");
  EXPECT_EQ(d.levels(1), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(*d.attribute_index("race"), 1u);
  EXPECT_FALSE(d.attribute_index("age").has_value());
  EXPECT_DOUBLE_EQ(d.prevalence(), 0.5);
  EXPECT_FALSE(d.has_p_star());
}

TEST(AuditDatasetTest, RejectsBadOutcomeWithRow) {
  std::vector<Row> rows = {{1, 0.5, {"a"}, std::nullopt},
                           {2, 0.5, {"a"}, std::nullopt}};
  try {
    AuditDataset({"g"}, rows);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "y");
  }
}

TEST(AuditDatasetTest, RejectsEmptyAndMixedPStar) {
  std::vector<Row> none;
  EXPECT_THROW(AuditDataset({"g"}, none), ValidationError);
  std::vector<Row> mixed = {{1, 0.5, {"a"}, 0.3}, {0, 0.5, {"a"}, std::nullopt}};
  EXPECT_THROW(AuditDataset({"g"}, mixed), ValidationError);
}

TEST(AuditDatasetTest, MissingValuesBecomeTheirOwnLevel) {
  std::vector<Row> rows = {{1, 0.5, {"a"}, std::nullopt},
                           {0, 0.5, {std::nullopt}, std::nullopt}};
  const AuditDataset d({"g"}, rows);
  EXPECT_EQ(d.level(1, 0), kMissingLevel);
  EXPECT_EQ(d.levels(0).size(), 2u);
}

TEST(AuditDatasetTest, FromColumnsNormalizesDictionary) {
  AuditDataset::Columns cols;
  cols.outcomes = {1, 0, 1};
  cols.scores = {0.1, 0.2, 0.3};
  cols.dictionaries = {{"z", "a", "unused"}};
  cols.codes = {{0, 1, 0}};
  const AuditDataset d = AuditDataset::from_columns({"g"}, std::move(cols));
  EXPECT_EQ(d.levels(0), (std::vector<std::string>{"a", "z"}));
  EXPECT_EQ(d.level(0, 0), "z");
  EXPECT_EQ(d.level(1, 0), "a");
}

TEST(AuditDatasetTest, SubsetAndWithScores) {
  const AuditDataset d = two_by_two();
  const std::vector<std::size_t> idx = {1, 4};
  const AuditDataset s = d.subset(idx);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.score(1), 0.7);
  EXPECT_EQ(s.level(0, 1), "B");
  const AuditDataset w = d.with_scores({0, 0, 0, 0, 0, 1});
  EXPECT_DOUBLE_EQ(w.score(5), 1.0);
  EXPECT_EQ(w.outcome(5), 0);
}

TEST(EnumerateGroupsTest, TwoByTwoIntersections) {
  const auto groups = enumerate_groups(two_by_two(), {"race", "gender"},
                                       false, 0.0);
  ASSERT_EQ(groups.size(), 4u);
  EXPECT_EQ(groups.attribute_basis,
            (std::vector<std::string>{"gender", "race"}));
  EXPECT_EQ(groups.groups[0].label, "gender=F & race=A");
  EXPECT_EQ(groups.groups[3].label, "gender=M & race=B");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    EXPECT_EQ(groups.groups[g].id, g);
  }
}

TEST(EnumerateGroupsTest, MarginalsFollowIntersections) {
  const auto groups = enumerate_groups(two_by_two(), {"gender", "race"},
                                       true, 0.0);
  ASSERT_EQ(groups.size(), 8u);
  EXPECT_TRUE(groups.includes_marginals);
  EXPECT_EQ(groups.groups[4].label, "gender=F");
  EXPECT_EQ(groups.groups[5].label, "gender=M");
  EXPECT_EQ(groups.groups[6].label, "race=A");
  EXPECT_EQ(groups.groups[7].label, "race=B");
}

TEST(EnumerateGroupsTest, SingleLevelGivesOneGroup) {
  const AuditDataset d = single_attr({1, 0}, {0.5, 0.5}, {"x", "x"});
  EXPECT_EQ(enumerate_groups(d, {"g"}, false, 0.0).size(), 1u);
}

TEST(EnumerateGroupsTest, EmptyIntersectionsAreDropped) {
  std::vector<Row> rows = {{1, 0.5, {"F", "A"}, std::nullopt},
                           {0, 0.5, {"M", "B"}, std::nullopt}};
  const AuditDataset d({"gender", "race"}, rows);
  EXPECT_EQ(enumerate_groups(d, {"gender", "race"}, false, 0.0).size(), 2u);
}

TEST(EnumerateGroupsTest, MassFilterAndErrors) {
  const AuditDataset d = two_by_two();
  // Intersections hold 2, 1, 1, 2 rows of 6.
  EXPECT_EQ(enumerate_groups(d, {"gender", "race"}, false, 0.3).size(), 2u);
  EXPECT_THROW(enumerate_groups(d, {"gender", "race"}, false, 0.5),
               EmptyCollectionError);
  EXPECT_THROW(enumerate_groups(d, {"age"}, false, 0.0), ConfigError);
  EXPECT_THROW(enumerate_groups(d, {}, false, 0.0), ConfigError);
}

TEST(EnumerateGroupsTest, MarginalIsUnionOfIntersections) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const AuditDataset d = random_dataset(rng, 200, 3, 3, false);
    const auto groups = enumerate_groups(d, {"a0", "a1", "a2"}, true, 0.0);
    const Membership members = group_members(groups, d);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& pred = groups.groups[g].predicate;
      if (pred.size() == 3) continue;
      std::set<std::uint32_t> joined;
      for (std::size_t h = 0; h < groups.size(); ++h) {
        const auto& full = groups.groups[h].predicate;
        if (full.size() != 3) continue;
        const bool refines = std::all_of(pred.begin(), pred.end(),
            [&](const GroupTerm& t) {
              return std::find(full.begin(), full.end(), t) != full.end();
            });
        if (refines) joined.insert(members[h].begin(), members[h].end());
      }
      EXPECT_EQ(std::vector<std::uint32_t>(joined.begin(), joined.end()),
                members[g])
          << groups.groups[g].label;
    }
  }
}

TEST(DiscretizationTest, UniformBins) {
  const auto d = make_discretization(BinKind::kUniform, 0.1);
  ASSERT_EQ(d.size(), 10u);
  EXPECT_EQ(d.bin_of(0.0), 0u);
  EXPECT_EQ(d.bin_of(0.05), 0u);
  EXPECT_EQ(d.bin_of(0.95), 9u);
  EXPECT_EQ(d.bin_of(1.0), 9u);
  EXPECT_TRUE(d.bins().back().closed_hi);
  EXPECT_FALSE(d.bins().front().closed_hi);
}

TEST(DiscretizationTest, UniformTruncatesLastBin) {
  const auto d = make_discretization(BinKind::kUniform, 0.3);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_NEAR(d.bins()[3].lo, 0.9, 1e-15);
  EXPECT_DOUBLE_EQ(d.bins()[3].hi, 1.0);
  EXPECT_EQ(make_discretization(BinKind::kUniform, 1.0).size(), 1u);
  EXPECT_EQ(make_discretization(BinKind::kUniform, 0.25).size(), 4u);
}

TEST(DiscretizationTest, GeometricBins) {
  const auto d = make_discretization(BinKind::kGeometric, 0.5, 0.01);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_DOUBLE_EQ(d.bins()[0].lo, 0.0);
  EXPECT_NEAR(d.bins()[0].hi, 0.01, 1e-15);
  EXPECT_NEAR(d.bins()[1].lo, 0.01, 1e-15);
  EXPECT_NEAR(d.bins()[1].hi, 0.1, 1e-15);
  EXPECT_NEAR(d.bins()[2].lo, 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(d.bins()[2].hi, 1.0);
  EXPECT_TRUE(d.bins()[2].closed_hi);
  EXPECT_EQ(d.bin_of(0.005), 0u);
  EXPECT_EQ(d.bin_of(0.05), 1u);
  EXPECT_EQ(d.bin_of(1.0), 2u);
}

TEST(DiscretizationTest, Errors) {
  EXPECT_THROW(make_discretization(BinKind::kUniform, 0.0), ConfigError);
  EXPECT_THROW(make_discretization(BinKind::kUniform, 1.5), ConfigError);
  EXPECT_THROW(make_discretization(BinKind::kGeometric, 0.5), ConfigError);
  EXPECT_THROW(make_discretization(BinKind::kGeometric, 0.5, 1.0), ConfigError);
}

TEST(DiscretizationTest, EveryScoreLandsInExactlyOneBin) {
  Rng rng(11);
  const std::vector<Discretization> discs = {
      make_discretization(BinKind::kUniform, 0.1),
      make_discretization(BinKind::kUniform, 0.3),
      make_discretization(BinKind::kUniform, 0.07),
      make_discretization(BinKind::kGeometric, 0.1, 0.01),
      make_discretization(BinKind::kGeometric, 0.3, 0.2)};
  std::vector<double> probes = {0.0, 1.0, 0.1, 0.2, 0.5, 0.9};
  for (int i = 0; i < 2000; ++i) probes.push_back(rng.uniform());
  for (const auto& d : discs) {
    for (std::size_t b = 0; b < d.size(); ++b) probes.push_back(d.bins()[b].lo);
    for (double r : probes) {
      int hits = 0;
      for (const auto& bin : d.bins()) hits += bin.contains(r) ? 1 : 0;
      EXPECT_EQ(hits, 1) << r;
      EXPECT_TRUE(d.bins()[d.bin_of(r)].contains(r)) << r;
    }
  }
}

TEST(CategoryStatsTest, SingleCategory) {
  const AuditDataset d = single_attr({1, 1, 1, 0, 0}, {0.6, 0.6, 0.6, 0.6, 0.6},
                                     {"a", "a", "a", "a", "a"});
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto t = category_stats(d, groups, make_discretization(BinKind::kUniform, 1.0));
  ASSERT_EQ(t.entries.size(), 1u);
  const Category& c = t.entries[0];
  EXPECT_EQ(c.n, 5u);
  EXPECT_DOUBLE_EQ(c.ybar, 0.6);
  EXPECT_DOUBLE_EQ(c.rbar, 0.6);
  EXPECT_DOUBLE_EQ(c.joint_mass, 1.0);
  EXPECT_DOUBLE_EQ(c.cond_mass, 1.0);
}

TEST(CategoryStatsTest, CountsAreConserved) {
  Rng rng(3);
  const AuditDataset d = random_dataset(rng, 500, 2, 3, false);
  const auto groups = enumerate_groups(d, {"a0", "a1"}, true, 0.0);
  const auto t = category_stats(d, groups,
                                make_discretization(BinKind::kUniform, 0.1));
  std::vector<std::size_t> total(groups.size(), 0);
  std::vector<double> mass(groups.size(), 0.0);
  for (const auto& c : t.entries) {
    total[c.group_id] += c.n;
    mass[c.group_id] += c.cond_mass;
  }
  std::size_t intersection_rows = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    EXPECT_EQ(total[g], t.group_sizes[g]);
    EXPECT_NEAR(mass[g], 1.0, 1e-12);
    if (groups.groups[g].predicate.size() == 2) intersection_rows += total[g];
  }
  EXPECT_EQ(intersection_rows, d.size());
}

TEST(CategoryStatsTest, RowOrderDoesNotMatter) {
  Rng rng(5);
  const AuditDataset d = random_dataset(rng, 300, 2, 2, false);
  std::vector<std::size_t> perm(d.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const AuditDataset shuffled = d.subset(perm);
  const auto disc = make_discretization(BinKind::kUniform, 0.2);
  const auto a = category_stats(d, enumerate_groups(d, {"a0", "a1"}, true, 0.0),
                                disc);
  const auto b = category_stats(
      shuffled, enumerate_groups(shuffled, {"a0", "a1"}, true, 0.0), disc);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].group_id, b.entries[i].group_id);
    EXPECT_EQ(a.entries[i].bin_index, b.entries[i].bin_index);
    EXPECT_EQ(a.entries[i].n, b.entries[i].n);
    EXPECT_NEAR(a.entries[i].ybar, b.entries[i].ybar, 1e-12);
    EXPECT_NEAR(a.entries[i].rbar, b.entries[i].rbar, 1e-12);
  }
}

TEST(CategoryStatsTest, ExactModeNeedsPStar) {
  const AuditDataset d = single_attr({1}, {0.5}, {"a"});
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  EXPECT_THROW(category_stats(d, groups,
                              make_discretization(BinKind::kUniform, 1.0), true),
               ConfigError);
}

TEST(CategoryStatsTest, ExactModeUsesPStar) {
  std::vector<Row> rows = {{1, 0.5, {"a"}, 0.3}, {1, 0.5, {"a"}, 0.5}};
  const AuditDataset d({"g"}, rows);
  const auto groups = enumerate_groups(d, {"g"}, false, 0.0);
  const auto t = category_stats(d, groups,
                                make_discretization(BinKind::kUniform, 1.0), true);
  EXPECT_DOUBLE_EQ(t.entries[0].ybar, 0.4);
}

TEST(RngTest, DeterministicAndSeedSensitive) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(Rng(42).uniform(), c.uniform());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  Rng d(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(d.below(7), 7u);
}

}  // namespace
}  // namespace pmcal
