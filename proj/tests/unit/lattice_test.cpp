#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "fvddp/errors.hpp"
#include "fvddp/lattice.hpp"
#include "fvddp/random.hpp"

using namespace fvddp;

TEST(MultiplicityVector, TotalTracksEntries) {
  MultiplicityVector v{2, 0, 3};
  EXPECT_EQ(v.total(), 5);
  v.increment(1);
  v.decrement(0);
  EXPECT_EQ(v.total(), 5);
  EXPECT_EQ(v, (MultiplicityVector{1, 1, 3}));
  EXPECT_THROW(MultiplicityVector({1, -1}), std::invalid_argument);
  EXPECT_THROW(MultiplicityVector(2).decrement(0), std::logic_error);
}

TEST(MultiplicityVector, ComponentwiseOrder) {
  EXPECT_TRUE(below_or_equal({1, 1}, {2, 1}));
  EXPECT_FALSE(below_or_equal({0, 2}, {2, 1}));
  EXPECT_FALSE(below_or_equal({0, 0}, {0, 0, 0}));
}

TEST(CountsOf, CountsEachDistinctValue) {
  const std::vector<Value> distinct{10, 20};
  EXPECT_EQ(counts_of(std::vector<Value>{10, 20, 10}, distinct), (MultiplicityVector{2, 1}));
  EXPECT_EQ(counts_of(std::vector<Value>{}, distinct), (MultiplicityVector{0, 0}));
}

TEST(CountsOf, TwoTimesOfTheSamePairGiveTopNode22) {
  const std::vector<Value> all{1, 2, 1, 2};
  EXPECT_EQ(counts_of(all, std::vector<Value>{1, 2}), (MultiplicityVector{2, 2}));
}

TEST(CountsOf, UnknownValueIsNamed) {
  try {
    counts_of(std::vector<Value>{1, 7}, std::vector<Value>{1});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
  }
}

TEST(EnumerateBelow, FullGraphBelow22) {
  const auto nodes = enumerate_below({2, 2});
  EXPECT_EQ(nodes.size(), 9u);
  EXPECT_TRUE(std::is_sorted(nodes.begin(), nodes.end()));
  EXPECT_EQ(nodes.front(), (MultiplicityVector{0, 0}));
  EXPECT_EQ(nodes.back(), (MultiplicityVector{2, 2}));
}

TEST(EnumerateBelow, OriginOnly) {
  const auto nodes = enumerate_below({0, 0});
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0], (MultiplicityVector{0, 0}));
}

TEST(EnumerateBelow, ThreeDimensionalCount) {
  EXPECT_EQ(enumerate_below({1, 2, 1}).size(), 12u);
}

TEST(EnumerateBelow, MembershipIsThePartialOrder) {
  const MultiplicityVector top{2, 0, 3};
  const auto nodes = enumerate_below(top);
  std::set<MultiplicityVector> members(nodes.begin(), nodes.end());
  for (int a = 0; a <= 3; ++a) {
    for (int b = 0; b <= 1; ++b) {
      for (int c = 0; c <= 4; ++c) {
        const MultiplicityVector n{a, b, c};
        EXPECT_EQ(members.count(n) == 1, below_or_equal(n, top));
      }
    }
  }
}

TEST(LatticeSize, ProductFormula) {
  EXPECT_EQ(lattice_size({2, 2}), 9u);
  EXPECT_EQ(lattice_size({0}), 1u);
  EXPECT_EQ(lattice_size({4, 4, 4}), 125u);
  EXPECT_EQ(lattice_size({4, 4, 4}), enumerate_below({4, 4, 4}).size());
}

TEST(LatticeSize, MatchesEnumerationOnRandomTops) {
  Rng rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    const int dim = 1 + static_cast<int>(rng() % 4);
    std::vector<int> counts;
    for (int i = 0; i < dim; ++i) counts.push_back(static_cast<int>(rng() % 9));
    const MultiplicityVector top(counts);
    EXPECT_EQ(lattice_size(top), enumerate_below(top).size());
  }
}

TEST(LatticeSize, OverflowIsRejected) {
  EXPECT_THROW(lattice_size(MultiplicityVector(std::vector<int>(70, 1000))), std::overflow_error);
}

TEST(CountAtLevel, SumsToLatticeSize) {
  const MultiplicityVector top{3, 1, 2};
  std::uint64_t total = 0;
  for (int level = 0; level <= top.total(); ++level) {
    std::uint64_t visited = 0;
    for_each_at_level(top, level, [&](const MultiplicityVector& n) {
      EXPECT_EQ(n.total(), level);
      EXPECT_TRUE(below_or_equal(n, top));
      ++visited;
    });
    EXPECT_EQ(visited, count_at_level(top, level));
    total += visited;
  }
  EXPECT_EQ(total, lattice_size(top));
}

TEST(WeightedNodeSet, NormalizeIsIdempotentAndKeepsRatios) {
  WeightedNodeSet s(2);
  s.add({1, 0}, 2.0);
  s.add({0, 1}, 6.0);
  s.normalize();
  EXPECT_DOUBLE_EQ(s.weight({1, 0}), 0.25);
  EXPECT_DOUBLE_EQ(s.weight({0, 1}), 0.75);
  s.normalize();
  EXPECT_DOUBLE_EQ(s.weight({1, 0}), 0.25);
  EXPECT_NEAR(s.total_weight(), 1.0, 1e-12);
}

TEST(WeightedNodeSet, RejectsBadEntries) {
  WeightedNodeSet s(2);
  EXPECT_THROW(s.add({1}, 1.0), std::invalid_argument);
  EXPECT_THROW(s.add({1, 1}, -0.5), std::invalid_argument);
  EXPECT_THROW(s.normalize(), std::domain_error);
}

TEST(WeightedNodeSet, PruneDropsSmallWeights) {
  WeightedNodeSet s(1);
  s.add({0}, 1.0);
  s.add({1}, 1e-13);
  s.prune(1e-10);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.weight({0}), 1.0);
}

TEST(WeightedNodeSet, PruneKeepsHeaviestWhenAllAreSmall) {
  WeightedNodeSet s(1);
  for (int i = 0; i < 10; ++i) s.add({i}, 1.0 + i);
  s.prune(0.5);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.weight({9}), 1.0);
}

TEST(WeightedNodeSet, TopAndBottom) {
  WeightedNodeSet s(2);
  s.add({1, 2}, 0.5);
  s.add({2, 1}, 0.5);
  EXPECT_EQ(s.top(), (MultiplicityVector{2, 2}));
  EXPECT_EQ(s.bottom(), (MultiplicityVector{1, 1}));
}

TEST(ExtendSupport, PadsWithZeros) {
  auto s = WeightedNodeSet::point_mass({1, 1});
  const auto padded = extend_support(s, 3);
  EXPECT_EQ(padded.dim(), 3u);
  EXPECT_DOUBLE_EQ(padded.weight({1, 1, 0}), 1.0);
}

TEST(ExtendSupport, SameDimensionIsIdentity) {
  WeightedNodeSet s(2);
  s.add({1, 0}, 0.3);
  s.add({0, 1}, 0.7);
  const auto same = extend_support(s, 2);
  EXPECT_EQ(same.sorted(), s.sorted());
}

TEST(ExtendSupport, TwoNodeSetKeepsUnitMass) {
  WeightedNodeSet s(2);
  s.add({1, 0}, 0.4);
  s.add({2, 1}, 0.6);
  const auto padded = extend_support(s, 4);
  EXPECT_NEAR(padded.total_weight(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(padded.weight({2, 1, 0, 0}), 0.6);
}

TEST(ExtendSupport, ShrinkingIsRejected) {
  EXPECT_THROW(extend_support(WeightedNodeSet::point_mass({1, 1}), 1), std::invalid_argument);
}
