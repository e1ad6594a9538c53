#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "fvddp/errors.hpp"
#include "fvddp/filter.hpp"
#include "fvddp/partition.hpp"
#include "fvddp/predictive.hpp"

using namespace fvddp;
using fvddp::testing::two_time_filter;
using fvddp::testing::kDiffuseBase;

namespace {

BaseMeasure base(std::string_view spec = "poisson:3", double theta = 1.0) {
  return make_base(theta, parse_distribution(spec));
}

double poisson3(Value y) { return PoissonDistribution(3.0).pmf(y); }

}  // namespace

TEST(Init, SingleEmptyNode) {
  const auto s = init(base(), 1.0);
  EXPECT_TRUE(s.distinct.empty());
  ASSERT_EQ(s.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(s.nodes.weight(MultiplicityVector(0)), 1.0);
  EXPECT_EQ(log_marginal_likelihood(s), 0.0);
  EXPECT_THROW(init(base(), 0.0), InputError);
}

TEST(Init, PredictiveIsTheBaseMeasure) {
  const auto p = exact_predict(init(base(), 1.0), 0.0);
  for (Value y = 0; y < 10; ++y) EXPECT_NEAR(predictive_pmf(p, y), poisson3(y), 1e-15);
}

TEST(UpdateOne, ConjugateSingleNode) {
  const auto s = update_one(init(base(), 1.0), 4);
  ASSERT_EQ(s.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(s.nodes.weight({1}), 1.0);
  EXPECT_EQ(s.distinct, std::vector<Value>{4});
  EXPECT_NEAR(log_marginal_likelihood(s), std::log(poisson3(4)), 1e-14);
}

TEST(UpdateOne, TwoDistinctValuesGiveNode11) {
  const auto s = update_one(update_one(init(base(), 1.0), 1), 2);
  ASSERT_EQ(s.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(s.nodes.weight({1, 1}), 1.0);
}

TEST(UpdateOne, RepeatedValueUsesTheUrnDensity) {
  const auto s = update_one(update_one(init(base(), 1.0), 2), 2);
  const double p = poisson3(2);
  EXPECT_NEAR(log_marginal_likelihood(s), std::log(p) + std::log((p + 1.0) / 2.0), 1e-14);
}

TEST(UpdateOne, SingleNodeReweightingIsTrivial) {
  auto s = update_one(init(base(), 1.0), 1);
  s = update_one(s, 3);
  EXPECT_DOUBLE_EQ(s.nodes.weight({1, 1}), 1.0);
}

TEST(UpdateOne, ZeroLikelihoodNamesTheValue) {
  const auto s = init(base("binomial:4,0.5"), 1.0);
  try {
    update_one(s, 9);
    FAIL();
  } catch (const ModelMisspecification& e) {
    EXPECT_NE(std::string(e.what()).find('9'), std::string::npos);
  }
}

TEST(AdvanceTime, VanishingLagChangesNothing) {
  const auto s = two_time_filter();
  const auto moved = advance_time(s, 1e-13);
  for (const auto& [n, w] : s.nodes) EXPECT_NEAR(moved.nodes.weight(n), w, 1e-9);
  EXPECT_EQ(moved.distinct, s.distinct);
}

TEST(AdvanceTime, LongLagEmptiesTheNodes) {
  const auto moved = advance_time(two_time_filter(), 1e3);
  ASSERT_EQ(moved.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(moved.nodes.weight({0, 0}), 1.0);
}

TEST(AdvanceTime, SigmaRescalesTheLag) {
  const auto a = advance_time(two_time_filter("poisson:3", 1.0, 2.0), 0.25);
  auto slow = two_time_filter("poisson:3", 1.0, 2.0);
  slow.sigma = 1.0;
  const auto b = advance_time(slow, 0.5);
  for (const auto& [n, w] : b.nodes) EXPECT_NEAR(a.nodes.weight(n), w, 1e-14);
}

TEST(AdvanceTime, RejectsNonPositiveLag) {
  EXPECT_THROW(advance_time(init(base(), 1.0), 0.0), InputError);
}

TEST(TwoTime, ActiveSetBetweenBottomAndTop) {
  const auto s = two_time_filter();
  std::vector<MultiplicityVector> keys;
  for (const auto& [n, w] : s.nodes.sorted()) keys.push_back(n);
  EXPECT_EQ(keys, (std::vector<MultiplicityVector>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}));
  EXPECT_EQ(s.nodes.bottom(), (MultiplicityVector{1, 1}));
  EXPECT_EQ(s.nodes.top(), (MultiplicityVector{2, 2}));
}

TEST(TwoTime, WeightsMatchTheLatticeSweepOracle) {
  // Direct sweep with level rows from exp(Qt) (tests/oracles/oracle.py).
  const auto s = two_time_filter();
  EXPECT_NEAR(s.nodes.weight({1, 1}), 0.09225366489444693, 1e-12);
  EXPECT_NEAR(s.nodes.weight({1, 2}), 0.2232462142397575, 1e-12);
  EXPECT_NEAR(s.nodes.weight({2, 1}), 0.3144384483789566, 1e-12);
  EXPECT_NEAR(s.nodes.weight({2, 2}), 0.37006167248683897, 1e-12);
  EXPECT_NEAR(log_marginal_likelihood(s), -7.239913885759119, 1e-12);
}

TEST(UpdateBatch, EmptyBatchIsIdentity) {
  const auto s = two_time_filter();
  const auto same = update_batch(s, std::vector<Value>{});
  EXPECT_EQ(same.nodes.sorted(), s.nodes.sorted());
  EXPECT_EQ(same.log_ml, s.log_ml);
}

TEST(UpdateBatch, OrderDoesNotMatter) {
  auto prior = advance_time(update_batch(init(base(), 1.5), std::vector<Value>{1, 2, 2, 5}), 0.4);
  std::vector<Value> batch{2, 5, 7, 2, 1};
  const auto reference = update_batch(prior, batch);
  std::sort(batch.begin(), batch.end());
  do {
    const auto s = update_batch(prior, batch);
    EXPECT_NEAR(s.log_ml, reference.log_ml, 1e-12);
    for (const auto& [n, w] : reference.nodes) EXPECT_NEAR(s.nodes.weight(n), w, 1e-12);
  } while (std::next_permutation(batch.begin(), batch.end()));
}

TEST(UpdateBatch, TwoTimeExampleReachesTop22) {
  EXPECT_EQ(two_time_filter().nodes.top(), (MultiplicityVector{2, 2}));
}

TEST(UpdateBatch, StructureInvariantOnRandomData) {
  Rng rng(17);
  FilterState s = init(base("poisson:2"), 0.8);
  std::vector<Value> all;
  for (int time = 0; time < 4; ++time) {
    if (time > 0) s = advance_time(s, 0.7);
    std::vector<Value> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(std::poisson_distribution<Value>(2.0)(rng));
    all.insert(all.end(), batch.begin(), batch.end());
    s = update_batch(s, batch);
    EXPECT_TRUE(below_or_equal(counts_of(batch, s.distinct), s.nodes.bottom()));
    EXPECT_EQ(s.nodes.top(), counts_of(all, s.distinct));
    EXPECT_NEAR(s.nodes.total_weight(), 1.0, 1e-12);
  }
}

TEST(AdvanceTime, ChapmanKolmogorovWithoutPruning) {
  const auto s = two_time_filter("poisson:3", 1.0, 1.0, 0.0);
  const auto split = advance_time(advance_time(s, 0.2), 0.5);
  const auto whole = advance_time(s, 0.7);
  for (const auto& [n, w] : whole.nodes) EXPECT_NEAR(split.nodes.weight(n), w, 1e-6);
}

TEST(LogMarginal, SingleTimeIsTheUrnSequenceProbability) {
  // With an (effectively) nonatomic P0 the likelihood of one batch is the
  // EPPF of its ties times the P0 mass of each distinct value.
  const std::vector<Value> batch{7, 7, 9, 7, 11, 9};
  const auto s = update_batch(init(base(kDiffuseBase, 2.0), 1.0), batch);
  const double p0 = parse_distribution(kDiffuseBase)->pmf(7);
  const std::vector<int> sizes{3, 2, 1};
  EXPECT_NEAR(s.log_ml, std::log(dp_eppf(sizes, 2.0)) + 3.0 * std::log(p0), 1e-8);
}

TEST(HyperPosterior, SinglePointGetsAllMass) {
  const std::vector<GridPoint> grid{{1.0, 1.0, 1.0}};
  const std::vector<Batch> data{{0.0, {1, 2, 2}}};
  const auto h = hyper_posterior(grid, parse_distribution("poisson:3"), data, {}, 1);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_DOUBLE_EQ(h[0].posterior, 1.0);
}

TEST(HyperPosterior, DuplicatesSplitEvenly) {
  const std::vector<GridPoint> grid{{2.0, 1.0, 0.5}, {2.0, 1.0, 0.5}};
  const std::vector<Batch> data{{0.0, {1, 2}}, {1.0, {2, 3}}};
  const auto h = hyper_posterior(grid, parse_distribution("poisson:3"), data, {}, 1);
  EXPECT_NEAR(h[0].posterior, 0.5, 1e-15);
  EXPECT_NEAR(h[1].posterior, 0.5, 1e-15);
}

TEST(HyperPosterior, MatchesPriorTimesLikelihood) {
  const std::vector<GridPoint> grid{{0.5, 1.0, 0.2}, {3.0, 0.5, 0.8}};
  const std::vector<Batch> data{{0.0, {1, 2, 2}}, {1.0, {2, 4}}};
  const auto h = hyper_posterior(grid, parse_distribution("poisson:3"), data, {}, 1, kDefaultPruneEps, 2);
  const double a = 0.2 * std::exp(h[0].log_ml);
  const double b = 0.8 * std::exp(h[1].log_ml);
  EXPECT_NEAR(h[0].posterior, a / (a + b), 1e-12);
  EXPECT_NEAR(h[0].log_ml, h[0].state.log_ml, 0.0);
}

TEST(HyperPosterior, RejectsBadGrids) {
  const std::vector<Batch> data{{0.0, {1}}};
  EXPECT_THROW(hyper_posterior(std::vector<GridPoint>{}, parse_distribution("poisson:3"), data, {}, 1), InputError);
  const std::vector<GridPoint> bad{{1.0, 1.0, 0.3}};
  EXPECT_THROW(hyper_posterior(bad, parse_distribution("poisson:3"), data, {}, 1), InputError);
  const std::vector<GridPoint> grid{{1.0, 1.0, 1.0}};
  const std::vector<Batch> impossible{{0.0, {9}}};
  EXPECT_THROW(hyper_posterior(grid, parse_distribution("binomial:3,0.5"), impossible, {}, 1), ModelMisspecification);
}

TEST(HyperPosterior, RecoversThetaFromDirichletData) {
  const auto p0 = parse_distribution(kDiffuseBase);
  const std::vector<GridPoint> grid{{1.0, 1.0, 0.5}, {100.0, 1.0, 0.5}};
  double mass = 0.0;
  const int reps = 5;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(99, static_cast<std::uint64_t>(r));
    const auto draws = sample_sequence(fvddp::testing::zero_state(kDiffuseBase, 1.0), 200, rng);
    const std::vector<Batch> data{{0.0, draws}};
    mass += hyper_posterior(grid, p0, data, {}, 1)[0].posterior;
  }
  EXPECT_GT(mass / reps, 0.9);
}

TEST(FilterJson, RoundTrip) {
  const auto s = two_time_filter();
  const auto back = filter_state_from_json(to_json(s));
  EXPECT_EQ(back.distinct, s.distinct);
  EXPECT_EQ(back.sigma, s.sigma);
  EXPECT_EQ(back.theta(), s.theta());
  EXPECT_EQ(back.log_ml, s.log_ml);
  for (const auto& [n, w] : s.nodes) EXPECT_DOUBLE_EQ(back.nodes.weight(n), w);
  EXPECT_EQ(back.base.p0->describe(), s.base.p0->describe());
  EXPECT_EQ(back.index_of(2), s.index_of(2));
}

TEST(FilterJson, RejectsMalformedDocuments) {
  EXPECT_THROW(filter_state_from_json("{"), InputError);
  EXPECT_THROW(filter_state_from_json("{\"theta\": 1}"), InputError);
}
