#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fvddp/base_measure.hpp"
#include "fvddp/errors.hpp"

using namespace fvddp;

namespace {

double mass_over_cover(const DiscreteDistribution& d, double tail) {
  double s = 0.0;
  for (Value y : d.support_cover(tail)) s += d.pmf(y);
  return s;
}

}  // namespace

TEST(BaseMeasure, PoissonPmf) {
  PoissonDistribution d(3.0);
  EXPECT_NEAR(d.pmf(0), std::exp(-3.0), 1e-15);
  EXPECT_NEAR(d.pmf(2), 4.5 * std::exp(-3.0), 1e-15);
  EXPECT_EQ(d.pmf(-1), 0.0);
  EXPECT_GE(mass_over_cover(d, 1e-12), 1.0 - 1e-12);
}

TEST(BaseMeasure, NegativeBinomialPmf) {
  NegativeBinomialDistribution d(2.0, 0.5);
  // C(k+1, k) 0.5^2 0.5^k = (k+1) / 2^{k+2}
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(d.pmf(k), (k + 1) / std::pow(2.0, k + 2), 1e-15);
  EXPECT_GE(mass_over_cover(d, 1e-12), 1.0 - 1e-12);
}

TEST(BaseMeasure, BinomialPmf) {
  BinomialDistribution d(4, 0.25);
  EXPECT_NEAR(d.pmf(1), 4 * 0.25 * std::pow(0.75, 3), 1e-15);
  EXPECT_EQ(d.pmf(5), 0.0);
  EXPECT_NEAR(mass_over_cover(d, 0.0), 1.0, 1e-14);
}

TEST(BaseMeasure, UniformFamilies) {
  UniformRangeDistribution r(3, 7);
  EXPECT_DOUBLE_EQ(r.pmf(5), 0.2);
  EXPECT_EQ(r.pmf(8), 0.0);
  const auto set = TableDistribution::uniform_over({4, 9, 4});
  EXPECT_DOUBLE_EQ(set.pmf(4), 0.5);
  EXPECT_DOUBLE_EQ(set.pmf(9), 0.5);
}

TEST(BaseMeasure, TableMustSumToOne) {
  EXPECT_THROW(TableDistribution({{1, 0.5}, {2, 0.4}}), InputError);
  EXPECT_THROW(TableDistribution({{1, -0.5}, {2, 1.5}}), InputError);
  TableDistribution ok({{1, 0.25}, {2, 0.75}});
  EXPECT_DOUBLE_EQ(ok.pmf(2), 0.75);
}

TEST(BaseMeasure, SamplingFollowsThePmf) {
  TableDistribution d({{1, 0.2}, {5, 0.8}});
  Rng rng(3);
  const int N = 50'000;
  int fives = 0;
  for (int i = 0; i < N; ++i) fives += d.sample(rng) == 5;
  EXPECT_NEAR(fives / double(N), 0.8, 4.0 * std::sqrt(0.16 / N));

  NegativeBinomialDistribution nb(2.0, 0.5);
  double mean = 0.0;
  for (int i = 0; i < N; ++i) mean += static_cast<double>(nb.sample(rng));
  EXPECT_NEAR(mean / N, 2.0, 4.0 * std::sqrt(4.0 / N));
}

TEST(ParseDistribution, RoundTripsThroughDescribe) {
  for (const char* spec : {"poisson:3", "negbin:2,0.5", "binomial:99,0.3", "uniform:1..6", "uniform:2,4,8",
                           "table:0=0.25,3=0.75"}) {
    const auto d = parse_distribution(spec);
    const auto again = parse_distribution(d->describe());
    for (Value y = -1; y < 12; ++y) EXPECT_DOUBLE_EQ(d->pmf(y), again->pmf(y)) << spec;
  }
}

TEST(ParseDistribution, RejectsMalformedSpecs) {
  EXPECT_THROW(parse_distribution("poisson"), InputError);
  EXPECT_THROW(parse_distribution("poisson:-1"), InputError);
  EXPECT_THROW(parse_distribution("poisson:abc"), InputError);
  EXPECT_THROW(parse_distribution("negbin:2"), InputError);
  EXPECT_THROW(parse_distribution("gamma:1,2"), InputError);
  EXPECT_THROW(parse_distribution("table:1"), InputError);
  EXPECT_THROW(parse_distribution("uniform:5..1"), InputError);
}

TEST(MakeBase, ValidatesTheta) {
  EXPECT_THROW(make_base(0.0, parse_distribution("poisson:1")), InputError);
  EXPECT_THROW(make_base(1.0, nullptr), InputError);
  EXPECT_DOUBLE_EQ(make_base(2.0, parse_distribution("poisson:1")).theta, 2.0);
}
