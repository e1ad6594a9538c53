#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "fvddp/errors.hpp"
#include "fvddp/workflow.hpp"

using namespace fvddp;

namespace {

Dataset csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::string error_of(const std::string& text) {
  try {
    csv(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

RunConfig small_config() {
  RunConfig c;
  c.thetas = {0.5, 2.0};
  c.sigmas = {1.0};
  c.base = "poisson:3";
  c.lag = 0.5;
  c.draws = 20;
  c.replicates = 30;
  c.seed = 7;
  c.threads = 1;
  return c;
}

Dataset two_time_data() { return csv("time,value\n0,1\n0,2\n1,1\n1,2\n"); }

}  // namespace

TEST(Ingest, RowsSharingATimeFormOneBatch) {
  const auto d = csv("time,value\n0,4\n0,7\n");
  ASSERT_EQ(d.batches.size(), 1u);
  EXPECT_EQ(d.batches[0].values, (std::vector<Value>{4, 7}));
}

TEST(Ingest, TwoTimeExample) {
  const auto d = two_time_data();
  ASSERT_EQ(d.batches.size(), 2u);
  EXPECT_EQ(d.batches[1].time, 1.0);
  EXPECT_EQ(d.batches[1].values, (std::vector<Value>{1, 2}));
  EXPECT_EQ(d.observation_count(), 4u);
}

TEST(Ingest, CsvErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("time,value\n1,4\n0,2\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("time,value\n0,abc\n").find("line 2"), std::string::npos);
  EXPECT_FALSE(error_of("").empty());
  EXPECT_FALSE(error_of("time,value\n").empty());
  EXPECT_FALSE(error_of("t,v\n0,1\n").empty());
}

TEST(Ingest, Json) {
  const auto d = parse_json(R"([{"time": 0, "values": [1, 2]}, {"time": 1.5, "values": [2]}])");
  ASSERT_EQ(d.batches.size(), 2u);
  EXPECT_EQ(d.batches[1].time, 1.5);
  EXPECT_THROW(parse_json(R"([{"time": 1, "values": [1]}, {"time": 0, "values": [2]}])"), InputError);
  EXPECT_THROW(parse_json("{"), InputError);
  EXPECT_THROW(parse_json("[]"), InputError);
}

TEST(Ingest, FilesByExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "fvddp_ingest_test";
  std::filesystem::create_directories(dir);
  const auto data = two_time_data();
  {
    std::ofstream out(dir / "data.csv");
    write_csv(data, out);
  }
  {
    std::ofstream out(dir / "data.json");
    out << R"([{"time": 0, "values": [1, 2]}, {"time": 1, "values": [1, 2]}])";
  }
  EXPECT_EQ(ingest(dir / "data.csv"), data);
  EXPECT_EQ(ingest(dir / "data.json"), data);
  EXPECT_THROW(ingest(dir / "missing.csv"), InputError);
  std::filesystem::remove_all(dir);
}

TEST(Ingest, CsvRoundTrip) {
  const auto data = synthetic(3, 4, 6);
  std::ostringstream out;
  write_csv(data, out);
  EXPECT_EQ(csv(out.str()), data);
}

TEST(Synthetic, ShapeAndSupport) {
  const auto d = synthetic(1, 16, 15);
  ASSERT_EQ(d.batches.size(), 16u);
  for (std::size_t t = 0; t < d.batches.size(); ++t) {
    EXPECT_EQ(d.batches[t].time, static_cast<double>(t));
    EXPECT_EQ(d.batches[t].values.size(), 15u);
    for (Value v : d.batches[t].values) EXPECT_GE(v, 0);
  }
  EXPECT_THROW(synthetic(1, 0, 15), InputError);
}

TEST(Synthetic, Reproducible) {
  std::ostringstream a;
  std::ostringstream b;
  write_csv(synthetic(42, 5, 15), a);
  write_csv(synthetic(42, 5, 15), b);
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_csv(synthetic(43, 5, 15), c);
  EXPECT_NE(a.str(), c.str());
}

TEST(GitBlobSha1, KnownDigests) {
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(ParseGrid, ListsAndRanges) {
  EXPECT_EQ(parse_grid("1,100"), (std::vector<double>{1.0, 100.0}));
  const auto r = parse_grid("0.5:15:0.5");
  ASSERT_EQ(r.size(), 30u);
  EXPECT_DOUBLE_EQ(r.front(), 0.5);
  EXPECT_DOUBLE_EQ(r.back(), 15.0);
  EXPECT_THROW(parse_grid(""), InputError);
  EXPECT_THROW(parse_grid("1:0:1"), InputError);
  EXPECT_THROW(parse_grid("a,b"), InputError);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.thetas.clear();
  EXPECT_THROW(c.validate(), InputError);
  c = RunConfig{};
  c.draws = -1;
  EXPECT_THROW(c.validate(), InputError);
  c = RunConfig{};
  c.particles = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = RunConfig{};
  c.theta_prior = {0.5};
  c.thetas = {1.0, 2.0};
  EXPECT_THROW(c.validate(), InputError);
}

TEST(MakeGrid, ProductPrior) {
  RunConfig c;
  c.thetas = {1.0, 2.0};
  c.theta_prior = {0.25, 0.75};
  c.sigmas = {0.5, 1.0};
  const auto grid = make_grid(c);
  ASSERT_EQ(grid.size(), 4u);
  double total = 0.0;
  for (const auto& g : grid) total += g.prior;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(grid[0].prior, 0.125);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({3.0, 1.0, 2.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({5.0}, 0.975), 5.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 0.0), 1.0);
}

TEST(RunPredict, EvaluationOnlyIsNormalized) {
  auto c = small_config();
  c.draws = 0;
  const auto report = run_predict(c, two_time_data());
  double total = 0.0;
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.lo, row.mean);
    EXPECT_EQ(row.hi, row.mean);
    total += row.mean;
  }
  EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(RunPredict, LongLagGivesTheBase) {
  auto c = small_config();
  c.thetas = {1.0};
  c.draws = 0;
  c.lag = 60.0;
  const auto report = run_predict(c, two_time_data());
  const PoissonDistribution p0(3.0);
  for (const auto& row : report.rows) EXPECT_NEAR(row.mean, p0.pmf(row.value), 1e-9);
}

TEST(RunPredict, BandsAndDeterminism) {
  const auto c = small_config();
  const auto data = two_time_data();
  const auto a = run_predict(c, data);
  double total = 0.0;
  for (const auto& row : a.rows) {
    EXPECT_LE(row.lo, row.hi);
    total += row.mean;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  std::ostringstream first;
  std::ostringstream second;
  write_pmf_csv(a.rows, first);
  write_pmf_csv(run_predict(c, data).rows, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().rfind("value,mean,lo,hi\n", 0), 0u);
  EXPECT_NE(a.manifest.find("input_sha1"), std::string::npos);
}

TEST(RunPartition, SingleCustomer) {
  auto c = small_config();
  c.partition_size = 1;
  const auto report = run_partition(c, two_time_data());
  ASSERT_EQ(report.histogram.size(), 1u);
  EXPECT_EQ(report.histogram[0], std::make_pair(1, c.replicates));
}

TEST(RunPartition, ZeroHistoryBlockCountIsHarmonic) {
  auto c = small_config();
  c.thetas = {1.0};
  c.base = std::string(fvddp::testing::kDiffuseBase);
  c.lag = 60.0;
  c.partition_size = 10;
  c.replicates = 4000;
  const auto report = run_partition(c, two_time_data());
  double mean = 0.0;
  int rows = 0;
  for (const auto& [blocks, count] : report.histogram) {
    mean += blocks * count;
    rows += count;
  }
  EXPECT_EQ(rows, c.replicates);
  mean /= rows;
  double expected = 0.0;
  double variance = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double p = 1.0 / i;
    expected += p;
    variance += p * (1 - p);
  }
  EXPECT_NEAR(mean, expected, 4.0 * std::sqrt(variance / rows));
}

TEST(RunHyper, HoldoutScoresEverySigma) {
  auto c = small_config();
  c.sigmas = {0.5, 2.0};
  const auto data = synthetic(5, 4, 10);
  const auto report = run_hyper_holdout(c, data);
  ASSERT_EQ(report.holdout.size(), 2u);
  for (const auto& row : report.holdout) {
    EXPECT_GE(row.sae, 0.0);
    EXPECT_LE(row.sae, 2.0 + 1e-12);
  }
  EXPECT_NE(report.manifest.find("selected_sigma"), std::string::npos);
}

TEST(FailureManifest, NamesTheCommand) {
  const auto m = failure_manifest("predict", RunConfig{}, "boom");
  EXPECT_NE(m.find("\"error\""), std::string::npos);
  EXPECT_NE(m.find("boom"), std::string::npos);
  EXPECT_NE(m.find("predict"), std::string::npos);
}
