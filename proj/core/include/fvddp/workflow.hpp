#pragma once

// Batch jobs behind the command line tool: data ingestion, the synthetic
// generator, grid hyperpriors, predictive summaries and partition runs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fvddp/filter.hpp"
#include "fvddp/partition.hpp"
#include "fvddp/predictive.hpp"

namespace fvddp {

struct Dataset {
  std::vector<Batch> batches;  // strictly increasing times

  std::size_t observation_count() const;
  bool operator==(const Dataset& other) const;
};

enum class DataFormat { Auto, Csv, Json };

/// Reads `time,value` CSV or a JSON array of {time, values[]}. Rows sharing a
/// time form one batch. Throws InputError with a line number on bad rows,
/// non-monotone times or an empty file.
Dataset ingest(const std::filesystem::path& path, DataFormat format = DataFormat::Auto);
Dataset parse_csv(std::istream& in);
Dataset parse_json(std::string_view text);

void write_csv(const Dataset& data, std::ostream& out);

/// Two-component translated Poisson mixture with drifting rates, observed at
/// times 0..horizon-1.
Dataset synthetic(std::uint64_t seed, int horizon, int per_time);

/// Git blob hash (SHA-1 of "blob <size>\0" + content), hex encoded.
std::string git_blob_sha1(std::string_view content);

struct RunConfig {
  enum class Pipeline { Auto, Exact, Approx };

  std::vector<double> thetas{1.0};
  std::vector<double> theta_prior;  // empty means uniform
  std::vector<double> sigmas{1.0};
  std::vector<double> sigma_prior;
  std::string base = "negbin:2,0.5";
  double lag = 1.0;
  int draws = 1000;
  int replicates = 500;
  std::size_t particles = 10'000;
  double prune_eps = kDefaultPruneEps;
  std::uint64_t seed = 1;
  Pipeline pipeline = Pipeline::Auto;
  int partition_size = 10;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Throws InputError on empty grids, bad priors, negative lag, k < 0, N < 1.
  void validate() const;
};

/// Product grid with prior theta_prior[i] * sigma_prior[j].
std::vector<GridPoint> make_grid(const RunConfig& config);

/// Parses "a,b,c" or "start:stop:step" (inclusive).
std::vector<double> parse_grid(std::string_view text);

/// Above this lattice size the automatic pipeline predicts by Monte Carlo.
inline constexpr std::uint64_t kApproxLatticeThreshold = 100'000;

struct PmfRow {
  Value value = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct PredictReport {
  std::vector<PmfRow> rows;
  std::vector<HyperPoint> grid;
  std::string manifest;  // JSON
};

/// Hyperposterior over the grid, then R replicate chains of k predictive draws
/// at the configured lag, each chain at a grid point drawn from the posterior.
/// Rows hold the mean and 2.5%/97.5% quantiles of per-chain frequencies. With
/// k = 0 the rows are the exact mixture pmf instead.
PredictReport run_predict(const RunConfig& config, const Dataset& data);

struct PartitionReport {
  std::vector<PartitionSample> samples;
  std::vector<std::pair<int, int>> histogram;  // (number of blocks, count)
  std::string manifest;
};

PartitionReport run_partition(const RunConfig& config, const Dataset& data);

struct FilterReport {
  std::vector<HyperPoint> grid;
  std::string states;  // JSON array of checkpoints
  std::string manifest;
};

FilterReport run_filter_job(const RunConfig& config, const Dataset& data);

struct HoldoutRow {
  double sigma = 0.0;
  double sae = 0.0;
};

struct HyperReport {
  std::vector<HyperPoint> grid;     // posterior mode
  std::vector<HoldoutRow> holdout;  // holdout mode
  std::string manifest;
};

/// Grid posterior over (theta, sigma).
HyperReport run_hyper_posterior(const RunConfig& config, const Dataset& data);

/// Trains on every batch but the last and scores each sigma by the sum of
/// absolute errors between the posterior predictive pmf (mixed over theta) and
/// the empirical pmf of the last batch.
HyperReport run_hyper_holdout(const RunConfig& config, const Dataset& data);

void write_pmf_csv(const std::vector<PmfRow>& rows, std::ostream& out);
void write_partitions_jsonl(const std::vector<PartitionSample>& samples, std::ostream& out);
void write_histogram_csv(const std::vector<std::pair<int, int>>& histogram, std::ostream& out);
void write_hyper_csv(const std::vector<HyperPoint>& grid, std::ostream& out);
void write_holdout_csv(const std::vector<HoldoutRow>& rows, std::ostream& out);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

/// {"status":"error", ...} manifest for a failed command.
std::string failure_manifest(std::string_view command, const RunConfig& config, std::string_view message);

}  // namespace fvddp
