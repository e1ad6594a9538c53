// Command line front end: filter, predict, partition, hyper, synthetic.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <fstream>
#include <iostream>
#include <string>

#include "fvddp/errors.hpp"
#include "fvddp/workflow.hpp"

namespace fs = std::filesystem;
using namespace fvddp;

namespace {

struct Options {
  std::string input;
  std::string format = "auto";
  std::string out = ".";
  std::string theta_grid = "1";
  std::string theta_prior;
  std::string sigma_grid = "1";
  std::string sigma_prior;
  bool exact = false;
  bool approx = false;
  std::string mode = "posterior";
  int horizon = 16;
  int per_time = 15;
};

DataFormat format_of(const std::string& f) {
  if (f == "csv") return DataFormat::Csv;
  if (f == "json") return DataFormat::Json;
  return DataFormat::Auto;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

template <typename F>
void write_with(const fs::path& path, F&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_file(path, ss.str());
}

void add_model_flags(CLI::App* cmd, Options& o, RunConfig& c) {
  cmd->add_option("--input", o.input, "time,value CSV or JSON batches")->required();
  cmd->add_option("--format", o.format, "input format")->check(CLI::IsMember({"auto", "csv", "json"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--theta-grid", o.theta_grid, "\"a,b,c\" or \"start:stop:step\"");
  cmd->add_option("--theta-prior", o.theta_prior, "prior weights for the theta grid (default uniform)");
  cmd->add_option("--sigma-grid", o.sigma_grid, "\"a,b,c\" or \"start:stop:step\"");
  cmd->add_option("--sigma-prior", o.sigma_prior, "prior weights for the sigma grid (default uniform)");
  cmd->add_option("--base", c.base, "P0 as family:params, e.g. negbin:2,0.5 or poisson:3");
  cmd->add_option("--prune-eps", c.prune_eps, "drop node weights below this");
  cmd->add_option("--particles", c.particles, "Monte Carlo particles");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads (0: all cores)");
  auto* exact = cmd->add_flag("--exact", o.exact, "exact propagation only");
  auto* approx = cmd->add_flag("--approx", o.approx, "Monte Carlo propagation");
  exact->excludes(approx);
}

void finish_config(const Options& o, RunConfig& c) {
  c.thetas = parse_grid(o.theta_grid);
  c.sigmas = parse_grid(o.sigma_grid);
  c.theta_prior = o.theta_prior.empty() ? std::vector<double>{} : parse_grid(o.theta_prior);
  c.sigma_prior = o.sigma_prior.empty() ? std::vector<double>{} : parse_grid(o.sigma_prior);
  c.pipeline = o.exact ? RunConfig::Pipeline::Exact : o.approx ? RunConfig::Pipeline::Approx : RunConfig::Pipeline::Auto;
  c.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleming-Viot dependent Dirichlet process filtering and prediction"};
  app.require_subcommand(1);
  Options o;
  RunConfig c;

  auto* filter = app.add_subcommand("filter", "filter every grid point and checkpoint the states");
  add_model_flags(filter, o, c);

  auto* predict = app.add_subcommand("predict", "posterior predictive pmf with 95% bands");
  add_model_flags(predict, o, c);
  predict->add_option("--lag", c.lag, "prediction lag after the last time");
  predict->add_option("--draws", c.draws, "draws per replicate (0: exact pmf)");
  predict->add_option("--replicates", c.replicates, "replicate chains");

  auto* partition = app.add_subcommand("partition", "random partitions at the prediction time");
  add_model_flags(partition, o, c);
  partition->add_option("--lag", c.lag, "prediction lag after the last time");
  partition->add_option("--size", c.partition_size, "customers per partition");
  partition->add_option("--replicates", c.replicates, "partitions to sample");

  auto* hyper = app.add_subcommand("hyper", "grid posterior or holdout scan over (theta, sigma)");
  add_model_flags(hyper, o, c);
  hyper->add_option("--mode", o.mode, "posterior or holdout")->check(CLI::IsMember({"posterior", "holdout"}));

  auto* synth = app.add_subcommand("synthetic", "two-component drifting Poisson data");
  synth->add_option("--seed", c.seed, "seed");
  synth->add_option("--horizon", o.horizon, "number of collection times");
  synth->add_option("--per-time", o.per_time, "observations per time");
  synth->add_option("--out", o.out, "output CSV path (- for stdout)");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "synthetic") {
      const Dataset data = synthetic(c.seed, o.horizon, o.per_time);
      if (o.out == "-" || o.out == ".") {
        write_csv(data, std::cout);
      } else {
        write_with(o.out, [&](std::ostream& out) { write_csv(data, out); });
      }
      return 0;
    }

    finish_config(o, c);
    const Dataset data = ingest(o.input, format_of(o.format));
    const fs::path dir(o.out);
    fs::create_directories(dir);

    if (command == "filter") {
      const auto report = run_filter_job(c, data);
      write_file(dir / "states.json", report.states);
      write_with(dir / "hyper.csv", [&](std::ostream& out) { write_hyper_csv(report.grid, out); });
      write_file(dir / "manifest.json", report.manifest);
    } else if (command == "predict") {
      const auto report = run_predict(c, data);
      write_with(dir / "pmf.csv", [&](std::ostream& out) { write_pmf_csv(report.rows, out); });
      write_file(dir / "manifest.json", report.manifest);
    } else if (command == "partition") {
      const auto report = run_partition(c, data);
      write_with(dir / "partitions.jsonl", [&](std::ostream& out) { write_partitions_jsonl(report.samples, out); });
      write_with(dir / "histogram.csv", [&](std::ostream& out) { write_histogram_csv(report.histogram, out); });
      write_file(dir / "manifest.json", report.manifest);
    } else if (o.mode == "holdout") {
      const auto report = run_hyper_holdout(c, data);
      write_with(dir / "holdout.csv", [&](std::ostream& out) { write_holdout_csv(report.holdout, out); });
      write_file(dir / "manifest.json", report.manifest);
    } else {
      const auto report = run_hyper_posterior(c, data);
      write_with(dir / "hyper.csv", [&](std::ostream& out) { write_hyper_csv(report.grid, out); });
      write_file(dir / "manifest.json", report.manifest);
    }
    return 0;
  } catch (const std::exception& e) {
    const std::string manifest = failure_manifest(command, c, e.what());
    nlohmann::json err{{"error", e.what()}, {"command", command}};
    std::cerr << err.dump() << '\n';
    if (command != "synthetic") {
      try {
        fs::create_directories(o.out);
        write_file(fs::path(o.out) / "manifest.json", manifest);
      } catch (const std::exception&) {
      }
    }
    return 1;
  }
}
