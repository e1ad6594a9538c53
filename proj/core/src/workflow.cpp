#include "fvddp/workflow.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fvddp/errors.hpp"

namespace fvddp {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTagPredictive = 0x50;
constexpr std::uint64_t kTagDraws = 0x44;
constexpr std::uint64_t kTagPartition = 0x51;
constexpr std::uint64_t kTagSynthetic = 0x53;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_time(double t) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t);
  return std::string(buf, ptr);
}

std::string format_prob(double p) {
  std::ostringstream os;
  os << std::setprecision(12) << p;
  return os.str();
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PropagationOptions propagation(const RunConfig& c) {
  PropagationOptions opts;
  opts.particles = c.particles;
  opts.prune_eps = c.prune_eps;
  switch (c.pipeline) {
    case RunConfig::Pipeline::Exact:
      opts.mode = PropagationOptions::Mode::Exact;
      break;
    case RunConfig::Pipeline::Approx:
      opts.mode = PropagationOptions::Mode::MonteCarlo;
      break;
    case RunConfig::Pipeline::Auto:
      opts.mode = PropagationOptions::Mode::Auto;
      break;
  }
  return opts;
}

const char* pipeline_name(RunConfig::Pipeline p) {
  switch (p) {
    case RunConfig::Pipeline::Exact:
      return "exact";
    case RunConfig::Pipeline::Approx:
      return "approx";
    default:
      return "auto";
  }
}

json config_json(const RunConfig& c) {
  return {{"thetas", c.thetas},
          {"theta_prior", c.theta_prior},
          {"sigmas", c.sigmas},
          {"sigma_prior", c.sigma_prior},
          {"base", c.base},
          {"lag", c.lag},
          {"draws", c.draws},
          {"replicates", c.replicates},
          {"particles", c.particles},
          {"prune_eps", c.prune_eps},
          {"seed", c.seed},
          {"pipeline", pipeline_name(c.pipeline)},
          {"partition_size", c.partition_size}};
}

json grid_json(const std::vector<HyperPoint>& grid) {
  json out = json::array();
  for (const auto& h : grid) {
    out.push_back({{"theta", h.point.theta},
                   {"sigma", h.point.sigma},
                   {"prior", h.point.prior},
                   {"log_ml", std::isfinite(h.log_ml) ? json(h.log_ml) : json(nullptr)},
                   {"posterior", h.posterior}});
  }
  return out;
}

std::string dataset_hash(const Dataset& data) {
  std::ostringstream os;
  write_csv(data, os);
  return git_blob_sha1(os.str());
}

json manifest_base(std::string_view command, const RunConfig& c, const Dataset* data, Clock::time_point start) {
  json m;
  m["command"] = command;
  m["status"] = "ok";
  m["config"] = config_json(c);
  m["seed"] = c.seed;
  if (data) {
    m["input_sha1"] = dataset_hash(*data);
    m["observations"] = data->observation_count();
    m["times"] = data->batches.size();
  }
  m["runtime_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  return m;
}

// Predictive state at the configured lag for one grid point.
PredictiveState open_predictive(const FilterState& state, const RunConfig& c, double lag, Rng& rng) {
  bool approx = c.pipeline == RunConfig::Pipeline::Approx;
  if (c.pipeline == RunConfig::Pipeline::Auto) {
    try {
      approx = lattice_size(state.nodes.top()) > kApproxLatticeThreshold;
    } catch (const std::overflow_error&) {
      approx = true;
    }
  }
  if (!approx) {
    try {
      return exact_predict(state, lag);
    } catch (const BudgetExceeded&) {
      if (c.pipeline == RunConfig::Pipeline::Exact) throw;
    }
  }
  return approx_predict(state, lag, c.particles, rng);
}

std::vector<HyperPoint> grid_posterior(const RunConfig& c, const Dataset& data) {
  const auto grid = make_grid(c);
  return hyper_posterior(grid, parse_distribution(c.base), data.batches, propagation(c), c.seed, c.prune_eps,
                         c.threads);
}

// Index of the grid point selected by u under the posterior weights.
std::size_t pick_grid(const std::vector<HyperPoint>& grid, double u) {
  double acc = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    acc += grid[g].posterior;
    if (u < acc) return g;
  }
  for (std::size_t g = grid.size(); g-- > 0;) {
    if (grid[g].posterior > 0.0) return g;
  }
  return grid.size() - 1;
}

}  // namespace

std::size_t Dataset::observation_count() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.values.size();
  return n;
}

bool Dataset::operator==(const Dataset& other) const {
  if (batches.size() != other.batches.size()) return false;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (batches[i].time != other.batches[i].time || batches[i].values != other.batches[i].values) return false;
  }
  return true;
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty()) continue;
    if (!header) {
      std::string compact;
      for (char ch : row) {
        if (ch != ' ' && ch != '\t') compact += ch;
      }
      if (compact != "time,value") {
        throw InputError("line " + std::to_string(line_no) + ": expected header 'time,value'");
      }
      header = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
      throw InputError("line " + std::to_string(line_no) + ": expected two fields");
    }
    const std::string ts = trim(std::string_view(row).substr(0, comma));
    const std::string vs = trim(std::string_view(row).substr(comma + 1));
    double t = 0.0;
    Value v = 0;
    auto rt = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    if (ts.empty() || rt.ec != std::errc() || rt.ptr != ts.data() + ts.size() || !std::isfinite(t)) {
      throw InputError("line " + std::to_string(line_no) + ": invalid time '" + ts + "'");
    }
    auto rv = std::from_chars(vs.data(), vs.data() + vs.size(), v);
    if (vs.empty() || rv.ec != std::errc() || rv.ptr != vs.data() + vs.size()) {
      throw InputError("line " + std::to_string(line_no) + ": invalid value '" + vs + "'");
    }
    if (data.batches.empty() || t > data.batches.back().time) {
      data.batches.push_back({t, {}});
    } else if (t < data.batches.back().time) {
      throw InputError("line " + std::to_string(line_no) + ": time " + ts + " is earlier than the previous row");
    }
    data.batches.back().values.push_back(v);
  }
  if (!header) throw InputError("empty file");
  if (data.batches.empty()) throw InputError("file has a header but no observations");
  return data;
}

Dataset parse_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw InputError("JSON input must be an array of {time, values}");
  if (j.empty()) throw InputError("empty file");
  Dataset data;
  std::size_t nonempty = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("time") || !e.contains("values") || !e["time"].is_number() ||
        !e["values"].is_array()) {
      throw InputError(where + ": expected {\"time\": number, \"values\": [integers]}");
    }
    Batch b;
    b.time = e["time"].get<double>();
    if (!std::isfinite(b.time)) throw InputError(where + ": time must be finite");
    for (const auto& v : e["values"]) {
      if (!v.is_number_integer()) throw InputError(where + ": values must be integers");
      b.values.push_back(v.get<Value>());
    }
    if (!data.batches.empty() && !(b.time > data.batches.back().time)) {
      throw InputError(where + ": times must be strictly increasing");
    }
    nonempty += b.values.empty() ? 0 : 1;
    data.batches.push_back(std::move(b));
  }
  if (nonempty == 0) throw InputError("dataset has no observations");
  return data;
}

Dataset ingest(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (format == DataFormat::Auto) format = path.extension() == ".json" ? DataFormat::Json : DataFormat::Csv;
  if (format == DataFormat::Json) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str());
  }
  return parse_csv(in);
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << "time,value\n";
  for (const auto& b : data.batches) {
    const std::string t = format_time(b.time);
    for (Value v : b.values) out << t << ',' << v << '\n';
  }
}

Dataset synthetic(std::uint64_t seed, int horizon, int per_time) {
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (per_time < 1) throw InputError("observations per time must be at least 1");
  Rng rng = make_stream(seed, 0, kTagSynthetic);
  std::exponential_distribution<double> step(1.0);
  double mu = 0.2;
  double nu = 0.2;
  Dataset data;
  for (int t = 0; t < horizon; ++t) {
    if (t > 0) {
      mu += step(rng);
      nu += step(rng);
    }
    Batch b{static_cast<double>(t), {}};
    for (int i = 0; i < per_time; ++i) {
      if (uniform01(rng) < 0.5) {
        b.values.push_back(std::poisson_distribution<Value>(1.0 / mu)(rng));
      } else {
        b.values.push_back(5 + std::poisson_distribution<Value>(1.0 / nu)(rng));
      }
    }
    data.batches.push_back(std::move(b));
  }
  return data;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

void RunConfig::validate() const {
  if (thetas.empty() || sigmas.empty()) throw InputError("theta and sigma grids must be nonempty");
  for (double t : thetas) {
    if (!(t > 0.0)) throw InputError("theta grid values must be positive");
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) throw InputError("sigma grid values must be positive");
  }
  if (!theta_prior.empty() && theta_prior.size() != thetas.size()) throw InputError("theta prior size mismatch");
  if (!sigma_prior.empty() && sigma_prior.size() != sigmas.size()) throw InputError("sigma prior size mismatch");
  if (!(lag >= 0.0)) throw InputError("lag must be nonnegative");
  if (draws < 0) throw InputError("draws must be nonnegative");
  if (replicates < 1) throw InputError("replicates must be at least 1");
  if (particles < 1) throw InputError("particles must be at least 1");
  if (!(prune_eps >= 0.0 && prune_eps < 1.0)) throw InputError("prune eps must lie in [0, 1)");
  if (partition_size < 1) throw InputError("partition size must be at least 1");
  parse_distribution(base);
}

std::vector<GridPoint> make_grid(const RunConfig& config) {
  config.validate();
  auto weights = [](const std::vector<double>& prior, std::size_t n) {
    std::vector<double> w = prior.empty() ? std::vector<double>(n, 1.0) : prior;
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw InputError("prior weights must be nonnegative");
      total += x;
    }
    if (!(total > 0.0)) throw InputError("prior weights must have positive total");
    for (double& x : w) x /= total;
    return w;
  };
  const auto wt = weights(config.theta_prior, config.thetas.size());
  const auto ws = weights(config.sigma_prior, config.sigmas.size());
  std::vector<GridPoint> grid;
  for (std::size_t i = 0; i < config.thetas.size(); ++i) {
    for (std::size_t j = 0; j < config.sigmas.size(); ++j) {
      grid.push_back({config.thetas[i], config.sigmas[j], wt[i] * ws[j]});
    }
  }
  double total = 0.0;
  for (const auto& g : grid) total += g.prior;
  for (auto& g : grid) g.prior /= total;
  return grid;
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [&](std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
      throw InputError("invalid grid value '" + t + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<double> out;
  const auto c1 = text.find(':');
  if (c1 != std::string_view::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw InputError("range grids look like start:stop:step");
    const double start = number(text.substr(0, c1));
    const double stop = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) throw InputError("range grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100'000) throw InputError("range grid is too long");
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(number(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PredictReport run_predict(const RunConfig& config, const Dataset& data) {
  const auto start = Clock::now();
  PredictReport report;
  report.grid = grid_posterior(config, data);

  // Predictive states are opened once per grid point that can be selected.
  std::vector<std::optional<PredictiveState>> states(report.grid.size());
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    if (report.grid[g].posterior <= 0.0) continue;
    Rng rng = make_stream(config.seed, g, kTagPredictive);
    states[g] = open_predictive(report.grid[g].state, config, config.lag, rng);
  }

  if (config.draws == 0) {
    std::vector<Value> support;
    for (const auto& s : states) {
      if (!s) continue;
      const auto part = predictive_support(*s);
      support.insert(support.end(), part.begin(), part.end());
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    for (Value y : support) {
      double p = 0.0;
      for (std::size_t g = 0; g < states.size(); ++g) {
        if (states[g]) p += report.grid[g].posterior * predictive_pmf(*states[g], y);
      }
      if (p > 0.0) report.rows.push_back({y, p, p, p});
    }
  } else {
    const auto R = static_cast<std::size_t>(config.replicates);
    std::vector<std::map<Value, int>> tallies(R);
    parallel_for(R, config.threads, [&](std::size_t r) {
      Rng rng = make_stream(config.seed, r, kTagDraws);
      const std::size_t g = pick_grid(report.grid, uniform01(rng));
      for (Value y : sample_sequence(*states[g], config.draws, rng)) ++tallies[r][y];
    });
    std::map<Value, std::vector<double>> freq;
    for (std::size_t r = 0; r < R; ++r) {
      for (const auto& [y, c] : tallies[r]) {
        auto& f = freq[y];
        f.resize(R, 0.0);
        f[r] = static_cast<double>(c) / config.draws;
      }
    }
    for (auto& [y, f] : freq) {
      const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(R);
      report.rows.push_back({y, mean, quantile(f, 0.025), quantile(f, 0.975)});
    }
  }

  json m = manifest_base("predict", config, &data, start);
  m["grid"] = grid_json(report.grid);
  m["rows"] = report.rows.size();
  report.manifest = m.dump(2);
  return report;
}

PartitionReport run_partition(const RunConfig& config, const Dataset& data) {
  const auto start = Clock::now();
  PartitionReport report;
  const auto grid = grid_posterior(config, data);
  std::vector<std::optional<PredictiveState>> states(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g].posterior <= 0.0) continue;
    Rng rng = make_stream(config.seed, g, kTagPredictive);
    states[g] = open_predictive(grid[g].state, config, config.lag, rng);
  }
  const auto R = static_cast<std::size_t>(config.replicates);
  report.samples.resize(R);
  parallel_for(R, config.threads, [&](std::size_t r) {
    Rng rng = make_stream(config.seed, r, kTagPartition);
    const std::size_t g = pick_grid(grid, uniform01(rng));
    report.samples[r] = sample_partition(*states[g], config.partition_size, rng);
  });
  std::map<int, int> hist;
  for (const auto& s : report.samples) ++hist[static_cast<int>(s.blocks.size())];
  report.histogram.assign(hist.begin(), hist.end());

  json m = manifest_base("partition", config, &data, start);
  m["grid"] = grid_json(grid);
  report.manifest = m.dump(2);
  return report;
}

FilterReport run_filter_job(const RunConfig& config, const Dataset& data) {
  const auto start = Clock::now();
  FilterReport report;
  report.grid = grid_posterior(config, data);
  json states = json::array();
  for (const auto& h : report.grid) states.push_back(json::parse(to_json(h.state)));
  report.states = states.dump();
  json m = manifest_base("filter", config, &data, start);
  m["grid"] = grid_json(report.grid);
  report.manifest = m.dump(2);
  return report;
}

HyperReport run_hyper_posterior(const RunConfig& config, const Dataset& data) {
  const auto start = Clock::now();
  HyperReport report;
  report.grid = grid_posterior(config, data);
  json m = manifest_base("hyper", config, &data, start);
  m["mode"] = "posterior";
  m["grid"] = grid_json(report.grid);
  report.manifest = m.dump(2);
  return report;
}

HyperReport run_hyper_holdout(const RunConfig& config, const Dataset& data) {
  const auto start = Clock::now();
  if (data.batches.size() < 2) throw InputError("holdout mode needs at least two collection times");
  Dataset train;
  train.batches.assign(data.batches.begin(), data.batches.end() - 1);
  const Batch& test = data.batches.back();
  if (test.values.empty()) throw InputError("holdout batch is empty");
  const double lag = test.time - train.batches.back().time;

  std::map<Value, double> empirical;
  for (Value v : test.values) empirical[v] += 1.0 / static_cast<double>(test.values.size());

  HyperReport report;
  json per_sigma = json::array();
  for (std::size_t j = 0; j < config.sigmas.size(); ++j) {
    RunConfig sub = config;
    sub.sigmas = {config.sigmas[j]};
    sub.sigma_prior.clear();
    const auto grid = grid_posterior(sub, train);
    std::vector<std::optional<PredictiveState>> states(grid.size());
    std::vector<Value> support;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (grid[g].posterior <= 0.0) continue;
      Rng rng = make_stream(config.seed, g, kTagPredictive);
      states[g] = open_predictive(grid[g].state, config, lag, rng);
      const auto part = predictive_support(*states[g]);
      support.insert(support.end(), part.begin(), part.end());
    }
    for (const auto& [v, p] : empirical) support.push_back(v);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    double sae = 0.0;
    double covered = 0.0;
    for (Value y : support) {
      double p = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (states[g]) p += grid[g].posterior * predictive_pmf(*states[g], y);
      }
      covered += p;
      auto it = empirical.find(y);
      sae += std::abs(p - (it == empirical.end() ? 0.0 : it->second));
    }
    sae += std::max(0.0, 1.0 - covered);
    report.holdout.push_back({config.sigmas[j], sae});
    per_sigma.push_back({{"sigma", config.sigmas[j]}, {"sae", sae}, {"grid", grid_json(grid)}});
  }
  json m = manifest_base("hyper", config, &data, start);
  m["mode"] = "holdout";
  m["holdout"] = per_sigma;
  const auto best = std::min_element(report.holdout.begin(), report.holdout.end(),
                                     [](const HoldoutRow& a, const HoldoutRow& b) { return a.sae < b.sae; });
  m["selected_sigma"] = best->sigma;
  report.manifest = m.dump(2);
  return report;
}

void write_pmf_csv(const std::vector<PmfRow>& rows, std::ostream& out) {
  out << "value,mean,lo,hi\n";
  for (const auto& r : rows) {
    out << r.value << ',' << format_prob(r.mean) << ',' << format_prob(r.lo) << ',' << format_prob(r.hi) << '\n';
  }
}

void write_partitions_jsonl(const std::vector<PartitionSample>& samples, std::ostream& out) {
  for (const auto& s : samples) {
    json blocks = json::array();
    for (const auto& b : s.blocks) blocks.push_back({{"value", b.value}, {"size", b.size}});
    out << json{{"blocks", blocks}}.dump() << '\n';
  }
}

void write_histogram_csv(const std::vector<std::pair<int, int>>& histogram, std::ostream& out) {
  out << "blocks,count\n";
  for (const auto& [k, c] : histogram) out << k << ',' << c << '\n';
}

void write_hyper_csv(const std::vector<HyperPoint>& grid, std::ostream& out) {
  out << "theta,sigma,prior,log_ml,posterior\n";
  for (const auto& h : grid) {
    out << format_prob(h.point.theta) << ',' << format_prob(h.point.sigma) << ',' << format_prob(h.point.prior)
        << ',' << format_prob(h.log_ml) << ',' << format_prob(h.posterior) << '\n';
  }
}

void write_holdout_csv(const std::vector<HoldoutRow>& rows, std::ostream& out) {
  out << "sigma,sae\n";
  for (const auto& r : rows) out << format_prob(r.sigma) << ',' << format_prob(r.sae) << '\n';
}

std::string failure_manifest(std::string_view command, const RunConfig& config, std::string_view message) {
  json m;
  m["command"] = command;
  m["status"] = "error";
  m["error"] = message;
  m["config"] = config_json(config);
  m["seed"] = config.seed;
  return m.dump(2);
}

}  // namespace fvddp
