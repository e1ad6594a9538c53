#include "fvddp/filter.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <json.hpp>

#include "fvddp/errors.hpp"

namespace fvddp {

namespace {

void observe(FilterState& s, Value y) {
  std::size_t idx;
  if (auto found = s.index_of(y)) {
    idx = *found;
  } else {
    if (!(s.base.pmf(y) > 0.0)) {
      throw ModelMisspecification("observation " + std::to_string(y) +
                                  " has zero probability under the base measure");
    }
    idx = s.distinct.size();
    s.distinct.push_back(y);
    s.index.emplace(y, idx);
    s.nodes = extend_support(s.nodes, s.distinct.size());
  }

  const double theta = s.base.theta;
  const double fresh = theta * s.base.pmf(y);
  WeightedNodeSet out(s.distinct.size());
  double total = 0.0;
  for (const auto& [n, w] : s.nodes) {
    const double contrib = w * (fresh + n[idx]) / (theta + n.total());
    if (!(contrib > 0.0)) continue;
    MultiplicityVector shifted = n;
    shifted.increment(idx);
    out.add(shifted, contrib);
    total += contrib;
  }
  if (!(total > 0.0)) {
    throw ModelMisspecification("observation " + std::to_string(y) + " has zero likelihood under every node");
  }
  s.log_ml += std::log(total);
  out.normalize();
  s.nodes = std::move(out);
}

}  // namespace

std::optional<std::size_t> FilterState::index_of(Value y) const {
  auto it = index.find(y);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

FilterState init(BaseMeasure base, double sigma, double prune_eps) {
  base = make_base(base.theta, base.p0);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be positive");
  if (!(prune_eps >= 0.0 && prune_eps < 1.0)) throw InputError("prune eps must lie in [0, 1)");
  FilterState s;
  s.nodes = WeightedNodeSet::point_mass(MultiplicityVector(0));
  s.base = std::move(base);
  s.sigma = sigma;
  s.prune_eps = prune_eps;
  return s;
}

FilterState update_one(const FilterState& state, Value y) {
  FilterState s = state;
  observe(s, y);
  s.nodes.prune(s.prune_eps);
  return s;
}

FilterState update_batch(const FilterState& state, std::span<const Value> batch) {
  FilterState s = state;
  if (batch.empty()) return s;
  for (Value y : batch) observe(s, y);
  s.nodes.prune(s.prune_eps);
  return s;
}

FilterState advance_time(const FilterState& state, double lag, const PropagationOptions& options,
                         Rng& rng, TransitionCache& cache) {
  if (!(lag > 0.0)) throw InputError("lag must be positive");
  FilterState s = state;
  PropagationOptions opts = options;
  opts.prune_eps = s.prune_eps;
  s.nodes = propagate_weights(s.nodes, s.sigma * lag, s.base.theta, opts, rng, cache);
  return s;
}

FilterState advance_time(const FilterState& state, double lag, TransitionCache& cache) {
  if (!(lag > 0.0)) throw InputError("lag must be positive");
  FilterState s = state;
  PropagationOptions opts;
  opts.mode = PropagationOptions::Mode::Exact;
  opts.prune_eps = s.prune_eps;
  s.nodes = propagate_weights_exact(s.nodes, s.sigma * lag, s.base.theta, opts, cache);
  return s;
}

double log_marginal_likelihood(const FilterState& state) { return state.log_ml; }

FilterState run_filter(FilterState state, std::span<const Batch> batches, const PropagationOptions& options,
                       Rng& rng) {
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (i > 0) {
      const double lag = batches[i].time - batches[i - 1].time;
      if (!(lag > 0.0)) throw InputError("batch times must be strictly increasing");
      state = advance_time(state, lag, options, rng);
    }
    state = update_batch(state, batches[i].values);
  }
  return state;
}

std::vector<HyperPoint> hyper_posterior(std::span<const GridPoint> grid,
                                        std::shared_ptr<const DiscreteDistribution> p0,
                                        std::span<const Batch> batches, const PropagationOptions& options,
                                        std::uint64_t seed, double prune_eps, unsigned threads) {
  if (grid.empty()) throw InputError("hyperparameter grid is empty");
  double prior_total = 0.0;
  for (const auto& g : grid) {
    if (!(g.prior >= 0.0)) throw InputError("grid prior weights must be nonnegative");
    prior_total += g.prior;
  }
  if (std::abs(prior_total - 1.0) > 1e-9) throw InputError("grid prior weights must sum to 1");

  std::vector<HyperPoint> out(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      out[i].point = grid[i];
      try {
        Rng rng = make_stream(seed, i, 0x4879);
        out[i].state = run_filter(init(make_base(grid[i].theta, p0), grid[i].sigma, prune_eps), batches,
                                  options, rng);
        out[i].log_ml = out[i].state.log_ml;
      } catch (const ModelMisspecification&) {
        out[i].log_ml = -std::numeric_limits<double>::infinity();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, grid.size()));
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

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& h : out) {
    if (h.point.prior > 0.0) best = std::max(best, std::log(h.point.prior) + h.log_ml);
  }
  if (!std::isfinite(best)) throw ModelMisspecification("every grid point has zero likelihood");
  double total = 0.0;
  for (auto& h : out) {
    h.posterior = h.point.prior > 0.0 ? std::exp(std::log(h.point.prior) + h.log_ml - best) : 0.0;
    total += h.posterior;
  }
  for (auto& h : out) h.posterior /= total;
  return out;
}

std::string to_json(const FilterState& state) {
  nlohmann::json j;
  j["distinct"] = state.distinct;
  j["theta"] = state.base.theta;
  j["base"] = state.base.p0->describe();
  j["sigma"] = state.sigma;
  j["log_ml"] = state.log_ml;
  j["prune_eps"] = state.prune_eps;
  auto nodes = nlohmann::json::array();
  for (const auto& [n, w] : state.nodes.sorted()) {
    nodes.push_back({{"counts", std::vector<int>(n.counts().begin(), n.counts().end())}, {"weight", w}});
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

FilterState filter_state_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid filter state JSON: ") + e.what());
  }
  try {
    FilterState s = init(make_base(j.at("theta").get<double>(), parse_distribution(j.at("base").get<std::string>())),
                         j.at("sigma").get<double>(), j.value("prune_eps", kDefaultPruneEps));
    s.distinct = j.at("distinct").get<std::vector<Value>>();
    for (std::size_t i = 0; i < s.distinct.size(); ++i) {
      if (!s.index.emplace(s.distinct[i], i).second) throw InputError("duplicate distinct value in filter state");
    }
    s.log_ml = j.at("log_ml").get<double>();
    WeightedNodeSet nodes(s.distinct.size());
    for (const auto& e : j.at("nodes")) {
      auto counts = e.at("counts").get<std::vector<int>>();
      if (counts.size() != s.distinct.size()) throw InputError("node dimension does not match distinct values");
      nodes.add(MultiplicityVector(std::move(counts)), e.at("weight").get<double>());
    }
    if (nodes.empty()) throw InputError("filter state has no nodes");
    nodes.normalize();
    s.nodes = std::move(nodes);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid filter state JSON: ") + e.what());
  }
}

}  // namespace fvddp
