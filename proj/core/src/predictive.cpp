#include "fvddp/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvddp/errors.hpp"

namespace fvddp {

PredictiveState::PredictiveState(BaseMeasure base, std::vector<Value> distinct, const WeightedNodeSet& nodes)
    : base_(make_base(base.theta, base.p0)), distinct_(std::move(distinct)) {
  for (std::size_t i = 0; i < distinct_.size(); ++i) {
    if (!index_.emplace(distinct_[i], i).second) throw InputError("distinct values must not repeat");
  }
  if (nodes.empty()) throw InputError("predictive state needs at least one node");
  if (nodes.dim() != distinct_.size()) throw InputError("node dimension does not match distinct values");
  double total = 0.0;
  for (const auto& [n, w] : nodes.sorted()) {
    if (!(w > 0.0)) continue;
    nodes_.push_back(n);
    weights_.push_back(w);
    total += w;
  }
  if (!(total > 0.0)) throw InputError("predictive state has no positive weight");
  for (double& w : weights_) {
    w /= total;
    log_weights_.push_back(std::log(w));
  }
}

std::optional<std::size_t> PredictiveState::index_of(Value y) const {
  auto it = index_.find(y);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int PredictiveState::sample_count(Value y) const {
  auto it = counts_.find(y);
  return it == counts_.end() ? 0 : it->second;
}

double PredictiveState::urn_density(std::size_t j, Value y) const {
  return urn_density(j, base_.pmf(y), index_of(y), sample_count(y));
}

double PredictiveState::urn_density(std::size_t j, double p0y, std::optional<std::size_t> idx, int count) const {
  const MultiplicityVector& n = nodes_[j];
  const double past = idx ? n[*idx] : 0;
  return (base_.theta * p0y + past + count) / (base_.theta + n.total() + k());
}

std::size_t PredictiveState::sample_node(Rng& rng) const {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    acc += weights_[j];
    if (u < acc) return j;
  }
  // Rounding left u above the final partial sum: take the last positive node.
  for (std::size_t j = weights_.size(); j-- > 0;) {
    if (weights_[j] > 0.0) return j;
  }
  return weights_.size() - 1;
}

void PredictiveState::observe(Value y) {
  const double p0y = base_.pmf(y);
  const auto idx = index_of(y);
  const int count = sample_count(y);
  std::vector<double> updated(nodes_.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double d = urn_density(j, p0y, idx, count);
    updated[j] = d > 0.0 ? log_weights_[j] + std::log(d) : -std::numeric_limits<double>::infinity();
    best = std::max(best, updated[j]);
  }
  if (!std::isfinite(best)) {
    throw ModelMisspecification("value " + std::to_string(y) + " is impossible under the predictive");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    weights_[j] = std::exp(updated[j] - best);
    total += weights_[j];
  }
  const double log_total = std::log(total);
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    weights_[j] /= total;
    log_weights_[j] = updated[j] - best - log_total;
  }
  sample_.push_back(y);
  ++counts_[y];
}

UrnCoefficients coefficients(const PredictiveState& state) {
  UrnCoefficients c;
  c.past.assign(state.distinct().size(), 0.0);
  const double theta = state.theta();
  const double k = state.k();
  for (std::size_t j = 0; j < state.node_count(); ++j) {
    const MultiplicityVector& n = state.node(j);
    const double scale = state.weight(j) / (theta + n.total() + k);
    c.fresh += scale * theta;
    for (std::size_t i = 0; i < n.dim(); ++i) c.past[i] += scale * n[i];
    c.current += scale * k;
  }
  return c;
}

double predictive_pmf(const PredictiveState& state, Value y) {
  const UrnCoefficients c = coefficients(state);
  double p = c.fresh * state.base().pmf(y);
  if (auto idx = state.index_of(y)) p += c.past[*idx];
  if (state.k() > 0) p += c.current * state.sample_count(y) / state.k();
  return p;
}

double mixture_pmf(const PredictiveState& state, Value y) {
  const double p0y = state.base().pmf(y);
  const auto idx = state.index_of(y);
  const int count = state.sample_count(y);
  double p = 0.0;
  for (std::size_t j = 0; j < state.node_count(); ++j) p += state.weight(j) * state.urn_density(j, p0y, idx, count);
  return p;
}

Value draw_next(PredictiveState& state, Rng& rng) {
  const MultiplicityVector& n = state.node(state.sample_node(rng));
  const double theta = state.theta();
  const double u = uniform01(rng) * (theta + n.total() + state.k());
  Value y;
  if (u < theta) {
    y = state.base().sample(rng);
  } else if (u < theta + n.total()) {
    int r = std::uniform_int_distribution<int>(0, n.total() - 1)(rng);
    std::size_t i = 0;
    while (r >= n[i]) r -= n[i++];
    y = state.distinct()[i];
  } else {
    const auto& drawn = state.sample();
    y = drawn[std::uniform_int_distribution<std::size_t>(0, drawn.size() - 1)(rng)];
  }
  state.observe(y);
  return y;
}

std::pair<Value, PredictiveState> sample_next(const PredictiveState& state, Rng& rng) {
  PredictiveState next = state;
  const Value y = draw_next(next, rng);
  return {y, std::move(next)};
}

std::vector<Value> sample_sequence(const PredictiveState& state, int k, Rng& rng) {
  if (k < 0) throw InputError("number of draws must be nonnegative");
  PredictiveState s = state;
  std::vector<Value> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(draw_next(s, rng));
  return out;
}

PredictiveState make_predictive(const FilterState& filter, double lag, const PropagationOptions& options,
                                Rng& rng, TransitionCache& cache) {
  if (!(lag >= 0.0)) throw InputError("prediction lag must be nonnegative");
  if (lag == 0.0) return PredictiveState(filter.base, filter.distinct, filter.nodes);
  PropagationOptions opts = options;
  opts.prune_eps = filter.prune_eps;
  return PredictiveState(filter.base, filter.distinct,
                         propagate_weights(filter.nodes, filter.sigma * lag, filter.theta(), opts, rng, cache));
}

PredictiveState exact_predict(const FilterState& filter, double lag, TransitionCache& cache) {
  if (!(lag >= 0.0)) throw InputError("prediction lag must be nonnegative");
  if (lag == 0.0) return PredictiveState(filter.base, filter.distinct, filter.nodes);
  PropagationOptions opts;
  opts.mode = PropagationOptions::Mode::Exact;
  opts.prune_eps = filter.prune_eps;
  return PredictiveState(filter.base, filter.distinct,
                         propagate_weights_exact(filter.nodes, filter.sigma * lag, filter.theta(), opts, cache));
}

PredictiveState approx_predict(const FilterState& filter, double lag, std::size_t particles, Rng& rng) {
  if (particles == 0) throw InputError("particle count must be positive");
  if (!(lag >= 0.0)) throw InputError("prediction lag must be nonnegative");
  return PredictiveState(filter.base, filter.distinct,
                         propagate_weights_mc(filter.nodes, filter.sigma * lag, filter.theta(), particles, rng));
}

double correlation(double theta, double s) {
  if (!(theta > 0.0) || !(s >= 0.0)) throw InputError("correlation needs theta > 0 and s >= 0");
  return std::exp(-0.5 * theta * s) / (theta + 1.0);
}

double PolyaUrn::pmf(Value y) const {
  double p = base.theta * base.pmf(y);
  if (auto it = counts.find(y); it != counts.end()) p += it->second;
  return p / (base.theta + k);
}

PolyaUrn limit_pmf(const PredictiveState& state) {
  return PolyaUrn{state.base(), state.sample_counts(), state.k()};
}

std::vector<Value> predictive_support(const PredictiveState& state, double tail) {
  std::vector<Value> out = state.base().p0->support_cover(tail);
  out.insert(out.end(), state.distinct().begin(), state.distinct().end());
  out.insert(out.end(), state.sample().begin(), state.sample().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double total_variation(const std::function<double(Value)>& f, const std::function<double(Value)>& g,
                       std::span<const Value> support) {
  double l1 = 0.0;
  double mass_f = 0.0;
  double mass_g = 0.0;
  for (Value y : support) {
    const double a = f(y);
    const double b = g(y);
    l1 += std::abs(a - b);
    mass_f += a;
    mass_g += b;
  }
  return 0.5 * (l1 + std::abs(mass_f - mass_g));
}

}  // namespace fvddp
