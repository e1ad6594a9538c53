#pragma once

// Time-dependent predictive distribution: a mixture over nodes n of Polya
// urns with base theta*P0 + sum_i n_i delta_{y*_i}, extended by the draws
// already made at the prediction time.

#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fvddp/base_measure.hpp"
#include "fvddp/death_process.hpp"
#include "fvddp/filter.hpp"
#include "fvddp/lattice.hpp"

namespace fvddp {

class PredictiveState {
 public:
  PredictiveState(BaseMeasure base, std::vector<Value> distinct, const WeightedNodeSet& nodes);

  const BaseMeasure& base() const { return base_; }
  double theta() const { return base_.theta; }
  const std::vector<Value>& distinct() const { return distinct_; }
  std::optional<std::size_t> index_of(Value y) const;

  /// Nodes in canonical lexicographic order with their current weights.
  std::size_t node_count() const { return nodes_.size(); }
  const MultiplicityVector& node(std::size_t j) const { return nodes_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Draws Y^{1:k} made so far at the prediction time.
  int k() const { return static_cast<int>(sample_.size()); }
  const std::vector<Value>& sample() const { return sample_; }
  int sample_count(Value y) const;
  const std::unordered_map<Value, int>& sample_counts() const { return counts_; }

  /// Urn density of y under node j given the current draws.
  double urn_density(std::size_t j, Value y) const;
  /// Same, with the index of y among the distinct values (or none) and its
  /// current count already resolved.
  double urn_density(std::size_t j, double p0y, std::optional<std::size_t> idx, int count) const;

  /// Node index drawn by its weight, scanning the canonical order.
  std::size_t sample_node(Rng& rng) const;

  /// Appends y to the draws and reweights every node by its urn density.
  /// Throws ModelMisspecification if y is impossible under every node.
  void observe(Value y);

 private:
  BaseMeasure base_;
  std::vector<Value> distinct_;
  std::unordered_map<Value, std::size_t> index_;
  std::vector<MultiplicityVector> nodes_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  std::vector<Value> sample_;
  std::unordered_map<Value, int> counts_;
};

struct UrnCoefficients {
  double fresh = 0.0;         // A_k, weight of a P0 draw
  std::vector<double> past;   // C_{i,k}, weight of copying y*_i
  double current = 0.0;       // B_k, weight of resampling the current draws
};

UrnCoefficients coefficients(const PredictiveState& state);

/// Compact form A p0(y) + C_{index(y)} + B P_k({y}).
double predictive_pmf(const PredictiveState& state, Value y);

/// Sum over nodes of weight times that node's urn density.
double mixture_pmf(const PredictiveState& state, Value y);

/// One exact draw: pick a node, then P0 / past atoms / current draws in
/// proportion theta : |n| : k, then reweight.
std::pair<Value, PredictiveState> sample_next(const PredictiveState& state, Rng& rng);

/// In-place variant used by the sequence and partition samplers.
Value draw_next(PredictiveState& state, Rng& rng);

std::vector<Value> sample_sequence(const PredictiveState& state, int k, Rng& rng);

/// Propagates the filter by sigma * lag (lag >= 0) and opens the predictive.
PredictiveState make_predictive(const FilterState& filter, double lag, const PropagationOptions& options,
                                Rng& rng, TransitionCache& cache = default_transition_cache());

/// Exact propagation only; throws BudgetExceeded on large lattices.
PredictiveState exact_predict(const FilterState& filter, double lag,
                              TransitionCache& cache = default_transition_cache());

/// Monte Carlo propagation with N particles, then exact urn sampling on the
/// reduced node set.
PredictiveState approx_predict(const FilterState& filter, double lag, std::size_t particles, Rng& rng);

/// Corr(Y_t, Y_{t+s}) = exp(-theta s / 2) / (theta + 1).
double correlation(double theta, double s);

/// Plain Polya urn theta/(theta+k) P0 + k/(theta+k) P_k.
struct PolyaUrn {
  BaseMeasure base;
  std::unordered_map<Value, int> counts;
  int k = 0;

  double pmf(Value y) const;
};

/// The predictive's large-lag limit, which forgets the past data.
PolyaUrn limit_pmf(const PredictiveState& state);

/// P0's support cover together with every past and current atom, sorted.
std::vector<Value> predictive_support(const PredictiveState& state, double tail = 1e-12);

/// Half the L1 distance over `support`, plus half the difference of the
/// masses left outside it (exact when both laws are proportional there).
double total_variation(const std::function<double(Value)>& f, const std::function<double(Value)>& g,
                       std::span<const Value> support);

}  // namespace fvddp
