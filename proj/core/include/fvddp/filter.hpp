#pragma once

// Posterior law of the latent measure across collection times: a finite
// mixture of Dirichlet processes indexed by multiplicity vectors over the
// distinct values seen so far.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fvddp/base_measure.hpp"
#include "fvddp/death_process.hpp"
#include "fvddp/lattice.hpp"

namespace fvddp {

struct FilterState {
  std::vector<Value> distinct;  // first-appearance order
  std::unordered_map<Value, std::size_t> index;
  WeightedNodeSet nodes;
  BaseMeasure base;
  double sigma = 1.0;
  double log_ml = 0.0;
  double prune_eps = kDefaultPruneEps;

  std::optional<std::size_t> index_of(Value y) const;
  double theta() const { return base.theta; }
};

/// One collection time.
struct Batch {
  double time = 0.0;
  std::vector<Value> values;
};

FilterState init(BaseMeasure base, double sigma, double prune_eps = kDefaultPruneEps);

/// Conditions on one more observation at the current time. Throws
/// ModelMisspecification when y has zero likelihood under every node.
FilterState update_one(const FilterState& state, Value y);

/// Folds update_one over the batch, pruning once at the end.
FilterState update_batch(const FilterState& state, std::span<const Value> batch);

/// Propagates the node weights by sigma * lag. Exact unless the options ask
/// for (or the exact budget forces) Monte Carlo, which draws from `rng`.
FilterState advance_time(const FilterState& state, double lag, const PropagationOptions& options,
                         Rng& rng, TransitionCache& cache = default_transition_cache());

/// Exact-only variant; throws BudgetExceeded rather than sampling.
FilterState advance_time(const FilterState& state, double lag,
                         TransitionCache& cache = default_transition_cache());

double log_marginal_likelihood(const FilterState& state);

/// Runs the filter through every batch, advancing by the gaps between times.
FilterState run_filter(FilterState state, std::span<const Batch> batches,
                       const PropagationOptions& options, Rng& rng);

struct GridPoint {
  double theta = 1.0;
  double sigma = 1.0;
  double prior = 1.0;
};

struct HyperPoint {
  GridPoint point;
  double log_ml = 0.0;
  double posterior = 0.0;
  FilterState state;
};

/// One filter per grid point (run in parallel, one seeded stream each) and
/// posterior weights proportional to prior * exp(log_ml).
std::vector<HyperPoint> hyper_posterior(std::span<const GridPoint> grid,
                                        std::shared_ptr<const DiscreteDistribution> p0,
                                        std::span<const Batch> batches,
                                        const PropagationOptions& options, std::uint64_t seed,
                                        double prune_eps = kDefaultPruneEps, unsigned threads = 0);

/// JSON checkpoint: distinct values, node/weight pairs, theta, sigma, base, log_ml.
std::string to_json(const FilterState& state);
FilterState filter_state_from_json(std::string_view text);

}  // namespace fvddp
