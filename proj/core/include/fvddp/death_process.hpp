#pragma once

// Pure-death processes driving time propagation of the filter and predictive.
//
// The one-dimensional process jumps m -> m-1 at rate m(theta+m-1)/2. Its
// multidimensional counterpart on multiplicity vectors removes one item at a
// time uniformly at random, so a transition factorises into a level
// transition times a multivariate hypergeometric mass.

#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "fvddp/lattice.hpp"
#include "fvddp/random.hpp"

namespace fvddp {

/// Death rate m(theta + m - 1)/2 at level m.
double rate(int m, double theta);

/// p_{m,n}(t) by the alternating-sum formula, evaluated in extended precision.
/// For n == 0 the value is the complement of the rest of the row.
/// Throws NumericalInstability when the evaluation leaves [-1e-8, 1 + 1e-8]
/// or the rates are degenerate.
double level_transition(int m, int n, double t, double theta);

/// The full row {p_{m,n}(t)}_{n=0..m}, same failure semantics as above.
std::vector<double> level_transition_row(int m, double t, double theta);

/// Memoised level rows keyed by (m, t, theta). Rows whose closed-form
/// evaluation fails are estimated by simulation and flagged. Safe for
/// concurrent use.
class TransitionCache {
 public:
  struct Row {
    std::vector<double> probs;
    bool simulated = false;
  };

  explicit TransitionCache(std::size_t fallback_trajectories = 1'000'000)
      : fallback_trajectories_(fallback_trajectories) {}

  const Row& row(int m, double t, double theta);
  std::size_t size() const;
  void clear();

 private:
  struct Key {
    int m;
    double t;
    double theta;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::size_t fallback_trajectories_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, std::unique_ptr<Row>, KeyHash> rows_;
};

/// Process-wide cache used when none is supplied.
TransitionCache& default_transition_cache();

/// Multivariate hypergeometric mass of keeping `n` out of composition `m`.
double hypergeometric_keep(const MultiplicityVector& m, const MultiplicityVector& n);

/// p_{m,n}(t) = p_{|m|,|n|}(t) * HG(m - n; m, |m - n|).
double node_transition(const MultiplicityVector& m, const MultiplicityVector& n, double t,
                       double theta, TransitionCache& cache = default_transition_cache());

/// Sum over sources m >= n of w_m p_{m,n}(t).
double reach_probability(const WeightedNodeSet& sources, const MultiplicityVector& n, double t,
                         double theta, TransitionCache& cache = default_transition_cache());

/// Landing level after time t from level m, by successive exponential holding times.
int simulate_level(int m, double t, double theta, Rng& rng);

/// Uniformly random sub-multiset of `m` with `level` items.
MultiplicityVector sample_landing_node(int level, const MultiplicityVector& m, Rng& rng);

/// d_m(t) = P(D_t = m | D_0 = infinity), to absolute tolerance `tol`.
double dm_probability(int m, double t, double theta, double tol = 1e-12);

struct PropagationOptions {
  enum class Mode { Auto, Exact, MonteCarlo };
  Mode mode = Mode::Auto;
  /// Maximum number of (source, target) evaluations for exact propagation.
  std::uint64_t exact_budget = 2'000'000;
  std::size_t particles = 10'000;
  double prune_eps = kDefaultPruneEps;
};

/// Particle estimate: sample a source, its landing level, then the
/// landing node; return empirical frequencies over N particles.
WeightedNodeSet propagate_weights_mc(const WeightedNodeSet& sources, double t, double theta,
                                     std::size_t particles, Rng& rng);

/// {n -> p_t(M, n)} over L(M), pruned at `options.prune_eps`. Throws
/// BudgetExceeded if more than `options.exact_budget` evaluations are needed.
WeightedNodeSet propagate_weights_exact(const WeightedNodeSet& sources, double t, double theta,
                                        const PropagationOptions& options = {},
                                        TransitionCache& cache = default_transition_cache());

/// Exact propagation, or Monte Carlo when forced or when the exact budget is
/// exceeded in Auto mode.
WeightedNodeSet propagate_weights(const WeightedNodeSet& sources, double t, double theta,
                                  const PropagationOptions& options, Rng& rng,
                                  TransitionCache& cache = default_transition_cache());

}  // namespace fvddp
