#pragma once

// Random partitions induced by ties among predictive draws at one time.

#include <cstdint>
#include <span>
#include <vector>

#include "fvddp/lattice.hpp"
#include "fvddp/predictive.hpp"

namespace fvddp {

struct Block {
  Value value = 0;
  int size = 0;
};

/// Blocks in order of creation; values are distinct across blocks.
struct PartitionSample {
  std::vector<Block> blocks;

  int total() const;
  /// Block sizes sorted in decreasing order.
  std::vector<int> shape() const;
};

/// theta^k prod (n_i - 1)! / theta (theta+1) ... (theta+n-1).
double dp_eppf(std::span<const int> sizes, double theta);

/// Block-by-block sampler. Each block picks its value from the remaining
/// mass of the node mixture, then its size from the Beta-binomial law of
/// ties among the customers still unseated, reweighting the nodes after
/// each choice. Exact for any discrete P0.
PartitionSample sample_partition(const PredictiveState& state, int n, Rng& rng);

/// Customer-by-customer Chinese restaurant with conveyor belt: an occupied
/// table, a dish from the belt, or a new dish from the menu, followed by the
/// kitchen's reweighting of the nodes.
PartitionSample conveyor_simulate(const PredictiveState& state, int n, Rng& rng);

/// Groups a draw sequence by value in order of first appearance.
PartitionSample group_sequence(std::span<const Value> values);

/// Probability that the next sum(sizes) draws form one given set partition
/// with these block sizes, summing over every assignment of blocks to a fresh
/// P0 value or to a distinct past or current atom. P0 is treated as diffuse,
/// so fresh values never tie with atoms or with each other. Throws
/// BudgetExceeded beyond `budget` (assignment, node) evaluations.
double lemma2_oracle(const PredictiveState& state, std::span<const int> sizes,
                     std::uint64_t budget = 10'000'000);

/// All set partitions of {0..n-1} as restricted growth strings.
std::vector<std::vector<int>> set_partitions(int n);

/// Block sizes of a restricted growth string, in label order.
std::vector<int> block_sizes(std::span<const int> labels);

/// Number of set partitions of {1..n} whose block sizes form `sizes`.
std::uint64_t set_partition_count(std::span<const int> sizes);

}  // namespace fvddp
