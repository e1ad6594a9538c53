#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fvddp {

/// Observed values are integers: every shipped base measure is discrete.
using Value = std::int64_t;

/// Default pruning threshold for node weights.
inline constexpr double kDefaultPruneEps = 1e-10;

/// Multiplicities of the K distinct observed values retained by one mixture
/// component. Ordered lexicographically; the componentwise partial order is
/// `below_or_equal`.
class MultiplicityVector {
 public:
  MultiplicityVector() = default;
  explicit MultiplicityVector(std::size_t dim) : counts_(dim, 0) {}
  explicit MultiplicityVector(std::vector<int> counts);
  MultiplicityVector(std::initializer_list<int> counts);

  std::size_t dim() const { return counts_.size(); }
  int total() const { return total_; }
  int operator[](std::size_t i) const { return counts_[i]; }
  std::span<const int> counts() const { return counts_; }

  void set(std::size_t i, int value);
  void increment(std::size_t i) {
    ++counts_[i];
    ++total_;
  }
  void decrement(std::size_t i);

  /// Copy zero-padded to `dim` entries.
  MultiplicityVector padded(std::size_t dim) const;

  bool operator==(const MultiplicityVector& other) const { return counts_ == other.counts_; }
  std::strong_ordering operator<=>(const MultiplicityVector& other) const {
    return counts_ <=> other.counts_;
  }

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

/// Componentwise a <= b. Vectors of different dimension are incomparable.
bool below_or_equal(const MultiplicityVector& a, const MultiplicityVector& b);

struct MultiplicityVectorHash {
  std::size_t operator()(const MultiplicityVector& v) const noexcept;
};

/// Sparse map from nodes to probability weights. All keys share dimension K.
class WeightedNodeSet {
 public:
  using Map = std::unordered_map<MultiplicityVector, double, MultiplicityVectorHash>;

  WeightedNodeSet() = default;
  explicit WeightedNodeSet(std::size_t dim) : dim_(dim) {}

  /// Single node with weight 1.
  static WeightedNodeSet point_mass(MultiplicityVector node);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Adds `w` to the weight of `node` (creating it if absent).
  void add(const MultiplicityVector& node, double w);
  double weight(const MultiplicityVector& node) const;
  bool contains(const MultiplicityVector& node) const { return entries_.count(node) != 0; }
  double total_weight() const;

  /// Rescales weights to sum to one. Throws if the total is not positive.
  void normalize();
  /// Drops nodes below `eps` and renormalizes. Keeps the heaviest node if
  /// every weight falls below `eps`.
  void prune(double eps);

  /// Componentwise maximum / minimum over keys.
  MultiplicityVector top() const;
  MultiplicityVector bottom() const;

  /// Entries in canonical (lexicographic) order.
  std::vector<std::pair<MultiplicityVector, double>> sorted() const;

  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  std::size_t dim_ = 0;
  Map entries_;
};

/// Multiplicities of `distinct` in `values`. Throws InputError naming the
/// first value not present in `distinct`.
MultiplicityVector counts_of(std::span<const Value> values, std::span<const Value> distinct);

/// All n with 0 <= n <= top componentwise, in lexicographic order.
std::vector<MultiplicityVector> enumerate_below(const MultiplicityVector& top);

/// prod_j (1 + top_j), throwing std::overflow_error if it does not fit.
std::uint64_t lattice_size(const MultiplicityVector& top);

/// Number of n <= top with |n| == level.
std::uint64_t count_at_level(const MultiplicityVector& top, int level);

/// Calls `visit(n)` for every n <= top with |n| == level.
void for_each_at_level(const MultiplicityVector& top, int level,
                       const std::function<void(const MultiplicityVector&)>& visit);

/// Zero-pads every key to `new_dim`; weights unchanged.
WeightedNodeSet extend_support(const WeightedNodeSet& nodes, std::size_t new_dim);

}  // namespace fvddp
