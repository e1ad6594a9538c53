#include "fvddp/lattice.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fvddp/errors.hpp"

namespace fvddp {

MultiplicityVector::MultiplicityVector(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_) {
    if (c < 0) throw std::invalid_argument("multiplicity vector entries must be nonnegative");
    total_ += c;
  }
}

MultiplicityVector::MultiplicityVector(std::initializer_list<int> counts)
    : MultiplicityVector(std::vector<int>(counts)) {}

void MultiplicityVector::set(std::size_t i, int value) {
  if (value < 0) throw std::invalid_argument("multiplicity vector entries must be nonnegative");
  total_ += value - counts_[i];
  counts_[i] = value;
}

void MultiplicityVector::decrement(std::size_t i) {
  if (counts_[i] == 0) throw std::logic_error("decrement of a zero multiplicity");
  --counts_[i];
  --total_;
}

MultiplicityVector MultiplicityVector::padded(std::size_t dim) const {
  if (dim < counts_.size()) throw std::invalid_argument("cannot shrink a multiplicity vector");
  MultiplicityVector out = *this;
  out.counts_.resize(dim, 0);
  return out;
}

bool below_or_equal(const MultiplicityVector& a, const MultiplicityVector& b) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

std::size_t MultiplicityVectorHash::operator()(const MultiplicityVector& v) const noexcept {
  // FNV-1a over the entries.
  std::uint64_t h = 1469598103934665603ULL;
  for (int c : v.counts()) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c));
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

WeightedNodeSet WeightedNodeSet::point_mass(MultiplicityVector node) {
  WeightedNodeSet out(node.dim());
  out.entries_.emplace(std::move(node), 1.0);
  return out;
}

void WeightedNodeSet::add(const MultiplicityVector& node, double w) {
  if (node.dim() != dim_) throw std::invalid_argument("node dimension does not match node set");
  if (!(w >= 0.0)) throw std::invalid_argument("node weights must be nonnegative");
  entries_[node] += w;
}

double WeightedNodeSet::weight(const MultiplicityVector& node) const {
  auto it = entries_.find(node);
  return it == entries_.end() ? 0.0 : it->second;
}

double WeightedNodeSet::total_weight() const {
  double s = 0.0;
  for (const auto& [node, w] : entries_) s += w;
  return s;
}

void WeightedNodeSet::normalize() {
  const double total = total_weight();
  if (!(total > 0.0)) throw std::domain_error("cannot normalize a node set with zero total weight");
  for (auto& [node, w] : entries_) w /= total;
}

void WeightedNodeSet::prune(double eps) {
  normalize();
  if (eps <= 0.0) return;
  const MultiplicityVector* heaviest = nullptr;
  double best = -1.0;
  for (const auto& [node, w] : entries_) {
    if (w > best) {
      best = w;
      heaviest = &node;
    }
  }
  if (best < eps) {
    MultiplicityVector keep = *heaviest;
    entries_.clear();
    entries_.emplace(std::move(keep), 1.0);
    return;
  }
  std::erase_if(entries_, [eps](const auto& kv) { return kv.second < eps; });
  normalize();
}

MultiplicityVector WeightedNodeSet::top() const {
  MultiplicityVector out(dim_);
  for (const auto& [node, w] : entries_) {
    for (std::size_t i = 0; i < dim_; ++i) out.set(i, std::max(out[i], node[i]));
  }
  return out;
}

MultiplicityVector WeightedNodeSet::bottom() const {
  if (entries_.empty()) return MultiplicityVector(dim_);
  MultiplicityVector out = entries_.begin()->first;
  for (const auto& [node, w] : entries_) {
    for (std::size_t i = 0; i < dim_; ++i) out.set(i, std::min(out[i], node[i]));
  }
  return out;
}

std::vector<std::pair<MultiplicityVector, double>> WeightedNodeSet::sorted() const {
  std::vector<std::pair<MultiplicityVector, double>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

MultiplicityVector counts_of(std::span<const Value> values, std::span<const Value> distinct) {
  std::unordered_map<Value, std::size_t> index;
  for (std::size_t i = 0; i < distinct.size(); ++i) index.emplace(distinct[i], i);
  MultiplicityVector out(distinct.size());
  for (Value v : values) {
    auto it = index.find(v);
    if (it == index.end()) {
      std::ostringstream msg;
      msg << "value " << v << " is not among the distinct values";
      throw InputError(msg.str());
    }
    out.increment(it->second);
  }
  return out;
}

std::vector<MultiplicityVector> enumerate_below(const MultiplicityVector& top) {
  const std::size_t k = top.dim();
  std::vector<MultiplicityVector> out;
  out.reserve(static_cast<std::size_t>(lattice_size(top)));
  MultiplicityVector cur(k);
  // Odometer in lexicographic order: last coordinate varies fastest.
  while (true) {
    out.push_back(cur);
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (cur[i] < top[i]) {
        cur.set(i, cur[i] + 1);
        for (std::size_t j = i + 1; j < k; ++j) cur.set(j, 0);
        break;
      }
      if (i == 0) return out;
    }
    if (k == 0) return out;
  }
}

std::uint64_t lattice_size(const MultiplicityVector& top) {
  std::uint64_t size = 1;
  for (int c : top.counts()) {
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(size, static_cast<std::uint64_t>(c) + 1, &next)) {
      throw std::overflow_error("lattice size exceeds the 64-bit integer range");
    }
    size = next;
  }
  return size;
}

std::uint64_t count_at_level(const MultiplicityVector& top, int level) {
  if (level < 0 || level > top.total()) return 0;
  // Coefficient of x^level in prod_j (1 + x + ... + x^{top_j}), saturating.
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 4;
  std::vector<std::uint64_t> poly(static_cast<std::size_t>(level) + 1, 0);
  poly[0] = 1;
  int reach = 0;
  for (int c : top.counts()) {
    reach = std::min(level, reach + c);
    // Multiply by (1 + ... + x^c) using a running window sum.
    std::vector<std::uint64_t> next(poly.size(), 0);
    std::uint64_t window = 0;
    for (int d = 0; d <= reach; ++d) {
      window = std::min(kCap, window + poly[d]);
      if (d - c - 1 >= 0) window -= std::min(window, poly[d - c - 1]);
      next[d] = window;
    }
    poly.swap(next);
  }
  return poly[level];
}

namespace {

void visit_level(const MultiplicityVector& top, std::size_t pos, int remaining,
                 const std::vector<int>& suffix_cap, MultiplicityVector& cur,
                 const std::function<void(const MultiplicityVector&)>& visit) {
  if (pos == top.dim()) {
    if (remaining == 0) visit(cur);
    return;
  }
  const int lo = std::max(0, remaining - suffix_cap[pos + 1]);
  const int hi = std::min(top[pos], remaining);
  for (int c = lo; c <= hi; ++c) {
    cur.set(pos, c);
    visit_level(top, pos + 1, remaining - c, suffix_cap, cur, visit);
  }
  cur.set(pos, 0);
}

}  // namespace

void for_each_at_level(const MultiplicityVector& top, int level,
                       const std::function<void(const MultiplicityVector&)>& visit) {
  if (level < 0 || level > top.total()) return;
  std::vector<int> suffix_cap(top.dim() + 1, 0);
  for (std::size_t i = top.dim(); i > 0; --i) suffix_cap[i - 1] = suffix_cap[i] + top[i - 1];
  MultiplicityVector cur(top.dim());
  visit_level(top, 0, level, suffix_cap, cur, visit);
}

WeightedNodeSet extend_support(const WeightedNodeSet& nodes, std::size_t new_dim) {
  if (new_dim < nodes.dim()) throw std::invalid_argument("extend_support cannot shrink the dimension");
  if (new_dim == nodes.dim()) return nodes;
  WeightedNodeSet out(new_dim);
  for (const auto& [node, w] : nodes) out.add(node.padded(new_dim), w);
  return out;
}

}  // namespace fvddp
