#include "fvddp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "fvddp/errors.hpp"

namespace fvddp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxFreshAttempts = 100'000;

// Past and current atoms with their mass under every node: n_i + c_v.
struct Atoms {
  std::vector<Value> values;
  std::vector<std::vector<double>> mass;  // mass[a][j]
};

Atoms collect_atoms(const PredictiveState& state) {
  Atoms atoms;
  atoms.values = state.distinct();
  std::vector<Value> extra;
  for (const auto& [v, c] : state.sample_counts()) {
    if (!state.index_of(v)) extra.push_back(v);
  }
  std::sort(extra.begin(), extra.end());
  atoms.values.insert(atoms.values.end(), extra.begin(), extra.end());
  for (Value v : atoms.values) {
    const auto idx = state.index_of(v);
    const int c = state.sample_count(v);
    std::vector<double> m(state.node_count());
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = (idx ? state.node(j)[*idx] : 0) + c;
    atoms.mass.push_back(std::move(m));
  }
  return atoms;
}

void normalize_logs(std::vector<double>& lw, std::vector<double>& w) {
  const double best = *std::max_element(lw.begin(), lw.end());
  if (!std::isfinite(best)) throw NumericalInstability("partition sampler lost all node weight");
  double total = 0.0;
  for (std::size_t j = 0; j < lw.size(); ++j) {
    w[j] = std::exp(lw[j] - best);
    total += w[j];
  }
  const double log_total = std::log(total) + best;
  for (std::size_t j = 0; j < lw.size(); ++j) {
    w[j] /= total;
    lw[j] -= log_total;
  }
}

std::size_t pick(const std::vector<double>& w, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    acc += w[j];
    if (u < acc) return j;
  }
  for (std::size_t j = w.size(); j-- > 0;) {
    if (w[j] > 0.0) return j;
  }
  return w.size() - 1;
}

// log P(X = x) for X ~ BetaBinomial(trials, a, b); b == 0 puts all mass on x == trials.
double log_beta_binomial(int x, int trials, double a, double b) {
  if (b <= 0.0) return x == trials ? 0.0 : kNegInf;
  auto lbeta = [](double p, double q) { return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q); };
  return std::lgamma(trials + 1.0) - std::lgamma(x + 1.0) - std::lgamma(trials - x + 1.0) +
         lbeta(x + a, trials - x + b) - lbeta(a, b);
}

double log_rising(double a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::log(a + i);
  return s;
}

}  // namespace

int PartitionSample::total() const {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  return n;
}

std::vector<int> PartitionSample::shape() const {
  std::vector<int> s;
  for (const auto& b : blocks) s.push_back(b.size);
  std::sort(s.rbegin(), s.rend());
  return s;
}

double dp_eppf(std::span<const int> sizes, double theta) {
  if (sizes.empty()) throw InputError("partition needs at least one block");
  if (!(theta > 0.0)) throw InputError("theta must be positive");
  int n = 0;
  double log_p = 0.0;
  for (int s : sizes) {
    if (s < 1) throw InputError("block sizes must be positive");
    n += s;
    log_p += std::log(theta) + std::lgamma(static_cast<double>(s));
  }
  return std::exp(log_p - log_rising(theta, n));
}

PartitionSample sample_partition(const PredictiveState& state, int n, Rng& rng) {
  if (n < 1) throw InputError("partition size must be at least 1");
  const double theta = state.theta();
  const std::size_t nodes = state.node_count();
  const Atoms atoms = collect_atoms(state);

  std::vector<double> w = state.weights();
  std::vector<double> lw(nodes);
  for (std::size_t j = 0; j < nodes; ++j) lw[j] = std::log(w[j]);
  std::vector<double> atom_left(nodes, 0.0);
  for (const auto& m : atoms.mass) {
    for (std::size_t j = 0; j < nodes; ++j) atom_left[j] += m[j];
  }
  std::vector<bool> atom_used(atoms.values.size(), false);
  std::unordered_map<Value, std::size_t> atom_index;
  for (std::size_t a = 0; a < atoms.values.size(); ++a) atom_index.emplace(atoms.values[a], a);
  std::unordered_set<Value> used;
  double p0_used = 0.0;

  PartitionSample out;
  int left = n;
  while (left > 0) {
    const double fresh = theta * std::max(0.0, 1.0 - p0_used);

    // Value of the new block.
    const std::size_t j = pick(w, uniform01(rng));
    const double u = uniform01(rng) * (fresh + atom_left[j]);
    Value v = 0;
    if (u < fresh) {
      int attempt = 0;
      do {
        if (++attempt > kMaxFreshAttempts) throw NumericalInstability("P0 mass outside used values is too small");
        v = state.base().sample(rng);
      } while (used.count(v) != 0);
    } else {
      double r = u - fresh;
      std::size_t a = 0;
      for (; a + 1 < atoms.values.size(); ++a) {
        if (atom_used[a]) continue;
        if (r < atoms.mass[a][j]) break;
        r -= atoms.mass[a][j];
      }
      while (atom_used[a]) --a;
      v = atoms.values[a];
    }

    const double p0v = state.base().pmf(v);
    const auto found = atom_index.find(v);
    const bool is_atom = found != atom_index.end();
    std::vector<double> alpha(nodes);
    std::vector<double> rest(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double own = is_atom ? atoms.mass[found->second][i] : 0.0;
      alpha[i] = theta * p0v + own;
      rest[i] = theta * std::max(0.0, 1.0 - p0_used - p0v) + (atom_left[i] - own);
      const double total = fresh + atom_left[i];
      lw[i] += alpha[i] > 0.0 ? std::log(alpha[i] / total) : kNegInf;
    }
    normalize_logs(lw, w);

    // Size of the block among the customers still standing.
    const std::size_t js = pick(w, uniform01(rng));
    int extra = 0;
    if (left > 1) {
      if (rest[js] <= 0.0) {
        extra = left - 1;
      } else {
        const double g1 = std::gamma_distribution<double>(alpha[js] + 1.0, 1.0)(rng);
        const double g2 = std::gamma_distribution<double>(rest[js], 1.0)(rng);
        const double q = g1 + g2 > 0.0 ? g1 / (g1 + g2) : 1.0;
        extra = std::binomial_distribution<int>(left - 1, q)(rng);
      }
      for (std::size_t i = 0; i < nodes; ++i) {
        if (std::isfinite(lw[i])) lw[i] += log_beta_binomial(extra, left - 1, alpha[i] + 1.0, rest[i]);
      }
      normalize_logs(lw, w);
    }

    out.blocks.push_back({v, extra + 1});
    left -= extra + 1;
    used.insert(v);
    p0_used += p0v;
    if (is_atom) {
      atom_used[found->second] = true;
      for (std::size_t i = 0; i < nodes; ++i) atom_left[i] -= atoms.mass[found->second][i];
    }
  }
  return out;
}

PartitionSample conveyor_simulate(const PredictiveState& state, int n, Rng& rng) {
  if (n < 1) throw InputError("partition size must be at least 1");
  PredictiveState s = state;
  PartitionSample out;
  std::unordered_map<Value, std::size_t> table_of;
  for (int customer = 0; customer < n; ++customer) {
    const MultiplicityVector& node = s.node(s.sample_node(rng));
    const double theta = s.theta();
    const double u = uniform01(rng) * (theta + node.total() + s.k());
    Value dish;
    if (u < s.k()) {
      // Join an occupied table: every earlier customer is equally likely.
      dish = s.sample()[static_cast<std::size_t>(u)];
    } else if (u < s.k() + node.total()) {
      int r = static_cast<int>(u - s.k());
      std::size_t i = 0;
      while (r >= node[i]) r -= node[i++];
      dish = s.distinct()[i];
    } else {
      dish = s.base().sample(rng);
    }
    s.observe(dish);
    auto [it, fresh] = table_of.emplace(dish, out.blocks.size());
    if (fresh) {
      out.blocks.push_back({dish, 1});
    } else {
      ++out.blocks[it->second].size;
    }
  }
  return out;
}

PartitionSample group_sequence(std::span<const Value> values) {
  PartitionSample out;
  std::unordered_map<Value, std::size_t> block_of;
  for (Value v : values) {
    auto [it, fresh] = block_of.emplace(v, out.blocks.size());
    if (fresh) {
      out.blocks.push_back({v, 1});
    } else {
      ++out.blocks[it->second].size;
    }
  }
  return out;
}

double lemma2_oracle(const PredictiveState& state, std::span<const int> sizes, std::uint64_t budget) {
  if (sizes.empty()) throw InputError("partition needs at least one block");
  int q = 0;
  for (int s : sizes) {
    if (s < 1) throw InputError("block sizes must be positive");
    q += s;
  }
  const double theta = state.theta();
  const std::size_t nodes = state.node_count();
  const Atoms atoms = collect_atoms(state);
  const std::vector<int> blocks(sizes.begin(), sizes.end());

  // Per-node sums over assignments of blocks to fresh values or distinct atoms.
  std::vector<double> sum(nodes, 0.0);
  std::vector<double> log_term(nodes, 0.0);
  std::vector<bool> taken(atoms.values.size(), false);
  std::uint64_t work = 0;
  std::function<void(std::size_t)> assign = [&](std::size_t b) {
    if (b == blocks.size()) {
      work += nodes;
      if (work > budget) throw BudgetExceeded("partition oracle exceeds its evaluation budget");
      for (std::size_t j = 0; j < nodes; ++j) {
        if (std::isfinite(log_term[j])) sum[j] += std::exp(log_term[j]);
      }
      return;
    }
    const int s = blocks[b];
    const double fresh = std::log(theta) + std::lgamma(static_cast<double>(s));
    for (std::size_t j = 0; j < nodes; ++j) log_term[j] += fresh;
    assign(b + 1);
    for (std::size_t j = 0; j < nodes; ++j) log_term[j] -= fresh;

    for (std::size_t a = 0; a < atoms.values.size(); ++a) {
      if (taken[a]) continue;
      taken[a] = true;
      std::vector<double> saved = log_term;
      for (std::size_t j = 0; j < nodes; ++j) {
        const double m = atoms.mass[a][j];
        log_term[j] += m > 0.0 ? log_rising(m, s) : kNegInf;
      }
      assign(b + 1);
      log_term = std::move(saved);
      taken[a] = false;
    }
  };
  assign(0);

  double p = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double tau = theta + state.node(j).total() + state.k();
    p += state.weight(j) * sum[j] * std::exp(-log_rising(tau, q));
  }
  return p;
}

std::vector<std::vector<int>> set_partitions(int n) {
  if (n < 0 || n > 12) throw InputError("set partition enumeration supports 0 <= n <= 12");
  std::vector<std::vector<int>> out;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> grow = [&](int i, int blocks) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      labels[static_cast<std::size_t>(i)] = b;
      grow(i + 1, std::max(blocks, b + 1));
    }
  };
  if (n == 0) return {{}};
  grow(0, 0);
  return out;
}

std::vector<int> block_sizes(std::span<const int> labels) {
  std::vector<int> sizes;
  for (int l : labels) {
    if (l < 0) throw InputError("block labels must be nonnegative");
    if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(static_cast<std::size_t>(l) + 1, 0);
    ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

std::uint64_t set_partition_count(std::span<const int> sizes) {
  // n! / (prod s_i! * prod over repeated sizes of multiplicity!)
  __extension__ using Wide = unsigned __int128;
  Wide count = 1;
  int placed = 0;
  std::map<int, int> multiplicity;
  for (int s : sizes) {
    if (s < 1) throw InputError("block sizes must be positive");
    for (int i = 1; i <= s; ++i) count = count * static_cast<unsigned>(placed + i) / static_cast<unsigned>(i);
    placed += s;
    ++multiplicity[s];
  }
  for (const auto& [s, m] : multiplicity) {
    for (int i = 2; i <= m; ++i) count /= static_cast<unsigned>(i);
  }
  if (count > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("set partition count overflows");
  return static_cast<std::uint64_t>(count);
}

}  // namespace fvddp
