#include "fvddp/death_process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fvddp/errors.hpp"
#include "mpfloat.hpp"

namespace fvddp {

namespace {

using detail::MpFloat;

constexpr double kRangeSlack = 1e-8;
constexpr mpfr_prec_t kGuardBits = 96;
constexpr mpfr_prec_t kMaxBits = 1 << 17;
constexpr int kMaxSeriesTerms = 10'000;

void check_args(int m, double t, double theta) {
  if (m < 0) throw std::invalid_argument("death process level must be nonnegative");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("propagation time must be positive");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be positive");
}

mpfr_prec_t bits_for(double log_max_term) {
  const double bits = std::max(0.0, log_max_term) / std::log(2.0) + kGuardBits;
  if (bits > kMaxBits) throw NumericalInstability("alternating sum needs more precision than allowed");
  return static_cast<mpfr_prec_t>(std::ceil(bits));
}

// Smallest |lambda_i - lambda_j| over n <= i < j <= m.
// log |c_i| e^{-lambda_i t} for the term i of p_{m,n}(t), n >= 1.
double log_level_term(int m, int n, int i, double t, double theta) {
  return std::log(theta + 2.0 * i - 1.0) + std::lgamma(m + 1.0) + std::lgamma(theta + m) +
         std::lgamma(theta + i + n - 1.0) - std::lgamma(n + 1.0) - std::lgamma(theta + n) -
         std::lgamma(i - n + 1.0) - std::lgamma(m - i + 1.0) - std::lgamma(theta + i + m) -
         rate(i, theta) * t;
}

// sum_{i=n}^{m} c_i e^{-lambda_i t}, n >= 1, with decays[i] = e^{-lambda_i t}.
MpFloat level_sum(int m, int n, double theta, mpfr_prec_t bits, const std::vector<MpFloat>& decays) {
  // c_n = C(m,n) prod_{j=n}^{m-1}(theta+j) / prod_{j=2n}^{n+m-1}(theta+j)
  MpFloat c(bits, 1.0);
  for (int j = 1; j <= m - n; ++j) {
    c.mul_si(n + j);
    c.div_si(j);
  }
  for (int j = n; j <= m - 1; ++j) c.mul_shifted(theta, j);
  for (int j = 2 * n; j <= n + m - 1; ++j) c.div_shifted(theta, j);

  MpFloat sum(bits, 0.0);
  MpFloat scratch(bits, 0.0);
  sum.add_product(c, decays[n], scratch);
  for (int i = n; i < m; ++i) {
    // c_{i+1}/c_i = -(theta+2i+1)(theta+i+n-1)(m-i) / ((theta+2i-1)(i-n+1)(theta+i+m))
    c.mul_shifted(theta, 2 * i + 1);
    c.mul_shifted(theta, i + n - 1);
    c.mul_si(m - i);
    c.div_shifted(theta, 2 * i - 1);
    c.div_si(i - n + 1);
    c.div_shifted(theta, i + m);
    c.negate();
    sum.add_product(c, decays[i + 1], scratch);
  }
  return sum;
}

std::vector<MpFloat> level_decays(int m, int from, double t, double theta, mpfr_prec_t bits) {
  std::vector<MpFloat> decays(static_cast<std::size_t>(m) + 1, MpFloat(bits, 0.0));
  for (int i = from; i <= m; ++i) decays[i].set_level_decay(i, theta, t);
  return decays;
}

double checked(double value, int m, int n) {
  if (!(value >= -kRangeSlack && value <= 1.0 + kRangeSlack)) {
    std::ostringstream msg;
    msg << "level transition p_{" << m << "," << n << "} evaluated to " << value;
    throw NumericalInstability(msg.str());
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

double rate(int m, double theta) { return 0.5 * m * (theta + m - 1.0); }

double level_transition(int m, int n, double t, double theta) {
  check_args(m, t, theta);
  if (n < 0 || n > m) throw std::invalid_argument("level transition requires 0 <= n <= m");
  if (n == m) return std::exp(-rate(m, theta) * t);
  if (n == 0) return level_transition_row(m, t, theta)[0];
  double log_max = -std::numeric_limits<double>::infinity();
  for (int i = n; i <= m; ++i) log_max = std::max(log_max, log_level_term(m, n, i, t, theta));
  const mpfr_prec_t bits = bits_for(log_max);
  const auto decays = level_decays(m, n, t, theta, bits);
  return checked(level_sum(m, n, theta, bits, decays).to_double(), m, n);
}

std::vector<double> level_transition_row(int m, double t, double theta) {
  check_args(m, t, theta);
  std::vector<double> row(static_cast<std::size_t>(m) + 1, 0.0);
  if (m == 0) {
    row[0] = 1.0;
    return row;
  }

  double log_max = 0.0;
  for (int n = 1; n < m; ++n) {
    for (int i = n; i <= m; ++i) log_max = std::max(log_max, log_level_term(m, n, i, t, theta));
  }
  const mpfr_prec_t bits = bits_for(log_max);
  const auto decays = level_decays(m, 1, t, theta, bits);

  MpFloat total(bits, 0.0);
  total += decays[m];
  row[m] = decays[m].to_double();
  for (int n = 1; n < m; ++n) {
    MpFloat value = level_sum(m, n, theta, bits, decays);
    row[n] = checked(value.to_double(), m, n);
    total += value;
  }
  MpFloat rest(bits, 1.0);
  rest -= total;
  row[0] = checked(rest.to_double(), m, 0);
  return row;
}

std::size_t TransitionCache::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<int>{}(k.m);
  h ^= std::hash<double>{}(k.t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= std::hash<double>{}(k.theta) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

const TransitionCache::Row& TransitionCache::row(int m, double t, double theta) {
  const Key key{m, t, theta};
  {
    std::shared_lock lock(mutex_);
    auto it = rows_.find(key);
    if (it != rows_.end()) return *it->second;
  }
  auto fresh = std::make_unique<Row>();
  try {
    fresh->probs = level_transition_row(m, t, theta);
  } catch (const NumericalInstability&) {
    // Simulation fallback, seeded by the key so results do not depend on call order.
    Rng rng = make_stream(KeyHash{}(key), static_cast<std::uint64_t>(m), 0x5eed);
    std::vector<std::uint64_t> hits(static_cast<std::size_t>(m) + 1, 0);
    for (std::size_t r = 0; r < fallback_trajectories_; ++r) ++hits[simulate_level(m, t, theta, rng)];
    fresh->probs.resize(hits.size());
    for (std::size_t n = 0; n < hits.size(); ++n) {
      fresh->probs[n] = static_cast<double>(hits[n]) / static_cast<double>(fallback_trajectories_);
    }
    fresh->simulated = true;
  }
  std::unique_lock lock(mutex_);
  auto [it, inserted] = rows_.try_emplace(key, std::move(fresh));
  return *it->second;
}

std::size_t TransitionCache::size() const {
  std::shared_lock lock(mutex_);
  return rows_.size();
}

void TransitionCache::clear() {
  std::unique_lock lock(mutex_);
  rows_.clear();
}

TransitionCache& default_transition_cache() {
  static TransitionCache cache;
  return cache;
}

double hypergeometric_keep(const MultiplicityVector& m, const MultiplicityVector& n) {
  if (!below_or_equal(n, m)) throw std::invalid_argument("hypergeometric mass requires n <= m");
  auto lchoose = [](int a, int b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  double log_mass = -lchoose(m.total(), n.total());
  for (std::size_t i = 0; i < m.dim(); ++i) log_mass += lchoose(m[i], n[i]);
  return std::exp(log_mass);
}

double node_transition(const MultiplicityVector& m, const MultiplicityVector& n, double t,
                       double theta, TransitionCache& cache) {
  if (!below_or_equal(n, m)) throw std::invalid_argument("node transition requires n <= m componentwise");
  const auto& row = cache.row(m.total(), t, theta);
  return row.probs[static_cast<std::size_t>(n.total())] * hypergeometric_keep(m, n);
}

double reach_probability(const WeightedNodeSet& sources, const MultiplicityVector& n, double t,
                         double theta, TransitionCache& cache) {
  double p = 0.0;
  for (const auto& [m, w] : sources) {
    if (below_or_equal(n, m)) p += w * node_transition(m, n, t, theta, cache);
  }
  return p;
}

int simulate_level(int m, double t, double theta, Rng& rng) {
  if (m < 0) throw std::invalid_argument("death process level must be nonnegative");
  std::exponential_distribution<double> unit(1.0);
  double remaining = t;
  int n = m;
  while (n > 0) {
    remaining -= unit(rng) / rate(n, theta);
    if (remaining <= 0.0) break;
    --n;
  }
  return n;
}

MultiplicityVector sample_landing_node(int level, const MultiplicityVector& m, Rng& rng) {
  if (level < 0 || level > m.total()) throw std::invalid_argument("landing level must lie in [0, |m|]");
  if (level == m.total()) return m;
  MultiplicityVector urn = m;
  // Draw the smaller of the kept and removed sub-multisets.
  const bool draw_kept = level <= m.total() - level;
  const int draws = draw_kept ? level : m.total() - level;
  MultiplicityVector drawn(m.dim());
  for (int d = 0; d < draws; ++d) {
    std::uniform_int_distribution<int> pick(0, urn.total() - 1);
    int u = pick(rng);
    std::size_t i = 0;
    while (u >= urn[i]) {
      u -= urn[i];
      ++i;
    }
    urn.decrement(i);
    drawn.increment(i);
  }
  return draw_kept ? drawn : urn;
}

double dm_probability(int m, double t, double theta, double tol) {
  check_args(m, t, theta);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  auto log_term = [&](int k) {
    if (m == 0 && k == 0) return 0.0;
    return std::log(theta + 2.0 * k - 1.0) + std::lgamma(theta + m + k - 1.0) - std::lgamma(theta + m) -
           std::lgamma(m + 1.0) - std::lgamma(k - m + 1.0) - rate(k, theta) * t;
  };
  const double k_floor = 2.0 * (m + theta + 1.0 / t);
  const double log_stop = std::log(tol * 1e-2);
  double log_max = 0.0;
  int last = m;
  for (;; ++last) {
    if (last - m > kMaxSeriesTerms) {
      std::ostringstream msg;
      msg << "d_" << m << "(" << t << ") series did not converge within " << kMaxSeriesTerms
          << " terms (theta=" << theta << ", last log-term " << log_term(last) << ")";
      throw NonConvergence(msg.str());
    }
    const double lt = log_term(last);
    log_max = std::max(log_max, lt);
    if (last >= k_floor && lt < log_stop) break;
  }
  const mpfr_prec_t bits = bits_for(log_max);

  // a_k = (-1)^{k-m} (theta+2k-1) (theta+m)^{(k-1)} / (m! (k-m)!), ascending factorial.
  MpFloat a(bits, 1.0);
  int k = m;
  if (m == 0) {
    // a_0 = 1 by continuity; start the ratio recursion from a_1 = -(theta+1).
    MpFloat sum(bits, 1.0);
    MpFloat decay(bits, 0.0);
    MpFloat scratch(bits, 0.0);
    if (last >= 1) {
      a.set(-1.0);
      a.mul_shifted(theta, 1);
      decay.set_level_decay(1, theta, t);
      sum.add_product(a, decay, scratch);
    }
    for (k = 1; k < last; ++k) {
      a.mul_shifted(theta, 2 * k + 1);
      a.div_shifted(theta, 2 * k - 1);
      a.mul_shifted(theta, m + k - 1);
      a.div_si(k - m + 1);
      a.negate();
      decay.set_level_decay(k + 1, theta, t);
      sum.add_product(a, decay, scratch);
    }
    const double value = sum.to_double();
    if (!(value >= -kRangeSlack && value <= 1.0 + kRangeSlack)) {
      throw NumericalInstability("d_m(t) series evaluated outside [0,1]");
    }
    return std::clamp(value, 0.0, 1.0);
  }

  // a_m = prod_{j=m}^{2m-1}(theta+j) / m!
  for (int j = m; j <= 2 * m - 1; ++j) a.mul_shifted(theta, j);
  for (int j = 2; j <= m; ++j) a.div_si(j);
  MpFloat sum(bits, 0.0);
  MpFloat decay(bits, 0.0);
  MpFloat scratch(bits, 0.0);
  decay.set_level_decay(m, theta, t);
  sum.add_product(a, decay, scratch);
  for (k = m; k < last; ++k) {
    a.mul_shifted(theta, 2 * k + 1);
    a.div_shifted(theta, 2 * k - 1);
    a.mul_shifted(theta, m + k - 1);
    a.div_si(k - m + 1);
    a.negate();
    decay.set_level_decay(k + 1, theta, t);
    sum.add_product(a, decay, scratch);
  }
  const double value = sum.to_double();
  if (!(value >= -kRangeSlack && value <= 1.0 + kRangeSlack)) {
    throw NumericalInstability("d_m(t) series evaluated outside [0,1]");
  }
  return std::clamp(value, 0.0, 1.0);
}

WeightedNodeSet propagate_weights_mc(const WeightedNodeSet& sources, double t, double theta,
                                     std::size_t particles, Rng& rng) {
  if (particles == 0) throw std::invalid_argument("Monte Carlo propagation needs at least one particle");
  if (sources.empty()) throw std::invalid_argument("cannot propagate an empty node set");
  const auto ordered = sources.sorted();
  std::vector<double> cumulative(ordered.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    acc += ordered[i].second;
    cumulative[i] = acc;
  }
  WeightedNodeSet out(sources.dim());
  for (std::size_t p = 0; p < particles; ++p) {
    const double u = uniform01(rng) * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                        cumulative.begin());
    idx = std::min(idx, ordered.size() - 1);
    const MultiplicityVector& m = ordered[idx].first;
    const int level = t > 0.0 ? simulate_level(m.total(), t, theta, rng) : m.total();
    out.add(sample_landing_node(level, m, rng), 1.0);
  }
  out.normalize();
  return out;
}

WeightedNodeSet propagate_weights_exact(const WeightedNodeSet& sources, double t, double theta,
                                        const PropagationOptions& options, TransitionCache& cache) {
  if (sources.empty()) throw std::invalid_argument("cannot propagate an empty node set");
  if (t <= 0.0) {
    WeightedNodeSet same = sources;
    same.prune(options.prune_eps);
    return same;
  }
  // Levels whose total contribution cannot reach the pruning threshold are skipped.
  const double level_cutoff = options.prune_eps > 0.0 ? options.prune_eps * 1e-3 : 0.0;
  WeightedNodeSet out(sources.dim());
  std::uint64_t work = 0;
  for (const auto& [m, w] : sources) {
    if (w <= 0.0) continue;
    const auto& row = cache.row(m.total(), t, theta);
    for (int level = 0; level <= m.total(); ++level) {
      const double mass = w * row.probs[static_cast<std::size_t>(level)];
      if (mass <= level_cutoff || mass == 0.0) continue;
      work += count_at_level(m, level);
      if (work > options.exact_budget) {
        std::ostringstream msg;
        msg << "exact propagation exceeds the budget of " << options.exact_budget
            << " node evaluations; use Monte Carlo propagation";
        throw BudgetExceeded(msg.str());
      }
      for_each_at_level(m, level, [&](const MultiplicityVector& n) {
        out.add(n, mass * hypergeometric_keep(m, n));
      });
    }
  }
  out.prune(options.prune_eps);
  return out;
}

WeightedNodeSet propagate_weights(const WeightedNodeSet& sources, double t, double theta,
                                  const PropagationOptions& options, Rng& rng, TransitionCache& cache) {
  using Mode = PropagationOptions::Mode;
  if (options.mode == Mode::MonteCarlo) {
    return propagate_weights_mc(sources, t, theta, options.particles, rng);
  }
  if (options.mode == Mode::Exact) return propagate_weights_exact(sources, t, theta, options, cache);
  try {
    return propagate_weights_exact(sources, t, theta, options, cache);
  } catch (const BudgetExceeded&) {
    return propagate_weights_mc(sources, t, theta, options.particles, rng);
  }
}

}  // namespace fvddp
