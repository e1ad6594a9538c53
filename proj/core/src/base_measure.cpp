#include "fvddp/base_measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fvddp/errors.hpp"

namespace fvddp {

namespace {

constexpr std::size_t kMaxCover = 50'000'000;

std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// Walks the support upward from `start` until the remaining mass is below `tail`.
std::vector<Value> cover_from(const DiscreteDistribution& d, Value start, double tail) {
  std::vector<Value> out;
  double mass = 0.0;
  for (Value y = start; mass < 1.0 - tail; ++y) {
    const double p = d.pmf(y);
    if (p > 0.0) out.push_back(y);
    mass += p;
    if (out.size() > kMaxCover) throw InputError("support cover too large for " + d.describe());
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_double(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InputError("invalid number '" + s + "' in " + std::string(what));
  return v;
}

Value parse_value(std::string_view text, std::string_view what) {
  Value v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("invalid integer '" + std::string(text) + "' in " + std::string(what));
  }
  return v;
}

}  // namespace

PoissonDistribution::PoissonDistribution(double mean) : mean_(mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw InputError("poisson mean must be positive");
}

double PoissonDistribution::pmf(Value y) const {
  if (y < 0) return 0.0;
  const double k = static_cast<double>(y);
  return std::exp(k * std::log(mean_) - mean_ - std::lgamma(k + 1.0));
}

Value PoissonDistribution::sample(Rng& rng) const { return std::poisson_distribution<Value>(mean_)(rng); }

std::vector<Value> PoissonDistribution::support_cover(double tail) const { return cover_from(*this, 0, tail); }

std::string PoissonDistribution::describe() const { return "poisson:" + format_number(mean_); }

NegativeBinomialDistribution::NegativeBinomialDistribution(double r, double p) : r_(r), p_(p) {
  if (!(r > 0.0) || !(p > 0.0 && p <= 1.0)) throw InputError("negbin requires r > 0 and 0 < p <= 1");
}

double NegativeBinomialDistribution::pmf(Value y) const {
  if (y < 0) return 0.0;
  if (p_ == 1.0) return y == 0 ? 1.0 : 0.0;
  const double k = static_cast<double>(y);
  return std::exp(std::lgamma(k + r_) - std::lgamma(r_) - std::lgamma(k + 1.0) + r_ * std::log(p_) +
                  k * std::log1p(-p_));
}

Value NegativeBinomialDistribution::sample(Rng& rng) const {
  if (p_ == 1.0) return 0;
  // Gamma-Poisson mixture, valid for real-valued r.
  const double lambda = std::gamma_distribution<double>(r_, (1.0 - p_) / p_)(rng);
  if (lambda <= 0.0) return 0;
  return std::poisson_distribution<Value>(lambda)(rng);
}

std::vector<Value> NegativeBinomialDistribution::support_cover(double tail) const {
  return cover_from(*this, 0, tail);
}

std::string NegativeBinomialDistribution::describe() const {
  return "negbin:" + format_number(r_) + "," + format_number(p_);
}

BinomialDistribution::BinomialDistribution(int trials, double p) : trials_(trials), p_(p) {
  if (trials < 0 || !(p >= 0.0 && p <= 1.0)) throw InputError("binomial requires N >= 0 and 0 <= p <= 1");
}

double BinomialDistribution::pmf(Value y) const {
  if (y < 0 || y > trials_) return 0.0;
  if (p_ == 0.0) return y == 0 ? 1.0 : 0.0;
  if (p_ == 1.0) return y == trials_ ? 1.0 : 0.0;
  const double k = static_cast<double>(y);
  return std::exp(std::lgamma(trials_ + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials_ - k + 1.0) +
                  k * std::log(p_) + (trials_ - k) * std::log1p(-p_));
}

Value BinomialDistribution::sample(Rng& rng) const {
  return std::binomial_distribution<Value>(trials_, p_)(rng);
}

std::vector<Value> BinomialDistribution::support_cover(double) const {
  std::vector<Value> out;
  for (Value y = 0; y <= trials_; ++y) {
    if (pmf(y) > 0.0) out.push_back(y);
  }
  return out;
}

std::string BinomialDistribution::describe() const {
  return "binomial:" + std::to_string(trials_) + "," + format_number(p_);
}

UniformRangeDistribution::UniformRangeDistribution(Value lo, Value hi) : lo_(lo), hi_(hi) {
  if (hi < lo) throw InputError("uniform range requires lo <= hi");
}

double UniformRangeDistribution::pmf(Value y) const {
  if (y < lo_ || y > hi_) return 0.0;
  return 1.0 / (static_cast<double>(hi_ - lo_) + 1.0);
}

Value UniformRangeDistribution::sample(Rng& rng) const {
  return std::uniform_int_distribution<Value>(lo_, hi_)(rng);
}

std::vector<Value> UniformRangeDistribution::support_cover(double) const {
  if (static_cast<std::uint64_t>(hi_ - lo_) >= kMaxCover) throw InputError("support cover too large for " + describe());
  std::vector<Value> out;
  for (Value y = lo_; y <= hi_; ++y) out.push_back(y);
  return out;
}

std::string UniformRangeDistribution::describe() const {
  return "uniform:" + std::to_string(lo_) + ".." + std::to_string(hi_);
}

TableDistribution::TableDistribution(std::map<Value, double> table, std::string family)
    : table_(std::move(table)), family_(std::move(family)) {
  double total = 0.0;
  for (const auto& [v, p] : table_) {
    if (!(p >= 0.0)) throw InputError("pmf table entries must be nonnegative");
    total += p;
  }
  if (table_.empty() || std::abs(total - 1.0) > 1e-9) throw InputError("pmf table must sum to 1");
  double acc = 0.0;
  for (auto& [v, p] : table_) {
    p /= total;
    acc += p;
    values_.push_back(v);
    cumulative_.push_back(acc);
  }
}

TableDistribution TableDistribution::uniform_over(const std::vector<Value>& values) {
  std::map<Value, double> table;
  for (Value v : values) table[v] = 0.0;
  if (table.empty()) throw InputError("uniform set must be nonempty");
  for (auto& [v, p] : table) p = 1.0 / static_cast<double>(table.size());
  return TableDistribution(std::move(table), "uniform");
}

double TableDistribution::pmf(Value y) const {
  auto it = table_.find(y);
  return it == table_.end() ? 0.0 : it->second;
}

Value TableDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto idx = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                      cumulative_.begin());
  return values_[std::min(idx, values_.size() - 1)];
}

std::vector<Value> TableDistribution::support_cover(double) const {
  std::vector<Value> out;
  for (const auto& [v, p] : table_) {
    if (p > 0.0) out.push_back(v);
  }
  return out;
}

std::string TableDistribution::describe() const {
  std::ostringstream os;
  os << family_ << ':';
  bool first = true;
  for (const auto& [v, p] : table_) {
    if (!first) os << ',';
    first = false;
    if (family_ == "uniform") {
      os << v;
    } else {
      os << v << '=' << format_number(p);
    }
  }
  return os.str();
}

std::shared_ptr<const DiscreteDistribution> parse_distribution(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InputError("base measure must look like family:params");
  const std::string family(spec.substr(0, colon));
  const std::string_view params = spec.substr(colon + 1);
  const auto fields = split(params, ',');
  auto expect = [&](std::size_t n) {
    if (fields.size() != n) throw InputError("wrong number of parameters for " + family);
  };
  if (family == "poisson") {
    expect(1);
    return std::make_shared<PoissonDistribution>(parse_double(fields[0], spec));
  }
  if (family == "negbin") {
    expect(2);
    return std::make_shared<NegativeBinomialDistribution>(parse_double(fields[0], spec),
                                                          parse_double(fields[1], spec));
  }
  if (family == "binomial") {
    expect(2);
    return std::make_shared<BinomialDistribution>(static_cast<int>(parse_value(fields[0], spec)),
                                                  parse_double(fields[1], spec));
  }
  if (family == "uniform") {
    const auto dots = params.find("..");
    if (dots != std::string_view::npos) {
      return std::make_shared<UniformRangeDistribution>(parse_value(params.substr(0, dots), spec),
                                                        parse_value(params.substr(dots + 2), spec));
    }
    std::vector<Value> values;
    for (const auto& f : fields) values.push_back(parse_value(f, spec));
    return std::make_shared<TableDistribution>(TableDistribution::uniform_over(values));
  }
  if (family == "table") {
    std::map<Value, double> table;
    for (const auto& f : fields) {
      const auto eq = f.find('=');
      if (eq == std::string::npos) throw InputError("table entries must look like value=probability");
      table[parse_value(std::string_view(f).substr(0, eq), spec)] +=
          parse_double(std::string_view(f).substr(eq + 1), spec);
    }
    return std::make_shared<TableDistribution>(std::move(table));
  }
  throw InputError("unknown base measure family '" + family + "'");
}

BaseMeasure make_base(double theta, std::shared_ptr<const DiscreteDistribution> p0) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InputError("theta must be positive");
  if (!p0) throw InputError("base measure needs a P0 distribution");
  return BaseMeasure{theta, std::move(p0)};
}

}  // namespace fvddp
