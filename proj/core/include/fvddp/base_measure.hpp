#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fvddp/lattice.hpp"
#include "fvddp/random.hpp"

namespace fvddp {

/// Discrete distribution P0 on the integers.
class DiscreteDistribution {
 public:
  virtual ~DiscreteDistribution() = default;

  virtual double pmf(Value y) const = 0;
  virtual Value sample(Rng& rng) const = 0;
  /// Smallest value set (in increasing order) carrying at least 1 - tail of
  /// the mass. Throws InputError if that set is unreasonably large.
  virtual std::vector<Value> support_cover(double tail) const = 0;
  /// Canonical `family:params` string, accepted by parse_distribution.
  virtual std::string describe() const = 0;
};

class PoissonDistribution final : public DiscreteDistribution {
 public:
  explicit PoissonDistribution(double mean);
  double pmf(Value y) const override;
  Value sample(Rng& rng) const override;
  std::vector<Value> support_cover(double tail) const override;
  std::string describe() const override;

 private:
  double mean_;
};

/// Number of failures before the r-th success, success probability p.
/// Real-valued r is allowed.
class NegativeBinomialDistribution final : public DiscreteDistribution {
 public:
  NegativeBinomialDistribution(double r, double p);
  double pmf(Value y) const override;
  Value sample(Rng& rng) const override;
  std::vector<Value> support_cover(double tail) const override;
  std::string describe() const override;

 private:
  double r_;
  double p_;
};

class BinomialDistribution final : public DiscreteDistribution {
 public:
  BinomialDistribution(int trials, double p);
  double pmf(Value y) const override;
  Value sample(Rng& rng) const override;
  std::vector<Value> support_cover(double tail) const override;
  std::string describe() const override;

 private:
  int trials_;
  double p_;
};

/// Uniform over the integer range [lo, hi].
class UniformRangeDistribution final : public DiscreteDistribution {
 public:
  UniformRangeDistribution(Value lo, Value hi);
  double pmf(Value y) const override;
  Value sample(Rng& rng) const override;
  std::vector<Value> support_cover(double tail) const override;
  std::string describe() const override;

 private:
  Value lo_;
  Value hi_;
};

/// Arbitrary finite pmf table; also backs the uniform-over-a-set family.
class TableDistribution final : public DiscreteDistribution {
 public:
  /// Probabilities must be nonnegative and sum to 1 within 1e-9; they are
  /// renormalized exactly.
  explicit TableDistribution(std::map<Value, double> table, std::string family = "table");
  static TableDistribution uniform_over(const std::vector<Value>& values);

  double pmf(Value y) const override;
  Value sample(Rng& rng) const override;
  std::vector<Value> support_cover(double tail) const override;
  std::string describe() const override;

 private:
  std::map<Value, double> table_;
  std::vector<Value> values_;
  std::vector<double> cumulative_;
  std::string family_;
};

/// Parses `poisson:MEAN`, `negbin:R,P`, `binomial:N,P`, `uniform:LO..HI`,
/// `uniform:V1,V2,...`, `table:V=P,V=P,...`.
std::shared_ptr<const DiscreteDistribution> parse_distribution(std::string_view spec);

/// alpha = theta * P0.
struct BaseMeasure {
  double theta = 1.0;
  std::shared_ptr<const DiscreteDistribution> p0;

  double pmf(Value y) const { return p0->pmf(y); }
  Value sample(Rng& rng) const { return p0->sample(rng); }
};

/// Validates theta > 0 and a non-null P0.
BaseMeasure make_base(double theta, std::shared_ptr<const DiscreteDistribution> p0);

}  // namespace fvddp
