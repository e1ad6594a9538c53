#pragma once

#include <string_view>
#include <vector>

#include "fvddp/filter.hpp"
#include "fvddp/predictive.hpp"

namespace fvddp::testing {

/// Two collection times one unit apart, each observing the values 1 and 2:
/// the active set ends up as {(1,1),(2,1),(1,2),(2,2)}.
inline FilterState two_time_filter(std::string_view base = "poisson:3", double theta = 1.0,
                                     double sigma = 1.0, double prune_eps = kDefaultPruneEps) {
  const std::vector<Value> batch{1, 2};
  FilterState s = init(make_base(theta, parse_distribution(base)), sigma, prune_eps);
  s = update_batch(s, batch);
  s = advance_time(s, 1.0);
  return update_batch(s, batch);
}

/// Effectively nonatomic P0: ties between fresh draws have probability ~1e-12.
inline constexpr std::string_view kDiffuseBase = "uniform:1..1000000000000";

inline PredictiveState zero_state(std::string_view base = "poisson:3", double theta = 1.0) {
  return PredictiveState(make_base(theta, parse_distribution(base)), {},
                         WeightedNodeSet::point_mass(MultiplicityVector(0)));
}

}  // namespace fvddp::testing
