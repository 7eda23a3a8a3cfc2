#ifndef DPMARKET_TYPES_HPP
#define DPMARKET_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpmarket {

// Support counting for the log-support value intensity treats |q_j| below
// this as zero. The model works with exact zeros; floating point cannot.
inline constexpr double kSupportZeroTol = 1e-12;

enum class NormKind {
  L2,
  WeightedL2,  // sqrt(sum w_j q_j^2), w_j > 0
};

enum class IntensityKind {
  LogSupport,  // ln(1 + #{j : |q_j| > kSupportZeroTol})
  Constant,    // a fixed value, independent of the coefficients
  Table,       // exact-match lookup keyed by the coefficient vector
  LogShift,    // ln(q_1 + offset), scalar queries only
};

// A linear aggregation query: the buyer's object of purchase. Carries the
// coefficient vector together with the semi-norm and value-intensity choices
// that price and value it.
struct LinearQuery {
  std::vector<double> coeffs;
  NormKind norm_kind = NormKind::L2;
  std::vector<double> norm_weights;  // used iff norm_kind == WeightedL2

  IntensityKind intensity_kind = IntensityKind::LogSupport;
  double intensity_value = 0.0;  // Constant: the value; LogShift: the offset
  std::vector<std::pair<std::vector<double>, double>> intensity_table;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// One game instance: per-owner privacy weights, the neighboring-database
// change bound, the minimum tradable variance and the pricing exponent.
struct MarketScenario {
  std::vector<double> privacy_weights;  // c_i > 0, money per unit privacy loss
  double change_bound = 1.0;            // gamma > 0
  double sigma_min = 1e-2;              // > 0
  double exponent = 1.0;                // p in (1/2, 1]

  // Optional per-query overrides of sigma_min, keyed by coefficient vector.
  std::vector<std::pair<std::vector<double>, double>> sigma_min_overrides;

  // allow_out_of_range_p exists solely so tests can probe pricing behavior
  // outside (1/2, 1]; library callers keep the default.
  void validate(bool allow_out_of_range_p = false) const;

  double sigma_min_for(const LinearQuery& q) const;
};

// A query paired with a requested answer variance.
struct PricedQuery {
  LinearQuery query;
  double sigma = 1.0;  // > 0

  void validate() const;
};

struct Database {
  std::vector<double> items;

  void validate() const;
};

}  // namespace dpmarket

#endif  // DPMARKET_TYPES_HPP
