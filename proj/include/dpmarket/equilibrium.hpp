#ifndef DPMARKET_EQUILIBRIUM_HPP
#define DPMARKET_EQUILIBRIUM_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "dpmarket/pricing.hpp"
#include "dpmarket/types.hpp"

namespace dpmarket {

// Trading regimes, split by the value intensity A against the privacy-cost
// threshold Gamma:
//   Profitable  A >= 2 p Gamma   (maker earns strictly positive profit)
//   BreakEven   Gamma < A < 2 p Gamma   (trade happens, maker nets zero)
//   NoTrade     A <= Gamma   (buyer walks away; sigma -> infinity)
// Ties resolve outward: A == 2 p Gamma counts as Profitable and
// A == Gamma as NoTrade. Gamma == 0 with A > 0 is Profitable.
enum class Regime { Profitable, BreakEven, NoTrade };

std::string_view regime_name(Regime r);

struct EquilibriumResult {
  Regime regime = Regime::NoTrade;
  // nullopt means the maker is indifferent over all k > 0.
  std::optional<double> k_star;
  // nullopt means no trade: the buyer's supremum sits at sigma -> infinity.
  std::optional<double> sigma_star;
  double maker_profit = 0.0;
  double buyer_utility = 0.0;
  // Knees of the piecewise profit curve; populated only when Profitable.
  std::optional<double> k_lower;
  std::optional<double> k_upper;
};

Regime classify_regime(const LinearQuery& q, const MarketScenario& s);

// Variance at which the two price branches meet:
// (k^p f^(2p) / Gamma)^(2 / (2p - 1)). Requires Gamma > 0; with Gamma == 0
// the price is the pure original branch and no threshold exists.
double sigma_pricing_threshold(const LinearQuery& q, double k,
                               const MarketScenario& s);

// Stage II: the buyer's optimal variance for a posted k, clamped at
// sigma_min. nullopt encodes the no-trade outcome.
std::optional<double> buyer_best_response(const LinearQuery& q, double k,
                                          const MarketScenario& s);

// Stage I objective: maker utility evaluated at the buyer's best response.
// Zero in the BreakEven and NoTrade regimes; in the Profitable regime a
// three-piece curve that is zero up to k_lower, rises to its peak at
// k_upper and decays beyond it.
double maker_profit_curve(const LinearQuery& q, double k,
                          const MarketScenario& s);

// Backward-induction solution of the two-stage game.
EquilibriumResult stackelberg_equilibrium(const LinearQuery& q,
                                          const MarketScenario& s);

struct RegionRow {
  double q_value = 0.0;
  double intensity = 0.0;
  double gamma = 0.0;
  double two_p_gamma = 0.0;
  Regime regime = Regime::NoTrade;
};

struct RegionBoundary {
  double q_lo = 0.0;  // bracket around the regime change, width <= 1e-6
  double q_hi = 0.0;
  Regime before = Regime::NoTrade;
  Regime after = Regime::NoTrade;
};

struct RegionTable {
  std::vector<RegionRow> rows;
  std::vector<RegionBoundary> boundaries;
};

// Sweeps a scalar query q over [q_lo, q_hi] (resolution grid points),
// tabulating A, Gamma, 2 p Gamma and the regime, and bisecting each regime
// change to a bracket of width 1e-6. `prototype` supplies the norm and
// intensity choices and must be one-dimensional.
RegionTable region_boundaries(const LinearQuery& prototype, double q_lo,
                              double q_hi, const MarketScenario& s,
                              std::size_t resolution);

}  // namespace dpmarket

#endif  // DPMARKET_EQUILIBRIUM_HPP
