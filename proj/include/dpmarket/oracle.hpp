#ifndef DPMARKET_ORACLE_HPP
#define DPMARKET_ORACLE_HPP

#include <cstddef>
#include <vector>

#include "dpmarket/pricing.hpp"
#include "dpmarket/types.hpp"

// Brute-force verification layer. Everything here reaches the game only
// through the pricing definitions (utilities evaluated pointwise on grids);
// none of the closed-form equilibrium expressions are used, so a
// transcription error there cannot leak into these results.

namespace dpmarket::oracle {

enum class GridScale { Linear, Logarithmic };

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 2;
  GridScale scale = GridScale::Logarithmic;

  void validate() const;
  double at(std::size_t i) const;
  std::vector<double> values() const;
};

// Default scan ranges: the quantities of interest span several decades, so
// both grids are logarithmic with one linear refinement pass on top.
GridSpec default_sigma_grid(const MarketScenario& s);
GridSpec default_k_grid();

inline constexpr std::size_t kDefaultGridPoints = 4096;

// Maker profit below this across every scanned k counts as break-even.
inline constexpr double kBreakEvenProfit = 1e-8;

struct BestResponse {
  double sigma = 0.0;
  double utility = 0.0;
  // Maximizer sat at the top edge with the utility still climbing: the
  // buyer would keep increasing sigma, i.e. walk away.
  bool no_trade = false;
};

// Scans buyer utility over the sigma grid (plus the price-branch crossing
// point, located by bisection on the two price branches) and refines the
// winner with one linear pass.
BestResponse oracle_best_response(const LinearQuery& q, double k,
                                  const MarketScenario& s,
                                  const GridSpec& sigma_grid);

struct EquilibriumScan {
  double k = 0.0;
  double sigma = 0.0;
  double profit = 0.0;
  double buyer_utility = 0.0;
  bool break_even = false;  // profit below kBreakEvenProfit for every k
  bool no_trade = false;    // buyer walks away for every k
  // Refined grid spacings at the winner; the argmax cannot be located more
  // tightly than these.
  double k_resolution = 0.0;
  double sigma_resolution = 0.0;
};

// Bilevel scan: for each k, the buyer's grid best response, then maker
// utility at that response; returns the profit-maximizing triple after a
// linear refinement pass in k.
EquilibriumScan oracle_equilibrium(const LinearQuery& q,
                                   const MarketScenario& s,
                                   const GridSpec& k_grid,
                                   const GridSpec& sigma_grid);

struct OracleReport {
  double oracle_value = 0.0;
  double closed_form_value = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool within_tolerance = false;
  double grid_resolution_bound = 0.0;
};

struct ToleranceSpec {
  double atol = 1e-9;
  double rtol = 1e-3;
};

// within_tolerance <=> gap <= max(atol, rtol |closed_form|) + resolution bound.
OracleReport make_oracle_report(double oracle_value, double closed_form_value,
                                double resolution_bound, ToleranceSpec tol);

}  // namespace dpmarket::oracle

#endif  // DPMARKET_ORACLE_HPP
