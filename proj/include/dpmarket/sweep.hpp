#ifndef DPMARKET_SWEEP_HPP
#define DPMARKET_SWEEP_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmarket/equilibrium.hpp"
#include "dpmarket/scenario.hpp"

namespace dpmarket {

// One grid point of a parameter sweep. For a k sweep the row holds the
// Stage II outcome at that posted k; for p, q and gamma sweeps it holds the
// full equilibrium of the modified instance.
struct SweepRow {
  double value = 0.0;      // the swept variable
  double intensity = 0.0;  // A
  double gamma = 0.0;      // Gamma
  Regime regime = Regime::NoTrade;
  std::optional<double> k_star;      // nullopt -> "indifferent"
  std::optional<double> sigma_star;  // nullopt -> "no-trade"
  double maker_profit = 0.0;         // Psi*
  double buyer_utility = 0.0;        // Phi*
};

std::vector<SweepRow> run_sweep(const LinearQuery& q, const MarketScenario& s,
                                const SweepRequest& request);

// Fixed header and column order:
//   value,A,Gamma,regime,k_star,sigma_star,psi_star,phi_star
// Floats use shortest round-trip formatting; the markers "indifferent" and
// "no-trade" appear literally.
std::string sweep_to_csv(std::span<const SweepRow> rows);

// Round-trips sweep_to_csv output; used by the CSV re-ingestion tests.
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

}  // namespace dpmarket

#endif  // DPMARKET_SWEEP_HPP
