#ifndef DPMARKET_VERIFY_HPP
#define DPMARKET_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "dpmarket/equilibrium.hpp"
#include "dpmarket/oracle.hpp"
#include "dpmarket/pricing.hpp"

// Comparison layer between the closed forms and the brute-force oracle.
// This is the one place allowed to see both sides.

namespace dpmarket::verify {

// A randomly drawn (query, scenario) pair. Parameters stay inside the
// default oracle grids so the scan always brackets the optimum.
struct RandomInstance {
  LinearQuery query;
  MarketScenario scenario;
};

struct InstanceOptions {
  // Fixed exponent; nullopt draws p uniformly from (0.55, 1.0).
  std::optional<double> exponent;
  // Target regime; nullopt rotates Profitable/BreakEven/NoTrade by seed.
  std::optional<Regime> regime;
  std::size_t max_dimension = 8;
};

RandomInstance make_random_instance(std::uint64_t seed,
                                    const InstanceOptions& options);

struct ComparisonReport {
  Regime closed_form_regime = Regime::NoTrade;
  bool regime_consistent = false;
  // Populated (and checked) only for Profitable instances; the other
  // regimes have indifferent k / unbounded sigma.
  oracle::OracleReport k;
  oracle::OracleReport sigma;
  oracle::OracleReport profit;
  bool all_within = false;
};

// Runs the closed-form solution and the bilevel grid scan side by side.
ComparisonReport compare(const LinearQuery& q, const MarketScenario& s,
                         const oracle::GridSpec& k_grid,
                         const oracle::GridSpec& sigma_grid,
                         oracle::ToleranceSpec tol = {});

ComparisonReport compare_default(const LinearQuery& q,
                                 const MarketScenario& s,
                                 oracle::ToleranceSpec tol = {});

// A found arbitrage violation, for reporting and replay.
struct ViolationCase {
  AnswerableInstance instance;
  ArbitrageReport report;
  std::uint64_t seed = 0;
};

// Exhaustive alpha-grid hunt over random two-query bundles. Returns the
// first violation, if any shows up within max_trials price comparisons.
// With p in (1/2, 1] this never finds one; with p > 1 it does quickly.
std::optional<ViolationCase> find_arbitrage_violation(const MarketScenario& s,
                                                      double k,
                                                      std::uint64_t seed,
                                                      std::size_t max_trials);

struct VerifyOptions {
  int instances = 200;
  std::uint64_t seed = 1;
  oracle::ToleranceSpec tolerance;
  // Grid sizes for the oracle comparisons; defaults mirror the oracle module.
  std::size_t grid_points = oracle::kDefaultGridPoints;
};

struct VerifySummary {
  int oracle_total = 0;
  int oracle_passed = 0;
  int profitable_total = 0;
  int profitable_passed = 0;
  int breakeven_total = 0;
  int breakeven_passed = 0;
  int notrade_total = 0;
  int notrade_passed = 0;
  int arbitrage_total = 0;
  int arbitrage_passed = 0;
  std::optional<std::uint64_t> first_failing_seed;
  std::optional<ViolationCase> violation;
  std::string detail;  // human-readable per-section report

  bool all_passed() const {
    return oracle_passed == oracle_total && arbitrage_passed == arbitrage_total;
  }
};

// N oracle comparisons plus N arbitrage checks seeded from `options.seed`.
// The base scenario supplies the exponent; when it lies outside (1/2, 1]
// the arbitrage section switches to the counterexample hunt and is expected
// to fail (that is the point of the test mode).
VerifySummary run_verification(const MarketScenario& base,
                               const VerifyOptions& options);

}  // namespace dpmarket::verify

#endif  // DPMARKET_VERIFY_HPP
