#ifndef DPMARKET_PRICING_HPP
#define DPMARKET_PRICING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dpmarket/market_model.hpp"
#include "dpmarket/types.hpp"

namespace dpmarket {

// The maker's pricing decision: level k > 0 plus the scenario exponent.
struct PricingSpec {
  double level = 1.0;     // k
  double exponent = 1.0;  // p

  void validate(bool allow_out_of_range_p = false) const;
};

// Coefficients alpha certifying that a target query is linearly answerable
// from a bundle: sum_j alpha_j q_j = q and sum_j alpha_j^2 sigma_j <= sigma.
struct AnswerabilityWitness {
  std::vector<double> alphas;

  void validate() const;  // at least one alpha nonzero
};

struct ArbitrageReport {
  double target_price = 0.0;
  double bundle_price_sum = 0.0;
  bool violated = false;
  double slack = 0.0;  // bundle_price_sum - target_price
};

// The power transform g(x) = x^p applied to nonnegative prices. p == 1 is
// exact pass-through so that the linear pricing case involves no pow() at all.
double price_transform(double x, double p);

// Original tariff k f(q)^2 / sigma.
double original_price(const PricedQuery& pq, double k);

// max{ g(original), total compensation } with the scenario's exponent.
double balanced_price(const PricedQuery& pq, double k, const MarketScenario& s);

// Gross informational value A(q) / sqrt(sigma).
double buyer_valuation(const PricedQuery& pq);

// Valuation minus balanced price; may be negative.
double buyer_utility(const PricedQuery& pq, double k, const MarketScenario& s);

// (g(original) - total compensation)^+; never negative.
double maker_utility(const PricedQuery& pq, double k, const MarketScenario& s);

// Caches A(q), Gamma(q) and f(q) for one (query, scenario) pair so that
// repeated evaluations over (sigma, k) avoid re-walking the vectors.
class QueryPricingContext {
 public:
  QueryPricingContext(const LinearQuery& q, const MarketScenario& s);

  double intensity() const { return intensity_; }
  double gamma() const { return gamma_; }
  double seminorm() const { return seminorm_; }
  double exponent() const { return exponent_; }
  double sigma_min() const { return sigma_min_; }

  double original_price(double sigma, double k) const;
  double balanced_price(double sigma, double k) const;
  double buyer_utility(double sigma, double k) const;
  double maker_utility(double sigma, double k) const;

 private:
  double intensity_;
  double gamma_;
  double seminorm_;
  double exponent_;
  double sigma_min_;
};

// Amortizes sigma^(-1/2) and sigma^(-p) over a fixed sigma grid; the grid
// scans in the brute-force oracle run through this.
class SigmaGridPricer {
 public:
  SigmaGridPricer(const QueryPricingContext& ctx,
                  std::span<const double> sigmas);

  void reset(std::span<const double> sigmas);

  std::size_t size() const { return sigmas_.size(); }
  double sigma(std::size_t i) const { return sigmas_[i]; }

  // Fills out[i] with the buyer's utility at (sigmas[i], k).
  void buyer_utilities(double k, std::span<double> out) const;

  double buyer_utility(std::size_t i, double k) const;
  double maker_utility(std::size_t i, double k) const;

 private:
  const QueryPricingContext* ctx_;
  std::vector<double> sigmas_;
  std::vector<double> inv_sqrt_;   // sigma^(-1/2)
  std::vector<double> inv_pow_p_;  // sigma^(-p)
};

// True iff the witness certifies that `target` is linearly answerable from
// `bundle`: max-norm coefficient residual <= tol and the combined variance
// does not exceed target sigma by more than a relative tol.
bool is_linearly_answerable(const PricedQuery& target,
                            std::span<const PricedQuery> bundle,
                            const AnswerabilityWitness& witness, double tol);

struct AnswerableInstance {
  PricedQuery target;
  std::vector<PricedQuery> bundle;
  AnswerabilityWitness witness;
};

// Samples a bundle and coefficients from `seed`, then builds the target as
// the exact combination, so the witness certifies answerability tightly.
// n must match the scenario dimension when the instance later feeds
// check_arbitrage.
AnswerableInstance make_answerable_instance(std::uint64_t seed, std::size_t n,
                                            std::size_t m,
                                            const MarketScenario& s);

// Prices target and bundle under the scenario and flags an arbitrage
// violation when the target costs more than the bundle, beyond
// tol * (1 + |bundle sum|). Rejects non-answerable inputs.
ArbitrageReport check_arbitrage(const PricedQuery& target,
                                std::span<const PricedQuery> bundle,
                                const AnswerabilityWitness& witness, double k,
                                const MarketScenario& s, double tol);

// Default relative tolerance for the arbitrage comparison: Cauchy-Schwarz
// equality cases sit exactly on the boundary in real arithmetic.
inline constexpr double kArbitrageTol = 1e-9;

}  // namespace dpmarket

#endif  // DPMARKET_PRICING_HPP
