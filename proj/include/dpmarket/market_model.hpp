#ifndef DPMARKET_MARKET_MODEL_HPP
#define DPMARKET_MARKET_MODEL_HPP

#include <cstdint>
#include <random>

#include "dpmarket/types.hpp"

namespace dpmarket {

// Exact answer q(x) = sum_j q_j x_j.
double query_answer(const LinearQuery& q, const Database& x);

// Semi-norm f(q) of the coefficient vector, per q.norm_kind.
double semi_norm(const LinearQuery& q);

// Value intensity A(q). May be negative for the LogShift kind; trade
// feasibility is decided downstream, not here.
double value_intensity(const LinearQuery& q);

// Deterministic Laplace noise source with variance sigma per draw.
// Uses the inverse-CDF transform on mt19937_64 output so that a given seed
// produces the same stream on every platform.
class SeededLaplace {
 public:
  explicit SeededLaplace(std::uint64_t seed) : rng_(seed) {}

  double next(double sigma);

 private:
  std::mt19937_64 rng_;
};

// Noisy answer q(x) + xi with xi ~ Lap(0, sqrt(sigma/2)); Var[xi] = sigma.
double laplace_answer(const LinearQuery& q, const Database& x, double sigma,
                      std::uint64_t seed);

// Upper bound on owner i's privacy loss: gamma |q_i| / sqrt(sigma/2).
// Index i is zero-based.
double privacy_loss_bound(std::size_t i, const LinearQuery& q, double sigma,
                          const MarketScenario& s);

// Micro-payment to owner i: gamma c_i |q_i| / sqrt(sigma/2).
double micro_payment(std::size_t i, const LinearQuery& q, double sigma,
                     const MarketScenario& s);

// Sum of all micro-payments; equals gamma_threshold(q, s) / sqrt(sigma).
double total_compensation(const LinearQuery& q, double sigma,
                          const MarketScenario& s);

// Aggregate privacy-cost threshold Gamma(q) = sqrt(2) gamma sum_i c_i |q_i|.
double gamma_threshold(const LinearQuery& q, const MarketScenario& s);

}  // namespace dpmarket

#endif  // DPMARKET_MARKET_MODEL_HPP
