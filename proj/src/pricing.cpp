#include "dpmarket/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dpmarket {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

void check_sigma_k(double sigma, double k) {
  require(std::isfinite(sigma) && sigma > 0.0,
          "sigma must be positive and finite");
  require(std::isfinite(k) && k > 0.0, "k must be positive and finite");
}

double uniform_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace

void PricingSpec::validate(bool allow_out_of_range_p) const {
  require(std::isfinite(level) && level > 0.0,
          "pricing spec: k must be positive and finite");
  require(std::isfinite(exponent) && exponent > 0.0,
          "pricing spec: p must be positive and finite");
  if (!allow_out_of_range_p) {
    require(exponent > 0.5 && exponent <= 1.0,
            "pricing spec: p must lie in (1/2, 1]");
  }
}

void AnswerabilityWitness::validate() const {
  for (double a : alphas) {
    require(std::isfinite(a), "witness: coefficients must be finite");
    if (a != 0.0) return;
  }
  throw std::invalid_argument("witness: at least one alpha must be nonzero");
}

double price_transform(double x, double p) {
  if (p == 1.0) return x;
  return std::pow(x, p);
}

double original_price(const PricedQuery& pq, double k) {
  check_sigma_k(pq.sigma, k);
  const double f = semi_norm(pq.query);
  return k * f * f / pq.sigma;
}

double balanced_price(const PricedQuery& pq, double k,
                      const MarketScenario& s) {
  return std::max(price_transform(original_price(pq, k), s.exponent),
                  total_compensation(pq.query, pq.sigma, s));
}

double buyer_valuation(const PricedQuery& pq) {
  require(std::isfinite(pq.sigma) && pq.sigma > 0.0,
          "sigma must be positive and finite");
  return value_intensity(pq.query) / std::sqrt(pq.sigma);
}

double buyer_utility(const PricedQuery& pq, double k,
                     const MarketScenario& s) {
  return buyer_valuation(pq) - balanced_price(pq, k, s);
}

double maker_utility(const PricedQuery& pq, double k,
                     const MarketScenario& s) {
  const double gap = price_transform(original_price(pq, k), s.exponent) -
                     total_compensation(pq.query, pq.sigma, s);
  return std::max(gap, 0.0);
}

QueryPricingContext::QueryPricingContext(const LinearQuery& q,
                                         const MarketScenario& s)
    : intensity_(value_intensity(q)),
      gamma_(gamma_threshold(q, s)),
      seminorm_(semi_norm(q)),
      exponent_(s.exponent),
      sigma_min_(s.sigma_min_for(q)) {}

double QueryPricingContext::original_price(double sigma, double k) const {
  check_sigma_k(sigma, k);
  return k * seminorm_ * seminorm_ / sigma;
}

double QueryPricingContext::balanced_price(double sigma, double k) const {
  return std::max(price_transform(original_price(sigma, k), exponent_),
                  gamma_ / std::sqrt(sigma));
}

double QueryPricingContext::buyer_utility(double sigma, double k) const {
  return intensity_ / std::sqrt(sigma) - balanced_price(sigma, k);
}

double QueryPricingContext::maker_utility(double sigma, double k) const {
  const double gap = price_transform(original_price(sigma, k), exponent_) -
                     gamma_ / std::sqrt(sigma);
  return std::max(gap, 0.0);
}

SigmaGridPricer::SigmaGridPricer(const QueryPricingContext& ctx,
                                 std::span<const double> sigmas)
    : ctx_(&ctx) {
  reset(sigmas);
}

void SigmaGridPricer::reset(std::span<const double> sigmas) {
  sigmas_.assign(sigmas.begin(), sigmas.end());
  inv_sqrt_.resize(sigmas_.size());
  inv_pow_p_.resize(sigmas_.size());
  const double p = ctx_->exponent();
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    inv_sqrt_[i] = 1.0 / std::sqrt(sigmas_[i]);
    inv_pow_p_[i] = p == 1.0 ? 1.0 / sigmas_[i] : std::pow(sigmas_[i], -p);
  }
}

void SigmaGridPricer::buyer_utilities(double k, std::span<double> out) const {
  const double coeff = price_transform(
      k * ctx_->seminorm() * ctx_->seminorm(), ctx_->exponent());
  const double a = ctx_->intensity();
  const double g = ctx_->gamma();
  const std::size_t n = sigmas_.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a * inv_sqrt_[i] -
             std::max(coeff * inv_pow_p_[i], g * inv_sqrt_[i]);
  }
}

double SigmaGridPricer::buyer_utility(std::size_t i, double k) const {
  const double coeff = price_transform(
      k * ctx_->seminorm() * ctx_->seminorm(), ctx_->exponent());
  return ctx_->intensity() * inv_sqrt_[i] -
         std::max(coeff * inv_pow_p_[i], ctx_->gamma() * inv_sqrt_[i]);
}

double SigmaGridPricer::maker_utility(std::size_t i, double k) const {
  const double coeff = price_transform(
      k * ctx_->seminorm() * ctx_->seminorm(), ctx_->exponent());
  return std::max(coeff * inv_pow_p_[i] - ctx_->gamma() * inv_sqrt_[i], 0.0);
}

bool is_linearly_answerable(const PricedQuery& target,
                            std::span<const PricedQuery> bundle,
                            const AnswerabilityWitness& witness, double tol) {
  require(!bundle.empty(), "answerability: bundle must be nonempty");
  require(witness.alphas.size() == bundle.size(),
          "answerability: witness length must match bundle size");
  require(tol >= 0.0, "answerability: tol must be nonnegative");
  const std::size_t n = target.query.coeffs.size();
  for (const PricedQuery& pq : bundle) {
    require(pq.query.coeffs.size() == n,
            "answerability: bundle query dimensions must match target");
  }

  double variance = 0.0;
  for (std::size_t j = 0; j < bundle.size(); ++j) {
    variance += witness.alphas[j] * witness.alphas[j] * bundle[j].sigma;
  }
  if (variance > target.sigma * (1.0 + tol)) return false;

  for (std::size_t i = 0; i < n; ++i) {
    double combined = 0.0;
    for (std::size_t j = 0; j < bundle.size(); ++j) {
      combined += witness.alphas[j] * bundle[j].query.coeffs[i];
    }
    if (std::fabs(combined - target.query.coeffs[i]) > tol) return false;
  }
  return true;
}

AnswerableInstance make_answerable_instance(std::uint64_t seed, std::size_t n,
                                            std::size_t m,
                                            const MarketScenario& s) {
  require(n >= 1 && m >= 1, "answerable instance: n and m must be >= 1");
  std::mt19937_64 rng(seed);

  AnswerableInstance inst;
  inst.bundle.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    PricedQuery pq;
    pq.query.coeffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pq.query.coeffs[i] = uniform_in(rng, -2.0, 2.0);
    }
    // log-uniform sigma spanning a couple of decades above sigma_min
    pq.sigma = s.sigma_min * std::exp(uniform_in(rng, 0.0, std::log(100.0)));
    inst.bundle.push_back(std::move(pq));
  }

  inst.witness.alphas.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double a = uniform_in(rng, -2.0, 2.0);
    // keep the witness well away from the all-zero degenerate case
    if (std::fabs(a) < 0.1) a = a < 0.0 ? -0.1 : 0.1;
    inst.witness.alphas[j] = a;
  }

  inst.target.query.coeffs.assign(n, 0.0);
  double variance = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double a = inst.witness.alphas[j];
    for (std::size_t i = 0; i < n; ++i) {
      inst.target.query.coeffs[i] += a * inst.bundle[j].query.coeffs[i];
    }
    variance += a * a * inst.bundle[j].sigma;
  }
  inst.target.sigma = variance;  // tight by construction
  return inst;
}

ArbitrageReport check_arbitrage(const PricedQuery& target,
                                std::span<const PricedQuery> bundle,
                                const AnswerabilityWitness& witness, double k,
                                const MarketScenario& s, double tol) {
  witness.validate();
  if (!is_linearly_answerable(target, bundle, witness, tol)) {
    throw std::invalid_argument(
        "check_arbitrage: witness does not certify answerability");
  }

  ArbitrageReport report;
  report.target_price = balanced_price(target, k, s);
  for (const PricedQuery& pq : bundle) {
    report.bundle_price_sum += balanced_price(pq, k, s);
  }
  report.slack = report.bundle_price_sum - report.target_price;
  report.violated = report.target_price >
                    report.bundle_price_sum +
                        tol * (1.0 + std::fabs(report.bundle_price_sum));
  return report;
}

}  // namespace dpmarket
