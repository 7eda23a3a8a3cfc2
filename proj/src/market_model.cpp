#include "dpmarket/market_model.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace dpmarket {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

}  // namespace

void LinearQuery::validate() const {
  require(!coeffs.empty(), "query: coefficient vector must have length >= 1");
  require(all_finite(coeffs), "query: all coefficients must be finite");
  if (norm_kind == NormKind::WeightedL2) {
    require(norm_weights.size() == coeffs.size(),
            "query: norm_weights length must match coeffs");
    for (double w : norm_weights) {
      require(std::isfinite(w) && w > 0.0,
              "query: every norm weight must be positive and finite");
    }
  }
  if (intensity_kind == IntensityKind::Constant ||
      intensity_kind == IntensityKind::LogShift) {
    require(std::isfinite(intensity_value),
            "query: intensity_value must be finite");
  }
  if (intensity_kind == IntensityKind::LogShift) {
    require(coeffs.size() == 1,
            "query: log_shift intensity requires a scalar query (n = 1)");
  }
}

void MarketScenario::validate(bool allow_out_of_range_p) const {
  require(!privacy_weights.empty(),
          "scenario: privacy_weights must have length >= 1");
  for (double c : privacy_weights) {
    require(std::isfinite(c) && c > 0.0,
            "scenario: every privacy weight must be positive and finite");
  }
  require(std::isfinite(change_bound) && change_bound > 0.0,
          "scenario: gamma must be positive and finite");
  require(std::isfinite(sigma_min) && sigma_min > 0.0,
          "scenario: sigma_min must be positive and finite");
  require(std::isfinite(exponent) && exponent > 0.0,
          "scenario: p must be positive and finite");
  if (!allow_out_of_range_p) {
    require(exponent > 0.5 && exponent <= 1.0,
            "scenario: p must lie in (1/2, 1]");
  }
  for (const auto& [key, value] : sigma_min_overrides) {
    require(!key.empty(), "scenario: sigma_min override key must be nonempty");
    require(std::isfinite(value) && value > 0.0,
            "scenario: sigma_min override must be positive and finite");
  }
}

double MarketScenario::sigma_min_for(const LinearQuery& q) const {
  for (const auto& [key, value] : sigma_min_overrides) {
    if (key == q.coeffs) return value;
  }
  return sigma_min;
}

void PricedQuery::validate() const {
  query.validate();
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw std::invalid_argument("priced query: sigma must be positive and finite");
  }
}

void Database::validate() const {
  if (!all_finite(items)) {
    throw std::invalid_argument("database: all items must be finite");
  }
}

double query_answer(const LinearQuery& q, const Database& x) {
  if (q.coeffs.size() != x.items.size()) {
    throw std::invalid_argument(
        "query_answer: query and database dimensions differ");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < q.coeffs.size(); ++j) {
    acc += q.coeffs[j] * x.items[j];
  }
  return acc;
}

double semi_norm(const LinearQuery& q) {
  double sum = 0.0;
  switch (q.norm_kind) {
    case NormKind::L2:
      for (double c : q.coeffs) sum += c * c;
      break;
    case NormKind::WeightedL2:
      if (q.norm_weights.size() != q.coeffs.size()) {
        throw std::invalid_argument(
            "semi_norm: norm_weights length must match coeffs");
      }
      for (std::size_t j = 0; j < q.coeffs.size(); ++j) {
        sum += q.norm_weights[j] * q.coeffs[j] * q.coeffs[j];
      }
      break;
  }
  return std::sqrt(sum);
}

double value_intensity(const LinearQuery& q) {
  switch (q.intensity_kind) {
    case IntensityKind::LogSupport: {
      std::size_t support = 0;
      for (double c : q.coeffs) {
        if (std::fabs(c) > kSupportZeroTol) ++support;
      }
      return std::log(1.0 + static_cast<double>(support));
    }
    case IntensityKind::Constant:
      return q.intensity_value;
    case IntensityKind::Table:
      for (const auto& [key, value] : q.intensity_table) {
        if (key == q.coeffs) return value;
      }
      throw std::invalid_argument(
          "value_intensity: no table entry for this query");
    case IntensityKind::LogShift: {
      if (q.coeffs.size() != 1) {
        throw std::invalid_argument(
            "value_intensity: log_shift requires a scalar query");
      }
      const double arg = q.coeffs[0] + q.intensity_value;
      if (arg <= 0.0) {
        throw std::invalid_argument(
            "value_intensity: log_shift argument must be positive");
      }
      return std::log(arg);
    }
  }
  throw std::logic_error("value_intensity: unreachable");
}

double SeededLaplace::next(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("laplace: sigma must be positive and finite");
  }
  // 53-bit uniform in (0, 1); the half-step offset keeps u away from 0 and 1
  // so the inverse CDF below stays finite.
  const double u =
      (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  const double scale = std::sqrt(sigma / 2.0);  // Var[Lap(0, b)] = 2 b^2
  const double centered = u - 0.5;
  const double magnitude = -std::log(1.0 - 2.0 * std::fabs(centered));
  return centered < 0.0 ? -scale * magnitude : scale * magnitude;
}

double laplace_answer(const LinearQuery& q, const Database& x, double sigma,
                      std::uint64_t seed) {
  const double exact = query_answer(q, x);
  SeededLaplace noise(seed);
  return exact + noise.next(sigma);
}

namespace {

void check_payment_args(std::size_t i, const LinearQuery& q, double sigma,
                        const MarketScenario& s) {
  if (i >= q.coeffs.size()) {
    throw std::invalid_argument("owner index out of range");
  }
  if (q.coeffs.size() != s.privacy_weights.size()) {
    throw std::invalid_argument(
        "query dimension must match scenario privacy_weights");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
}

}  // namespace

double privacy_loss_bound(std::size_t i, const LinearQuery& q, double sigma,
                          const MarketScenario& s) {
  check_payment_args(i, q, sigma, s);
  return s.change_bound * std::fabs(q.coeffs[i]) / std::sqrt(sigma / 2.0);
}

double micro_payment(std::size_t i, const LinearQuery& q, double sigma,
                     const MarketScenario& s) {
  check_payment_args(i, q, sigma, s);
  return s.privacy_weights[i] * privacy_loss_bound(i, q, sigma, s);
}

double total_compensation(const LinearQuery& q, double sigma,
                          const MarketScenario& s) {
  if (q.coeffs.size() != s.privacy_weights.size()) {
    throw std::invalid_argument(
        "query dimension must match scenario privacy_weights");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
  const double inv_scale = 1.0 / std::sqrt(sigma / 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.coeffs.size(); ++i) {
    acc += s.privacy_weights[i] * std::fabs(q.coeffs[i]);
  }
  return s.change_bound * acc * inv_scale;
}

double gamma_threshold(const LinearQuery& q, const MarketScenario& s) {
  if (q.coeffs.size() != s.privacy_weights.size()) {
    throw std::invalid_argument(
        "query dimension must match scenario privacy_weights");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < q.coeffs.size(); ++i) {
    acc += s.privacy_weights[i] * std::fabs(q.coeffs[i]);
  }
  return std::sqrt(2.0) * s.change_bound * acc;
}

}  // namespace dpmarket
