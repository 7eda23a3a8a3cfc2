#include "dpmarket/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "dpmarket/market_model.hpp"

namespace dpmarket {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

struct GameQuantities {
  double intensity;   // A(q)
  double gamma;       // Gamma(q)
  double seminorm;    // f(q)
  double p;
  double sigma_min;
};

GameQuantities quantities(const LinearQuery& q, const MarketScenario& s) {
  return {value_intensity(q), gamma_threshold(q, s), semi_norm(q), s.exponent,
          s.sigma_min_for(q)};
}

Regime classify(const GameQuantities& g) {
  if (g.intensity <= g.gamma) return Regime::NoTrade;
  if (g.intensity >= 2.0 * g.p * g.gamma) return Regime::Profitable;
  return Regime::BreakEven;
}

// Knees of the Profitable-regime profit curve. Requires f > 0.
double k_lower_knee(const GameQuantities& g) {
  if (g.gamma == 0.0) return 0.0;
  return std::pow(g.gamma / std::pow(g.seminorm, 2.0 * g.p), 1.0 / g.p) *
         std::pow(g.sigma_min, (2.0 * g.p - 1.0) / (2.0 * g.p));
}

double k_upper_knee(const GameQuantities& g) {
  return std::pow(g.intensity / (2.0 * g.p * std::pow(g.seminorm, 2.0 * g.p)),
                  1.0 / g.p) *
         std::pow(g.sigma_min, (2.0 * g.p - 1.0) / (2.0 * g.p));
}

// Interior critical point of the buyer's original-branch utility:
// (2 p k^p f^(2p) / A)^(2 / (2p - 1)).
double interior_optimum(const GameQuantities& g, double k) {
  return std::pow(2.0 * g.p * std::pow(k, g.p) *
                      std::pow(g.seminorm, 2.0 * g.p) / g.intensity,
                  2.0 / (2.0 * g.p - 1.0));
}

double threshold_sigma(const GameQuantities& g, double k) {
  return std::pow(
      std::pow(k, g.p) * std::pow(g.seminorm, 2.0 * g.p) / g.gamma,
      2.0 / (2.0 * g.p - 1.0));
}

void check_k(double k) {
  require(std::isfinite(k) && k > 0.0, "k must be positive and finite");
}

}  // namespace

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Profitable:
      return "Profitable";
    case Regime::BreakEven:
      return "BreakEven";
    case Regime::NoTrade:
      return "NoTrade";
  }
  return "unknown";
}

Regime classify_regime(const LinearQuery& q, const MarketScenario& s) {
  return classify(quantities(q, s));
}

double sigma_pricing_threshold(const LinearQuery& q, double k,
                               const MarketScenario& s) {
  check_k(k);
  const GameQuantities g = quantities(q, s);
  require(g.gamma > 0.0,
          "sigma_pricing_threshold: undefined for Gamma == 0 "
          "(price is the pure original branch)");
  return threshold_sigma(g, k);
}

std::optional<double> buyer_best_response(const LinearQuery& q, double k,
                                          const MarketScenario& s) {
  check_k(k);
  const GameQuantities g = quantities(q, s);
  switch (classify(g)) {
    case Regime::NoTrade:
      return std::nullopt;
    case Regime::BreakEven:
      // Gamma > 0 here: BreakEven requires Gamma < A with A < 2pGamma.
      return std::max(g.sigma_min, threshold_sigma(g, k));
    case Regime::Profitable:
      if (g.seminorm == 0.0) return g.sigma_min;  // price is identically zero
      return std::max(g.sigma_min, interior_optimum(g, k));
  }
  return std::nullopt;
}

double maker_profit_curve(const LinearQuery& q, double k,
                          const MarketScenario& s) {
  check_k(k);
  const GameQuantities g = quantities(q, s);
  if (classify(g) != Regime::Profitable) return 0.0;
  if (g.seminorm == 0.0) return 0.0;  // zero-cost query, price identically zero

  const double k_lo = k_lower_knee(g);
  const double k_hi = k_upper_knee(g);
  if (k <= k_lo) return 0.0;
  if (k <= k_hi) {
    const double plateau =
        price_transform(k * g.seminorm * g.seminorm / g.sigma_min, g.p) -
        g.gamma / std::sqrt(g.sigma_min);
    return std::max(plateau, 0.0);
  }
  return std::pow(g.intensity / (2.0 * g.p * std::pow(k, g.p) *
                                 std::pow(g.seminorm, 2.0 * g.p)),
                  1.0 / (2.0 * g.p - 1.0)) *
         (g.intensity / (2.0 * g.p) - g.gamma);
}

EquilibriumResult stackelberg_equilibrium(const LinearQuery& q,
                                          const MarketScenario& s) {
  const GameQuantities g = quantities(q, s);
  EquilibriumResult result;
  result.regime = classify(g);

  switch (result.regime) {
    case Regime::NoTrade:
      // Buyer keeps pushing sigma upward; both utilities vanish in the limit.
      break;
    case Regime::BreakEven: {
      // Maker is indifferent over k; report the response at the canonical
      // representative k = 1 so downstream output stays reproducible.
      const double sigma = std::max(g.sigma_min, threshold_sigma(g, 1.0));
      result.sigma_star = sigma;
      result.maker_profit = 0.0;
      result.buyer_utility = buyer_utility({q, sigma}, 1.0, s);
      break;
    }
    case Regime::Profitable: {
      result.sigma_star = g.sigma_min;
      if (g.seminorm == 0.0) {
        // Gamma == 0 and A > 0: the price is identically zero, so every k
        // is optimal and the buyer pockets the full valuation.
        result.maker_profit = 0.0;
        result.buyer_utility = g.intensity / std::sqrt(g.sigma_min);
        result.k_lower = 0.0;
        break;
      }
      const double k_star = k_upper_knee(g);
      result.k_star = k_star;
      result.k_lower = k_lower_knee(g);
      result.k_upper = k_star;
      result.maker_profit = maker_profit_curve(q, k_star, s);
      result.buyer_utility = buyer_utility({q, g.sigma_min}, k_star, s);
      break;
    }
  }
  return result;
}

RegionTable region_boundaries(const LinearQuery& prototype, double q_lo,
                              double q_hi, const MarketScenario& s,
                              std::size_t resolution) {
  require(prototype.coeffs.size() == 1,
          "region_boundaries: prototype query must be one-dimensional");
  require(s.privacy_weights.size() == 1,
          "region_boundaries: scenario must be one-dimensional");
  require(resolution >= 2, "region_boundaries: resolution must be >= 2");
  require(q_lo < q_hi, "region_boundaries: empty sweep interval");

  LinearQuery probe = prototype;
  const auto eval = [&](double qv) {
    probe.coeffs[0] = qv;
    RegionRow row;
    row.q_value = qv;
    row.intensity = value_intensity(probe);
    row.gamma = gamma_threshold(probe, s);
    row.two_p_gamma = 2.0 * s.exponent * row.gamma;
    row.regime = classify_regime(probe, s);
    return row;
  };

  RegionTable table;
  table.rows.reserve(resolution);
  const double step = (q_hi - q_lo) / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double qv =
        i + 1 == resolution ? q_hi : q_lo + step * static_cast<double>(i);
    table.rows.push_back(eval(qv));
  }

  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const Regime before = table.rows[i - 1].regime;
    if (table.rows[i].regime == before) continue;
    double lo = table.rows[i - 1].q_value;
    double hi = table.rows[i].q_value;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      probe.coeffs[0] = mid;
      if (classify_regime(probe, s) == before) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    // a narrow band could hide between grid points; label from the bracket
    probe.coeffs[0] = hi;
    table.boundaries.push_back({lo, hi, before, classify_regime(probe, s)});
  }
  return table;
}

}  // namespace dpmarket
