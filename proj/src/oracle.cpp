#include "dpmarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace dpmarket::oracle {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Locates the sigma at which the transformed original branch meets the
// compensation branch, by bisection on the branch comparison. This is the
// kink of the balanced price; including it as a scan candidate lets the
// grid resolve break-even responses far below grid spacing.
std::optional<double> branch_crossing(const QueryPricingContext& ctx, double k,
                                      double lo, double hi) {
  if (ctx.gamma() == 0.0 || ctx.seminorm() == 0.0) return std::nullopt;
  const auto original_dominates = [&](double sigma) {
    return price_transform(ctx.original_price(sigma, k), ctx.exponent()) >=
           ctx.gamma() / std::sqrt(sigma);
  };
  if (!original_dominates(lo) || original_dominates(hi)) return std::nullopt;
  // geometric bisection: the predicate flips exactly once for p > 1/2
  for (int iter = 0; iter < 100 && hi / lo - 1.0 > 1e-13; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (original_dominates(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

struct LightResponse {
  double sigma = 0.0;
  double utility = 0.0;
  bool no_trade = false;
};

// Maximizer at the top edge with the utility still strictly climbing over
// the last percent of the grid: the buyer would keep raising sigma.
bool increasing_at_top_edge(std::span<const double> utilities) {
  const std::size_t n = utilities.size();
  if (argmax_lowest(utilities) != n - 1) return false;
  const std::size_t tail = std::max<std::size_t>(2, n / 100);
  for (std::size_t i = n - tail; i + 1 < n; ++i) {
    if (!(utilities[i] < utilities[i + 1])) return false;
  }
  return true;
}

// One coarse scan plus two cheap candidates: the branch crossing and a
// parabolic fit through the argmax neighborhood (log-sigma coordinates).
// Used inside the bilevel k scan where a full refinement per k would be
// wasteful.
LightResponse light_best_response(const QueryPricingContext& ctx,
                                  const SigmaGridPricer& pricer,
                                  std::span<const double> utilities, double k,
                                  std::optional<double> crossing) {
  const std::size_t n = pricer.size();
  const std::size_t i0 = argmax_lowest(utilities);

  if (increasing_at_top_edge(utilities)) {
    return {pricer.sigma(n - 1), utilities[n - 1], true};
  }

  LightResponse best{pricer.sigma(i0), utilities[i0], false};

  if (crossing) {
    const double u = ctx.buyer_utility(*crossing, k);
    if (u > best.utility) best = {*crossing, u, false};
  }

  if (i0 > 0 && i0 + 1 < n) {
    const double l0 = std::log(pricer.sigma(i0));
    const double lm = std::log(pricer.sigma(i0 - 1));
    const double lp = std::log(pricer.sigma(i0 + 1));
    const double um = utilities[i0 - 1];
    const double u0 = utilities[i0];
    const double up = utilities[i0 + 1];
    const double denom = um - 2.0 * u0 + up;
    if (denom < 0.0) {
      const double h = 0.5 * (lp - lm);
      double delta = 0.5 * h * (um - up) / denom;
      delta = std::clamp(delta, lm - l0, lp - l0);
      const double cand = std::exp(l0 + delta);
      const double u = ctx.buyer_utility(cand, k);
      if (u > best.utility) best = {cand, u, false};
    }
  }
  return best;
}

}  // namespace

void GridSpec::validate() const {
  require(points >= 2, "grid: points must be >= 2");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
          "grid: requires lo < hi and finite bounds");
  if (scale == GridScale::Logarithmic) {
    require(lo > 0.0, "grid: logarithmic scale requires lo > 0");
  }
}

double GridSpec::at(std::size_t i) const {
  const double t =
      static_cast<double>(i) / static_cast<double>(points - 1);
  if (i == 0) return lo;
  if (i + 1 == points) return hi;
  if (scale == GridScale::Logarithmic) {
    return lo * std::pow(hi / lo, t);
  }
  return lo + (hi - lo) * t;
}

std::vector<double> GridSpec::values() const {
  validate();
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) out[i] = at(i);
  return out;
}

GridSpec default_sigma_grid(const MarketScenario& s) {
  return {std::max(1e-4, s.sigma_min), 1e4, kDefaultGridPoints,
          GridScale::Logarithmic};
}

GridSpec default_k_grid() {
  return {1e-4, 1e4, kDefaultGridPoints, GridScale::Logarithmic};
}

BestResponse oracle_best_response(const LinearQuery& q, double k,
                                  const MarketScenario& s,
                                  const GridSpec& sigma_grid) {
  require(std::isfinite(k) && k > 0.0, "k must be positive and finite");
  sigma_grid.validate();
  const QueryPricingContext ctx(q, s);
  require(sigma_grid.lo >= ctx.sigma_min() * (1.0 - 1e-12),
          "oracle_best_response: sigma grid extends below sigma_min");

  const std::vector<double> sigmas = sigma_grid.values();
  SigmaGridPricer pricer(ctx, sigmas);
  std::vector<double> utilities(sigmas.size());
  pricer.buyer_utilities(k, utilities);

  if (increasing_at_top_edge(utilities)) {
    return {sigmas.back(), utilities.back(), true};
  }

  const std::size_t i0 = argmax_lowest(utilities);
  BestResponse best{sigmas[i0], utilities[i0], false};

  const auto crossing = branch_crossing(ctx, k, sigma_grid.lo, sigma_grid.hi);
  if (crossing) {
    const double u = ctx.buyer_utility(*crossing, k);
    if (u > best.utility) best = {*crossing, u, false};
  }

  // one linear refinement pass around the coarse argmax
  const std::size_t lo_i = i0 > 0 ? i0 - 1 : 0;
  const std::size_t hi_i = std::min(i0 + 1, sigmas.size() - 1);
  GridSpec window{sigmas[lo_i], sigmas[hi_i], sigma_grid.points,
                  GridScale::Linear};
  const std::vector<double> refined = window.values();
  pricer.reset(refined);
  pricer.buyer_utilities(k, utilities);
  const std::size_t j = argmax_lowest(utilities);
  if (utilities[j] > best.utility) {
    best.sigma = refined[j];
    best.utility = utilities[j];
  }
  return best;
}

EquilibriumScan oracle_equilibrium(const LinearQuery& q,
                                   const MarketScenario& s,
                                   const GridSpec& k_grid,
                                   const GridSpec& sigma_grid) {
  k_grid.validate();
  sigma_grid.validate();
  const QueryPricingContext ctx(q, s);
  require(sigma_grid.lo >= ctx.sigma_min() * (1.0 - 1e-12),
          "oracle_equilibrium: sigma grid extends below sigma_min");

  const std::vector<double> sigmas = sigma_grid.values();
  const SigmaGridPricer pricer(ctx, sigmas);
  std::vector<double> utilities(sigmas.size());

  // Maker profit for one posted k: utility at the buyer's response, or zero
  // when the buyer's optimum escapes past the top of the grid (no sale at
  // any scanned precision).
  const auto profit_at = [&](double k, bool* no_trade) {
    pricer.buyer_utilities(k, utilities);
    const auto crossing = branch_crossing(ctx, k, sigma_grid.lo, sigma_grid.hi);
    const LightResponse r =
        light_best_response(ctx, pricer, utilities, k, crossing);
    *no_trade = r.no_trade;
    return r.no_trade ? 0.0 : ctx.maker_utility(r.sigma, k);
  };

  const std::vector<double> ks = k_grid.values();
  double max_profit = 0.0;
  std::size_t best_i = 0;
  bool all_no_trade = true;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    bool nt = false;
    const double profit = profit_at(ks[i], &nt);
    all_no_trade = all_no_trade && nt;
    if (profit > max_profit) {
      max_profit = profit;
      best_i = i;
    }
  }

  EquilibriumScan scan;
  if (all_no_trade) {
    scan.k = ks.front();
    scan.sigma = sigma_grid.hi;
    scan.profit = 0.0;
    scan.buyer_utility = ctx.buyer_utility(sigma_grid.hi, ks.front());
    scan.no_trade = true;
    return scan;
  }

  // linear refinement in k around the coarse winner (two coarse steps wide)
  const std::size_t lo_i = best_i >= 2 ? best_i - 2 : 0;
  const std::size_t hi_i = std::min(best_i + 2, ks.size() - 1);
  GridSpec window{ks[lo_i], ks[hi_i], k_grid.points, GridScale::Linear};
  const std::vector<double> refined = window.values();
  double best_k = ks[best_i];
  std::size_t best_j = 0;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    bool nt = false;
    const double profit = profit_at(refined[i], &nt);
    if (refined[i] <= best_k) best_j = i;  // nearest index at or below best_k
    if (profit > max_profit) {
      max_profit = profit;
      best_k = refined[i];
      best_j = i;
    }
  }

  // The light per-k responses carry O(grid-step) value noise, which near a
  // kinked profit peak can tilt the argmax by many refined steps. Re-rank
  // the winner's neighborhood with fully refined best responses.
  BestResponse response = oracle_best_response(q, best_k, s, sigma_grid);
  if (max_profit > kBreakEvenProfit) {
    double best_profit =
        response.no_trade ? 0.0 : ctx.maker_utility(response.sigma, best_k);
    const std::size_t span = 128;
    const std::size_t lo_j = best_j >= span ? best_j - span : 0;
    const std::size_t hi_j = std::min(best_j + span, refined.size() - 1);
    for (std::size_t j = lo_j; j <= hi_j; ++j) {
      if (j == best_j) continue;
      const BestResponse candidate =
          oracle_best_response(q, refined[j], s, sigma_grid);
      const double profit =
          candidate.no_trade ? 0.0
                             : ctx.maker_utility(candidate.sigma, refined[j]);
      if (profit > best_profit) {
        best_profit = profit;
        best_k = refined[j];
        response = candidate;
      }
    }
  }

  scan.k = best_k;
  scan.sigma = response.sigma;
  scan.buyer_utility = response.utility;
  scan.profit =
      response.no_trade ? 0.0 : ctx.maker_utility(response.sigma, best_k);
  scan.break_even = std::max(max_profit, scan.profit) <= kBreakEvenProfit;
  scan.k_resolution = (window.hi - window.lo) /
                      static_cast<double>(k_grid.points - 1);
  const double sigma_step =
      std::pow(sigma_grid.hi / sigma_grid.lo,
               1.0 / static_cast<double>(sigma_grid.points - 1));
  scan.sigma_resolution = 2.0 * scan.sigma * (sigma_step - 1.0) /
                          static_cast<double>(sigma_grid.points - 1);
  return scan;
}

OracleReport make_oracle_report(double oracle_value, double closed_form_value,
                                double resolution_bound, ToleranceSpec tol) {
  OracleReport report;
  report.oracle_value = oracle_value;
  report.closed_form_value = closed_form_value;
  report.grid_resolution_bound = resolution_bound;
  report.abs_gap = std::fabs(oracle_value - closed_form_value);
  report.rel_gap = closed_form_value == 0.0
                       ? (oracle_value == 0.0 ? 0.0 : HUGE_VAL)
                       : report.abs_gap / std::fabs(closed_form_value);
  report.within_tolerance =
      report.abs_gap <=
      std::max(tol.atol, tol.rtol * std::fabs(closed_form_value)) +
          resolution_bound;
  return report;
}

}  // namespace dpmarket::oracle
