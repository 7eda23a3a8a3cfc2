#include "dpmarket/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

namespace dpmarket::verify {

namespace {

double uniform_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

double log_uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo * std::exp(uniform_in(rng, 0.0, std::log(hi / lo)));
}

// Runs fn(i) for i in [0, count) on a few worker threads; results must be
// written by index so the outcome is order-independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

RandomInstance make_random_instance(std::uint64_t seed,
                                    const InstanceOptions& options) {
  std::mt19937_64 rng(seed);
  RandomInstance inst;

  const std::size_t n =
      1 + static_cast<std::size_t>(rng() % std::max<std::size_t>(
                                               1, options.max_dimension));
  inst.query.coeffs.resize(n);
  for (double& c : inst.query.coeffs) c = uniform_in(rng, -2.0, 2.0);
  // keep the query away from the all-zero degenerate case
  if (std::fabs(inst.query.coeffs[0]) < 0.1) inst.query.coeffs[0] = 0.5;

  if (rng() % 2 == 0) {
    inst.query.norm_kind = NormKind::WeightedL2;
    inst.query.norm_weights.resize(n);
    for (double& w : inst.query.norm_weights) w = uniform_in(rng, 0.5, 2.0);
  }

  // rescale so f(q) lands in [0.5, 2]; keeps the optimum inside the
  // default oracle grids
  {
    LinearQuery probe = inst.query;
    const double f = semi_norm(probe);
    const double target = uniform_in(rng, 0.5, 2.0);
    for (double& c : inst.query.coeffs) c *= target / f;
  }

  const double p = options.exponent ? *options.exponent
                                    : uniform_in(rng, 0.55, 1.0);
  inst.scenario.exponent = p;
  inst.scenario.sigma_min = log_uniform_in(rng, 0.01, 4.0);
  inst.scenario.privacy_weights.resize(n);
  for (double& c : inst.scenario.privacy_weights) c = uniform_in(rng, 0.2, 2.0);
  inst.scenario.change_bound = 1.0;

  const Regime regime = options.regime
                            ? *options.regime
                            : static_cast<Regime>(seed % 3);

  const double intensity = log_uniform_in(rng, 1.0, 10.0);
  inst.query.intensity_kind = IntensityKind::Constant;
  inst.query.intensity_value = intensity;

  // place Gamma relative to A by scaling gamma; margins keep every
  // instance strictly inside its regime
  double ratio;  // A / Gamma
  switch (regime) {
    case Regime::Profitable:
      ratio = uniform_in(rng, 2.0 * p + 0.1, 2.0 * p + 4.0);
      break;
    case Regime::BreakEven:
      ratio = 1.0 + uniform_in(rng, 0.1, 0.9) * (2.0 * p - 1.0);
      break;
    case Regime::NoTrade:
    default:
      ratio = uniform_in(rng, 0.1, 0.95);
      break;
  }
  const double gamma_now = gamma_threshold(inst.query, inst.scenario);
  inst.scenario.change_bound = (intensity / ratio) / gamma_now;

  inst.query.validate();
  inst.scenario.validate();
  return inst;
}

namespace {

oracle::OracleReport trivial_report() {
  oracle::OracleReport report;
  report.within_tolerance = true;
  return report;
}

}  // namespace

ComparisonReport compare(const LinearQuery& q, const MarketScenario& s,
                         const oracle::GridSpec& k_grid,
                         const oracle::GridSpec& sigma_grid,
                         oracle::ToleranceSpec tol) {
  const EquilibriumResult closed = stackelberg_equilibrium(q, s);
  const oracle::EquilibriumScan scan =
      oracle::oracle_equilibrium(q, s, k_grid, sigma_grid);

  ComparisonReport report;
  report.closed_form_regime = closed.regime;
  report.k = trivial_report();
  report.sigma = trivial_report();
  report.profit = trivial_report();

  switch (closed.regime) {
    case Regime::NoTrade:
      report.regime_consistent = scan.no_trade;
      report.all_within = report.regime_consistent;
      return report;
    case Regime::BreakEven:
      report.regime_consistent = !scan.no_trade && scan.break_even;
      report.profit = oracle::make_oracle_report(
          scan.profit, 0.0, oracle::kBreakEvenProfit, tol);
      report.all_within =
          report.regime_consistent && report.profit.within_tolerance;
      return report;
    case Regime::Profitable:
      break;
  }

  report.regime_consistent = !scan.no_trade && !scan.break_even;
  if (!closed.k_star) {
    // zero-cost query: the price vanishes and the maker is indifferent
    report.profit = oracle::make_oracle_report(scan.profit, 0.0, tol.atol, tol);
    report.all_within =
        report.regime_consistent && report.profit.within_tolerance;
    return report;
  }

  report.k = oracle::make_oracle_report(scan.k, *closed.k_star,
                                        scan.k_resolution, tol);
  report.sigma = oracle::make_oracle_report(scan.sigma, *closed.sigma_star,
                                            scan.sigma_resolution, tol);

  // Profit bound: local grid spacing times finite-difference slopes of the
  // pricing objective around the scan winner.
  const QueryPricingContext ctx(q, s);
  double bound = tol.atol;
  if (scan.k_resolution > 0.0) {
    const double lo_k = std::max(scan.k - scan.k_resolution, scan.k * 0.5);
    const double dk = std::fabs(ctx.maker_utility(scan.sigma, scan.k + scan.k_resolution) -
                                ctx.maker_utility(scan.sigma, lo_k));
    bound += 2.0 * dk;
  }
  if (scan.sigma_resolution > 0.0) {
    const double lo_s =
        std::max(scan.sigma - scan.sigma_resolution, scan.sigma * 0.5);
    const double ds =
        std::fabs(ctx.maker_utility(scan.sigma + scan.sigma_resolution, scan.k) -
                  ctx.maker_utility(lo_s, scan.k));
    bound += 2.0 * ds;
  }
  report.profit =
      oracle::make_oracle_report(scan.profit, closed.maker_profit, bound, tol);

  report.all_within = report.regime_consistent &&
                      report.k.within_tolerance &&
                      report.sigma.within_tolerance &&
                      report.profit.within_tolerance;
  return report;
}

ComparisonReport compare_default(const LinearQuery& q, const MarketScenario& s,
                                 oracle::ToleranceSpec tol) {
  return compare(q, s, oracle::default_k_grid(), oracle::default_sigma_grid(s),
                 tol);
}

std::optional<ViolationCase> find_arbitrage_violation(const MarketScenario& s,
                                                      double k,
                                                      std::uint64_t seed,
                                                      std::size_t max_trials) {
  const std::size_t n = s.privacy_weights.size();
  // coarse alpha grid; violations for p > 1 cluster around balanced splits
  static constexpr double kAlphaGrid[] = {-1.5, -1.25, -1.0, -0.75, -0.5,
                                          -0.25, 0.25, 0.5,  0.75,  1.0,
                                          1.25,  1.5};

  std::size_t trials = 0;
  for (std::uint64_t bundle_index = 0; trials < max_trials; ++bundle_index) {
    const std::uint64_t bundle_seed = seed + bundle_index;
    std::mt19937_64 rng(bundle_seed);

    AnswerableInstance inst;
    inst.bundle.resize(2);
    for (PricedQuery& pq : inst.bundle) {
      pq.query.coeffs.resize(n);
      for (double& c : pq.query.coeffs) c = uniform_in(rng, -2.0, 2.0);
      pq.sigma = s.sigma_min * std::exp(uniform_in(rng, 0.0, std::log(4.0)));
    }
    if (bundle_index % 2 == 1) {
      // near-parallel bundles concentrate the combined query, where the
      // power transform's superadditivity (p > 1) bites hardest
      for (std::size_t i = 0; i < n; ++i) {
        inst.bundle[1].query.coeffs[i] =
            inst.bundle[0].query.coeffs[i] * (1.0 + 0.01 * uniform_unit(rng));
      }
    }

    for (double a0 : kAlphaGrid) {
      for (double a1 : kAlphaGrid) {
        if (trials >= max_trials) return std::nullopt;
        ++trials;
        inst.witness.alphas = {a0, a1};
        inst.target.query.coeffs.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          inst.target.query.coeffs[i] =
              a0 * inst.bundle[0].query.coeffs[i] +
              a1 * inst.bundle[1].query.coeffs[i];
        }
        inst.target.sigma = a0 * a0 * inst.bundle[0].sigma +
                            a1 * a1 * inst.bundle[1].sigma;
        const ArbitrageReport report = check_arbitrage(
            inst.target, inst.bundle, inst.witness, k, s, kArbitrageTol);
        if (report.violated) {
          return ViolationCase{std::move(inst), report, bundle_seed};
        }
      }
    }
  }
  return std::nullopt;
}

VerifySummary run_verification(const MarketScenario& base,
                               const VerifyOptions& options) {
  if (options.instances < 1) {
    throw std::invalid_argument("verify: instance count must be >= 1");
  }
  VerifySummary summary;
  std::ostringstream detail;

  const bool p_in_range = base.exponent > 0.5 && base.exponent <= 1.0;

  // --- oracle comparisons -------------------------------------------------
  if (p_in_range) {
    const std::size_t count = static_cast<std::size_t>(options.instances);
    struct Outcome {
      Regime regime;
      bool passed;
    };
    std::vector<Outcome> outcomes(count);
    parallel_for(count, [&](std::size_t i) {
      const std::uint64_t seed = options.seed + i;
      InstanceOptions io;
      io.exponent = base.exponent;
      const RandomInstance inst = make_random_instance(seed, io);
      oracle::GridSpec kg = oracle::default_k_grid();
      oracle::GridSpec sg = oracle::default_sigma_grid(inst.scenario);
      kg.points = options.grid_points;
      sg.points = options.grid_points;
      const ComparisonReport report =
          compare(inst.query, inst.scenario, kg, sg, options.tolerance);
      outcomes[i] = {report.closed_form_regime, report.all_within};
    });
    for (std::size_t i = 0; i < count; ++i) {
      ++summary.oracle_total;
      int* total = nullptr;
      int* passed = nullptr;
      switch (outcomes[i].regime) {
        case Regime::Profitable:
          total = &summary.profitable_total;
          passed = &summary.profitable_passed;
          break;
        case Regime::BreakEven:
          total = &summary.breakeven_total;
          passed = &summary.breakeven_passed;
          break;
        case Regime::NoTrade:
          total = &summary.notrade_total;
          passed = &summary.notrade_passed;
          break;
      }
      ++*total;
      if (outcomes[i].passed) {
        ++summary.oracle_passed;
        ++*passed;
      } else if (!summary.first_failing_seed) {
        summary.first_failing_seed = options.seed + i;
      }
    }
    detail << "oracle comparisons: " << summary.oracle_passed << "/"
           << summary.oracle_total << " passed (Profitable "
           << summary.profitable_passed << "/" << summary.profitable_total
           << ", BreakEven " << summary.breakeven_passed << "/"
           << summary.breakeven_total << ", NoTrade "
           << summary.notrade_passed << "/" << summary.notrade_total << ")\n";
  } else {
    detail << "oracle comparisons: skipped (p outside (1/2, 1])\n";
  }

  // --- arbitrage checks ---------------------------------------------------
  if (p_in_range) {
    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int i = 0; i < options.instances; ++i) {
      const std::uint64_t inst_seed = rng();
      std::mt19937_64 inst_rng(inst_seed);
      const std::size_t n = 1 + inst_rng() % 8;
      const std::size_t m = 1 + inst_rng() % 5;
      MarketScenario scen;
      scen.exponent = base.exponent;
      scen.change_bound = uniform_in(inst_rng, 0.5, 2.0);
      scen.sigma_min = log_uniform_in(inst_rng, 0.01, 1.0);
      scen.privacy_weights.resize(n);
      for (double& c : scen.privacy_weights) c = uniform_in(inst_rng, 0.2, 2.0);
      const double k = log_uniform_in(inst_rng, 0.1, 10.0);

      const AnswerableInstance inst =
          make_answerable_instance(inst_seed, n, m, scen);
      const ArbitrageReport report = check_arbitrage(
          inst.target, inst.bundle, inst.witness, k, scen, kArbitrageTol);
      ++summary.arbitrage_total;
      if (!report.violated) {
        ++summary.arbitrage_passed;
      } else if (!summary.first_failing_seed) {
        summary.first_failing_seed = inst_seed;
      }
    }
    detail << "arbitrage checks: " << summary.arbitrage_passed << "/"
           << summary.arbitrage_total << " passed\n";
  } else {
    // out-of-range exponent: hunt for the violation that must exist
    MarketScenario hunt = base;
    summary.violation =
        find_arbitrage_violation(hunt, 1.0, options.seed, 100000);
    ++summary.arbitrage_total;
    if (summary.violation) {
      summary.first_failing_seed = summary.violation->seed;
      detail << "arbitrage checks: violation found (p = " << base.exponent
             << " is outside (1/2, 1])\n";
      detail << "  target price " << summary.violation->report.target_price
             << " > bundle sum " << summary.violation->report.bundle_price_sum
             << "\n  witness alphas:";
      for (double a : summary.violation->instance.witness.alphas) {
        detail << " " << a;
      }
      detail << "\n  replay seed: " << summary.violation->seed << "\n";
    } else {
      ++summary.arbitrage_passed;
      detail << "arbitrage checks: no violation found in 100000 trials\n";
    }
  }

  summary.detail = detail.str();
  return summary;
}

}  // namespace dpmarket::verify
