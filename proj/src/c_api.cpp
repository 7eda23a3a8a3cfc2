#include "dpmarket/dpmarket.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "dpmarket/equilibrium.hpp"
#include "dpmarket/market_model.hpp"
#include "dpmarket/scenario.hpp"
#include "dpmarket/sweep.hpp"
#include "dpmarket/verify.hpp"

struct dpm_scenario {
  dpmarket::ScenarioDocument doc;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* message) { g_last_error = message; }

dpm_status fail(dpm_status code, const char* message) {
  set_error(message);
  return code;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
dpm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const dpmarket::ScenarioParseError& e) {
    return fail(DPM_PARSE_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DPM_DOMAIN_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(DPM_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(DPM_INTERNAL_ERROR, "unknown error");
  }
}

int to_c_regime(dpmarket::Regime r) {
  switch (r) {
    case dpmarket::Regime::Profitable:
      return DPM_REGIME_PROFITABLE;
    case dpmarket::Regime::BreakEven:
      return DPM_REGIME_BREAK_EVEN;
    case dpmarket::Regime::NoTrade:
      return DPM_REGIME_NO_TRADE;
  }
  return DPM_REGIME_NO_TRADE;
}

char* copy_buffer(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* dpm_version(void) { return "0.1.0"; }

const char* dpm_error_message(void) { return g_last_error.c_str(); }

const char* dpm_regime_name(int regime) {
  switch (regime) {
    case DPM_REGIME_PROFITABLE:
      return "Profitable";
    case DPM_REGIME_BREAK_EVEN:
      return "BreakEven";
    case DPM_REGIME_NO_TRADE:
      return "NoTrade";
    default:
      return "unknown";
  }
}

dpm_status dpm_scenario_load(const char* path, unsigned flags,
                             dpm_scenario** out) {
  if (!path || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    auto doc = dpmarket::load_scenario(
        path, (flags & DPM_PARSE_ALLOW_OUT_OF_RANGE_P) != 0);
    *out = new dpm_scenario{std::move(doc)};
    return DPM_OK;
  });
}

dpm_status dpm_scenario_parse(const char* text, unsigned flags,
                              dpm_scenario** out) {
  if (!text || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    auto doc = dpmarket::parse_scenario(
        text, (flags & DPM_PARSE_ALLOW_OUT_OF_RANGE_P) != 0);
    *out = new dpm_scenario{std::move(doc)};
    return DPM_OK;
  });
}

void dpm_scenario_free(dpm_scenario* scenario) { delete scenario; }

dpm_status dpm_scenario_dimension(const dpm_scenario* scenario, size_t* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  *out = scenario->doc.query.coeffs.size();
  return DPM_OK;
}

dpm_status dpm_scenario_exponent(const dpm_scenario* scenario, double* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  *out = scenario->doc.scenario.exponent;
  return DPM_OK;
}

dpm_status dpm_scenario_sweep_request(const dpm_scenario* scenario,
                                      dpm_sweep_request* out, int* present) {
  if (!scenario || !out || !present) {
    return fail(DPM_NULL_ARGUMENT, "null argument");
  }
  *present = scenario->doc.sweep.has_value() ? 1 : 0;
  if (!scenario->doc.sweep) return DPM_OK;
  const dpmarket::SweepRequest& sweep = *scenario->doc.sweep;
  switch (sweep.variable) {
    case dpmarket::SweepVariable::K:
      out->variable = DPM_SWEEP_K;
      break;
    case dpmarket::SweepVariable::Q:
      out->variable = DPM_SWEEP_Q;
      break;
    case dpmarket::SweepVariable::P:
      out->variable = DPM_SWEEP_P;
      break;
    case dpmarket::SweepVariable::Gamma:
      out->variable = DPM_SWEEP_GAMMA;
      break;
  }
  out->lo = sweep.grid.lo;
  out->hi = sweep.grid.hi;
  out->points = static_cast<int>(sweep.grid.points);
  out->scale = sweep.grid.scale == dpmarket::oracle::GridScale::Linear
                   ? DPM_SCALE_LINEAR
                   : DPM_SCALE_LOG;
  return DPM_OK;
}

dpm_status dpm_classify(const dpm_scenario* scenario,
                        dpm_classification* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& doc = scenario->doc;
    out->intensity = dpmarket::value_intensity(doc.query);
    out->gamma_threshold = dpmarket::gamma_threshold(doc.query, doc.scenario);
    out->two_p_gamma = 2.0 * doc.scenario.exponent * out->gamma_threshold;
    out->regime = to_c_regime(dpmarket::classify_regime(doc.query, doc.scenario));
    return DPM_OK;
  });
}

dpm_status dpm_stackelberg_equilibrium(const dpm_scenario* scenario,
                                       dpm_equilibrium_result* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const dpmarket::EquilibriumResult eq = dpmarket::stackelberg_equilibrium(
        scenario->doc.query, scenario->doc.scenario);
    *out = {};
    out->regime = to_c_regime(eq.regime);
    out->k_indifferent = eq.k_star ? 0 : 1;
    out->k_star = eq.k_star.value_or(0.0);
    out->no_trade = eq.sigma_star ? 0 : 1;
    out->sigma_star = eq.sigma_star.value_or(0.0);
    out->maker_profit = eq.maker_profit;
    out->buyer_utility = eq.buyer_utility;
    out->has_k_lower = eq.k_lower ? 1 : 0;
    out->k_lower = eq.k_lower.value_or(0.0);
    out->has_k_upper = eq.k_upper ? 1 : 0;
    out->k_upper = eq.k_upper.value_or(0.0);
    return DPM_OK;
  });
}

dpm_status dpm_buyer_best_response(const dpm_scenario* scenario, double k,
                                   int* no_trade, double* sigma) {
  if (!scenario || !no_trade || !sigma) {
    return fail(DPM_NULL_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto response = dpmarket::buyer_best_response(
        scenario->doc.query, k, scenario->doc.scenario);
    *no_trade = response ? 0 : 1;
    *sigma = response.value_or(0.0);
    return DPM_OK;
  });
}

dpm_status dpm_maker_profit_curve(const dpm_scenario* scenario, double k,
                                  double* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dpmarket::maker_profit_curve(scenario->doc.query, k,
                                        scenario->doc.scenario);
    return DPM_OK;
  });
}

dpm_status dpm_balanced_price(const dpm_scenario* scenario, double sigma,
                              double k, double* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dpmarket::balanced_price({scenario->doc.query, sigma}, k,
                                    scenario->doc.scenario);
    return DPM_OK;
  });
}

dpm_status dpm_buyer_utility(const dpm_scenario* scenario, double sigma,
                             double k, double* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dpmarket::buyer_utility({scenario->doc.query, sigma}, k,
                                   scenario->doc.scenario);
    return DPM_OK;
  });
}

dpm_status dpm_maker_utility(const dpm_scenario* scenario, double sigma,
                             double k, double* out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dpmarket::maker_utility({scenario->doc.query, sigma}, k,
                                   scenario->doc.scenario);
    return DPM_OK;
  });
}

dpm_status dpm_laplace_answer(const dpm_scenario* scenario,
                              const double* items, size_t count, double sigma,
                              uint64_t seed, double* out) {
  if (!scenario || !items || !out) {
    return fail(DPM_NULL_ARGUMENT, "null argument");
  }
  return guarded([&] {
    dpmarket::Database db;
    db.items.assign(items, items + count);
    db.validate();
    *out = dpmarket::laplace_answer(scenario->doc.query, db, sigma, seed);
    return DPM_OK;
  });
}

dpm_status dpm_sweep_csv(const dpm_scenario* scenario,
                         const dpm_sweep_request* request, char** csv_out) {
  if (!scenario || !request || !csv_out) {
    return fail(DPM_NULL_ARGUMENT, "null argument");
  }
  return guarded([&] {
    dpmarket::SweepRequest sweep;
    switch (request->variable) {
      case DPM_SWEEP_K:
        sweep.variable = dpmarket::SweepVariable::K;
        break;
      case DPM_SWEEP_Q:
        sweep.variable = dpmarket::SweepVariable::Q;
        break;
      case DPM_SWEEP_P:
        sweep.variable = dpmarket::SweepVariable::P;
        break;
      case DPM_SWEEP_GAMMA:
        sweep.variable = dpmarket::SweepVariable::Gamma;
        break;
      default:
        throw std::invalid_argument("sweep: unknown variable");
    }
    if (request->points < 2) {
      throw std::invalid_argument("sweep: points must be >= 2");
    }
    sweep.grid.lo = request->lo;
    sweep.grid.hi = request->hi;
    sweep.grid.points = static_cast<std::size_t>(request->points);
    sweep.grid.scale = request->scale == DPM_SCALE_LINEAR
                           ? dpmarket::oracle::GridScale::Linear
                           : dpmarket::oracle::GridScale::Logarithmic;
    const auto rows = dpmarket::run_sweep(scenario->doc.query,
                                          scenario->doc.scenario, sweep);
    *csv_out = copy_buffer(dpmarket::sweep_to_csv(rows));
    return DPM_OK;
  });
}

void dpm_buffer_free(char* buffer) { delete[] buffer; }

dpm_status dpm_verify(const dpm_scenario* scenario, int instances,
                      uint64_t seed, dpm_verify_summary* out,
                      char** report_out) {
  if (!scenario || !out) return fail(DPM_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    dpmarket::verify::VerifyOptions options;
    options.instances = instances;
    options.seed = seed;
    const dpmarket::verify::VerifySummary summary =
        dpmarket::verify::run_verification(scenario->doc.scenario, options);
    *out = {};
    out->oracle_total = summary.oracle_total;
    out->oracle_passed = summary.oracle_passed;
    out->profitable_total = summary.profitable_total;
    out->profitable_passed = summary.profitable_passed;
    out->breakeven_total = summary.breakeven_total;
    out->breakeven_passed = summary.breakeven_passed;
    out->notrade_total = summary.notrade_total;
    out->notrade_passed = summary.notrade_passed;
    out->arbitrage_total = summary.arbitrage_total;
    out->arbitrage_passed = summary.arbitrage_passed;
    out->has_failing_seed = summary.first_failing_seed ? 1 : 0;
    out->first_failing_seed = summary.first_failing_seed.value_or(0);
    if (report_out) *report_out = copy_buffer(summary.detail);
    return summary.all_passed() ? DPM_OK : DPM_VERIFICATION_FAILED;
  });
}

}  // extern "C"
