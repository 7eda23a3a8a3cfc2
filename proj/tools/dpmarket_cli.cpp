// dpmarket command-line front end. Talks to the engine exclusively through
// the C API in dpmarket/dpmarket.h.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dpmarket/dpmarket.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

int exit_code_for(dpm_status status) {
  switch (status) {
    case DPM_OK:
      return kExitOk;
    case DPM_VERIFICATION_FAILED:
      return kExitVerifyFailed;
    case DPM_PARSE_ERROR:
      return kExitUsage;
    default:
      return kExitDomain;
  }
}

std::string fmt(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

struct ScenarioHandle {
  dpm_scenario* ptr = nullptr;
  ~ScenarioHandle() { dpm_scenario_free(ptr); }
};

int load_scenario(const std::string& path, bool allow_invalid_p,
                  ScenarioHandle& handle) {
  const unsigned flags = allow_invalid_p ? DPM_PARSE_ALLOW_OUT_OF_RANGE_P : 0u;
  const dpm_status status = dpm_scenario_load(path.c_str(), flags, &handle.ptr);
  if (status != DPM_OK) {
    std::cerr << "error: " << dpm_error_message() << "\n";
    return exit_code_for(status);
  }
  return kExitOk;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("DP_MARKET_SEED")) {
    std::uint64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(env, env + std::string(env).size(), value);
    if (ec == std::errc() && *ptr == '\0') return value;
    std::cerr << "warning: ignoring malformed DP_MARKET_SEED '" << env
              << "'\n";
  }
  return 1;
}

int run_classify(const std::string& path, bool allow_invalid_p) {
  ScenarioHandle scenario;
  if (int rc = load_scenario(path, allow_invalid_p, scenario)) return rc;
  dpm_classification c{};
  const dpm_status status = dpm_classify(scenario.ptr, &c);
  if (status != DPM_OK) {
    std::cerr << "error: " << dpm_error_message() << "\n";
    return exit_code_for(status);
  }
  std::cout << "regime: " << dpm_regime_name(c.regime) << "\n"
            << "A: " << fmt(c.intensity) << "\n"
            << "Gamma: " << fmt(c.gamma_threshold) << "\n"
            << "2pGamma: " << fmt(c.two_p_gamma) << "\n";
  return kExitOk;
}

void print_equilibrium_human(const dpm_equilibrium_result& eq) {
  std::cout << "regime: " << dpm_regime_name(eq.regime) << "\n";
  std::cout << "k_star: "
            << (eq.k_indifferent ? std::string("indifferent") : fmt(eq.k_star))
            << "\n";
  std::cout << "sigma_star: "
            << (eq.no_trade ? std::string("no-trade") : fmt(eq.sigma_star))
            << "\n";
  std::cout << "maker_profit: " << fmt(eq.maker_profit) << "\n";
  std::cout << "buyer_utility: " << fmt(eq.buyer_utility) << "\n";
  std::cout << "k_lower: " << (eq.has_k_lower ? fmt(eq.k_lower) : "-") << "\n";
  std::cout << "k_upper: " << (eq.has_k_upper ? fmt(eq.k_upper) : "-") << "\n";
}

void print_equilibrium_json(const dpm_equilibrium_result& eq) {
  std::cout << "{\n";
  std::cout << "  \"regime\": \"" << dpm_regime_name(eq.regime) << "\",\n";
  std::cout << "  \"k_star\": "
            << (eq.k_indifferent ? std::string("\"indifferent\"")
                                 : fmt(eq.k_star))
            << ",\n";
  std::cout << "  \"sigma_star\": "
            << (eq.no_trade ? std::string("\"no-trade\"") : fmt(eq.sigma_star))
            << ",\n";
  std::cout << "  \"maker_profit\": " << fmt(eq.maker_profit) << ",\n";
  std::cout << "  \"buyer_utility\": " << fmt(eq.buyer_utility) << ",\n";
  std::cout << "  \"k_lower\": "
            << (eq.has_k_lower ? fmt(eq.k_lower) : "null") << ",\n";
  std::cout << "  \"k_upper\": "
            << (eq.has_k_upper ? fmt(eq.k_upper) : "null") << "\n";
  std::cout << "}\n";
}

void print_equilibrium_csv(const dpm_equilibrium_result& eq) {
  std::cout
      << "regime,k_star,sigma_star,maker_profit,buyer_utility,k_lower,k_upper\n";
  std::cout << dpm_regime_name(eq.regime) << ","
            << (eq.k_indifferent ? std::string("indifferent") : fmt(eq.k_star))
            << ","
            << (eq.no_trade ? std::string("no-trade") : fmt(eq.sigma_star))
            << "," << fmt(eq.maker_profit) << "," << fmt(eq.buyer_utility)
            << "," << (eq.has_k_lower ? fmt(eq.k_lower) : "") << ","
            << (eq.has_k_upper ? fmt(eq.k_upper) : "") << "\n";
}

int run_equilibrium(const std::string& path, bool allow_invalid_p, bool json,
                    bool csv) {
  ScenarioHandle scenario;
  if (int rc = load_scenario(path, allow_invalid_p, scenario)) return rc;
  dpm_equilibrium_result eq{};
  const dpm_status status = dpm_stackelberg_equilibrium(scenario.ptr, &eq);
  if (status != DPM_OK) {
    std::cerr << "error: " << dpm_error_message() << "\n";
    return exit_code_for(status);
  }
  if (json) {
    print_equilibrium_json(eq);
  } else if (csv) {
    print_equilibrium_csv(eq);
  } else {
    print_equilibrium_human(eq);
  }
  return kExitOk;
}

int run_sweep(const std::string& path, bool allow_invalid_p,
              const std::optional<std::string>& var,
              const std::optional<double>& lo, const std::optional<double>& hi,
              const std::optional<int>& points,
              const std::optional<std::string>& scale,
              const std::optional<std::string>& out_path) {
  ScenarioHandle scenario;
  if (int rc = load_scenario(path, allow_invalid_p, scenario)) return rc;

  dpm_sweep_request request{};
  int present = 0;
  dpm_scenario_sweep_request(scenario.ptr, &request, &present);
  if (!present) {
    // defaults when the scenario file has no sweep block
    request.variable = DPM_SWEEP_K;
    request.lo = 0.0;
    request.hi = 0.0;
    request.points = 0;
    request.scale = DPM_SCALE_LOG;
  }

  if (var) {
    if (*var == "k") {
      request.variable = DPM_SWEEP_K;
    } else if (*var == "q") {
      request.variable = DPM_SWEEP_Q;
    } else if (*var == "p") {
      request.variable = DPM_SWEEP_P;
    } else if (*var == "gamma") {
      request.variable = DPM_SWEEP_GAMMA;
    } else {
      std::cerr << "error: --var expects k, q, p or gamma\n";
      return kExitUsage;
    }
  } else if (!present) {
    std::cerr << "error: no sweep block in scenario and no --var given\n";
    return kExitUsage;
  }
  if (lo) request.lo = *lo;
  if (hi) request.hi = *hi;
  if (points) request.points = *points;
  if (scale) {
    if (*scale == "linear") {
      request.scale = DPM_SCALE_LINEAR;
    } else if (*scale == "log") {
      request.scale = DPM_SCALE_LOG;
    } else {
      std::cerr << "error: --scale expects linear or log\n";
      return kExitUsage;
    }
  }
  if (!present && (!lo || !hi || !points)) {
    std::cerr << "error: sweep bounds incomplete; provide --lo, --hi and "
                 "--points (or a sweep block in the scenario)\n";
    return kExitUsage;
  }

  char* csv = nullptr;
  const dpm_status status = dpm_sweep_csv(scenario.ptr, &request, &csv);
  if (status != DPM_OK) {
    std::cerr << "error: " << dpm_error_message() << "\n";
    return exit_code_for(status);
  }
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open output file '" << *out_path << "'\n";
      dpm_buffer_free(csv);
      return kExitUsage;
    }
    out << csv;
  } else {
    std::cout << csv;
  }
  dpm_buffer_free(csv);
  return kExitOk;
}

int run_verify(const std::string& path, bool allow_invalid_p, int instances,
               const std::optional<std::uint64_t>& seed_flag) {
  if (instances < 1) {
    std::cerr << "error: --instances must be >= 1\n";
    return kExitUsage;
  }
  ScenarioHandle scenario;
  if (int rc = load_scenario(path, allow_invalid_p, scenario)) return rc;

  const std::uint64_t seed = resolve_seed(seed_flag);
  dpm_verify_summary summary{};
  char* report = nullptr;
  const dpm_status status =
      dpm_verify(scenario.ptr, instances, seed, &summary, &report);
  if (report) {
    std::cout << report;
    dpm_buffer_free(report);
  }
  if (status != DPM_OK && status != DPM_VERIFICATION_FAILED) {
    std::cerr << "error: " << dpm_error_message() << "\n";
    return exit_code_for(status);
  }
  if (status == DPM_VERIFICATION_FAILED) {
    if (summary.has_failing_seed) {
      std::cout << "first failing seed: " << summary.first_failing_seed
                << " (replay with --seed)\n";
    }
    std::cout << "verify: FAIL\n";
    return kExitVerifyFailed;
  }
  std::cout << "verify: PASS\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg equilibria for differentially-private data "
               "markets"};
  app.require_subcommand(1);

  bool allow_invalid_p = false;
  std::string scenario_path;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "scenario file")->required();
    cmd->add_flag("--test-mode-allow-invalid-p", allow_invalid_p,
                  "accept scenarios with p outside (1/2, 1] "
                  "(arbitrage counterexample tooling)");
  };

  auto* classify = app.add_subcommand(
      "classify", "print the trading regime and its thresholds");
  add_common(classify);

  auto* equilibrium = app.add_subcommand(
      "equilibrium", "solve the two-stage game in closed form");
  add_common(equilibrium);
  bool as_json = false;
  bool as_csv = false;
  auto* json_flag = equilibrium->add_flag("--json", as_json, "JSON output");
  equilibrium->add_flag("--csv", as_csv, "CSV output")->excludes(json_flag);

  auto* sweep = app.add_subcommand(
      "sweep", "tabulate equilibria along a parameter grid (CSV)");
  add_common(sweep);
  std::optional<std::string> var;
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<int> points;
  std::optional<std::string> scale;
  std::optional<std::string> out_path;
  sweep->add_option("--var", var, "swept variable: k, q, p or gamma");
  sweep->add_option("--lo", lo, "grid lower bound");
  sweep->add_option("--hi", hi, "grid upper bound");
  sweep->add_option("--points", points, "grid point count (>= 2)");
  sweep->add_option("--scale", scale, "grid scale: linear or log");
  sweep->add_option("--out", out_path, "output CSV path (default stdout)");

  auto* verify = app.add_subcommand(
      "verify", "randomized oracle comparisons and arbitrage checks");
  add_common(verify);
  int instances = 200;
  verify->add_option("--instances", instances, "number of random instances");
  std::optional<std::uint64_t> seed;
  verify->add_option("--seed", seed,
                     "base seed (falls back to DP_MARKET_SEED, then 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      return app.exit(e);
    }
    app.exit(e);
    return kExitUsage;
  }

  if (classify->parsed()) return run_classify(scenario_path, allow_invalid_p);
  if (equilibrium->parsed()) {
    return run_equilibrium(scenario_path, allow_invalid_p, as_json, as_csv);
  }
  if (sweep->parsed()) {
    return run_sweep(scenario_path, allow_invalid_p, var, lo, hi, points,
                     scale, out_path);
  }
  if (verify->parsed()) {
    return run_verify(scenario_path, allow_invalid_p, instances, seed);
  }
  return kExitUsage;
}
