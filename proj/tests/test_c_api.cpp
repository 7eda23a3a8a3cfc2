// Exercises the shared-library surface exactly as an external consumer
// would: through dpmarket.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "dpmarket/dpmarket.h"

namespace {

constexpr const char* kProfitable =
    "coeffs = [1]\n"
    "privacy_weights = [1.0]\n"
    "gamma = 1.0\n"
    "sigma_min = 1.0\n"
    "p = 1.0\n"
    "intensity_kind = constant\n"
    "intensity_value = 10.0\n";

constexpr const char* kBreakEven =
    "coeffs = [1]\n"
    "privacy_weights = [1.0]\n"
    "gamma = 1.0\n"
    "sigma_min = 1.0\n"
    "p = 1.0\n"
    "intensity_kind = constant\n"
    "intensity_value = 2.5\n";

constexpr const char* kNoTrade =
    "coeffs = [1]\n"
    "privacy_weights = [1.0]\n"
    "gamma = 1.0\n"
    "sigma_min = 1.0\n"
    "p = 1.0\n"
    "intensity_kind = constant\n"
    "intensity_value = 1.0\n";

struct Handle {
  dpm_scenario* ptr = nullptr;
  ~Handle() { dpm_scenario_free(ptr); }
};

}  // namespace

TEST_CASE("parse, classify and solve through the C surface") {
  Handle h;
  REQUIRE(dpm_scenario_parse(kProfitable, 0, &h.ptr) == DPM_OK);

  size_t dimension = 0;
  CHECK(dpm_scenario_dimension(h.ptr, &dimension) == DPM_OK);
  CHECK(dimension == 1);
  double p = 0.0;
  CHECK(dpm_scenario_exponent(h.ptr, &p) == DPM_OK);
  CHECK(p == 1.0);

  dpm_classification c{};
  REQUIRE(dpm_classify(h.ptr, &c) == DPM_OK);
  CHECK(c.regime == DPM_REGIME_PROFITABLE);
  CHECK(c.intensity == 10.0);
  CHECK(std::fabs(c.gamma_threshold - std::sqrt(2.0)) < 1e-14);
  CHECK(std::strcmp(dpm_regime_name(c.regime), "Profitable") == 0);

  dpm_equilibrium_result eq{};
  REQUIRE(dpm_stackelberg_equilibrium(h.ptr, &eq) == DPM_OK);
  CHECK(eq.regime == DPM_REGIME_PROFITABLE);
  CHECK(eq.k_indifferent == 0);
  CHECK(std::fabs(eq.k_star - 5.0) < 1e-13);
  CHECK(eq.no_trade == 0);
  CHECK(eq.sigma_star == 1.0);
  CHECK(std::fabs(eq.maker_profit - (5.0 - std::sqrt(2.0))) < 1e-13);
  CHECK(eq.has_k_lower == 1);
  CHECK(eq.has_k_upper == 1);
  CHECK(std::fabs(eq.k_lower - std::sqrt(2.0)) < 1e-13);

  int no_trade = -1;
  double sigma = 0.0;
  REQUIRE(dpm_buyer_best_response(h.ptr, 1.0, &no_trade, &sigma) == DPM_OK);
  CHECK(no_trade == 0);
  CHECK(sigma == 1.0);  // clamped at sigma_min

  double value = 0.0;
  REQUIRE(dpm_maker_profit_curve(h.ptr, 5.0, &value) == DPM_OK);
  CHECK(std::fabs(value - (5.0 - std::sqrt(2.0))) < 1e-13);
  REQUIRE(dpm_balanced_price(h.ptr, 1.0, 1.0, &value) == DPM_OK);
  CHECK(std::fabs(value - std::sqrt(2.0)) < 1e-13);
  REQUIRE(dpm_buyer_utility(h.ptr, 1.0, 1.0, &value) == DPM_OK);
  CHECK(std::fabs(value - (10.0 - std::sqrt(2.0))) < 1e-13);
  REQUIRE(dpm_maker_utility(h.ptr, 1.0, 5.0, &value) == DPM_OK);
  CHECK(std::fabs(value - (5.0 - std::sqrt(2.0))) < 1e-13);
}

TEST_CASE("markers for indifferent k and no-trade cross the boundary") {
  Handle be;
  REQUIRE(dpm_scenario_parse(kBreakEven, 0, &be.ptr) == DPM_OK);
  dpm_equilibrium_result eq{};
  REQUIRE(dpm_stackelberg_equilibrium(be.ptr, &eq) == DPM_OK);
  CHECK(eq.regime == DPM_REGIME_BREAK_EVEN);
  CHECK(eq.k_indifferent == 1);
  CHECK(eq.maker_profit == 0.0);
  CHECK(eq.has_k_lower == 0);

  Handle nt;
  REQUIRE(dpm_scenario_parse(kNoTrade, 0, &nt.ptr) == DPM_OK);
  REQUIRE(dpm_stackelberg_equilibrium(nt.ptr, &eq) == DPM_OK);
  CHECK(eq.regime == DPM_REGIME_NO_TRADE);
  CHECK(eq.no_trade == 1);

  int no_trade = 0;
  double sigma = 0.0;
  REQUIRE(dpm_buyer_best_response(nt.ptr, 2.0, &no_trade, &sigma) == DPM_OK);
  CHECK(no_trade == 1);
}

TEST_CASE("status codes and error messages") {
  dpm_scenario* raw = nullptr;
  CHECK(dpm_scenario_parse("coeffs = [1]\nwat = 1\n", 0, &raw) ==
        DPM_PARSE_ERROR);
  CHECK(std::string(dpm_error_message()).find("wat") != std::string::npos);

  const char* bad_p =
      "coeffs = [1]\nprivacy_weights = [1]\ngamma = 1\nsigma_min = 1\n"
      "p = 1.5\n";
  CHECK(dpm_scenario_parse(bad_p, 0, &raw) == DPM_DOMAIN_ERROR);
  CHECK(std::string(dpm_error_message()).find("(1/2, 1]") !=
        std::string::npos);

  Handle loose;
  CHECK(dpm_scenario_parse(bad_p, DPM_PARSE_ALLOW_OUT_OF_RANGE_P,
                           &loose.ptr) == DPM_OK);

  CHECK(dpm_scenario_parse(nullptr, 0, &raw) == DPM_NULL_ARGUMENT);
  CHECK(dpm_scenario_load("/nonexistent/x.scn", 0, &raw) == DPM_PARSE_ERROR);

  Handle h;
  REQUIRE(dpm_scenario_parse(kProfitable, 0, &h.ptr) == DPM_OK);
  double value = 0.0;
  CHECK(dpm_balanced_price(h.ptr, -1.0, 1.0, &value) == DPM_DOMAIN_ERROR);
  CHECK(dpm_maker_profit_curve(h.ptr, 0.0, &value) == DPM_DOMAIN_ERROR);
}

TEST_CASE("laplace answers are seed-deterministic through the C surface") {
  Handle h;
  REQUIRE(dpm_scenario_parse(kProfitable, 0, &h.ptr) == DPM_OK);
  const double items[] = {3.0};
  double first = 0.0;
  double second = 0.0;
  REQUIRE(dpm_laplace_answer(h.ptr, items, 1, 2.0, 42, &first) == DPM_OK);
  REQUIRE(dpm_laplace_answer(h.ptr, items, 1, 2.0, 42, &second) == DPM_OK);
  CHECK(first == second);
  REQUIRE(dpm_laplace_answer(h.ptr, items, 1, 2.0, 43, &second) == DPM_OK);
  CHECK(first != second);
  CHECK(dpm_laplace_answer(h.ptr, items, 1, -2.0, 42, &second) ==
        DPM_DOMAIN_ERROR);
}

TEST_CASE("sweep CSV arrives as a caller-owned buffer") {
  Handle h;
  REQUIRE(dpm_scenario_parse(kProfitable, 0, &h.ptr) == DPM_OK);
  dpm_sweep_request request{};
  request.variable = DPM_SWEEP_K;
  request.lo = 0.5;
  request.hi = 50.0;
  request.points = 32;
  request.scale = DPM_SCALE_LOG;
  char* csv = nullptr;
  REQUIRE(dpm_sweep_csv(h.ptr, &request, &csv) == DPM_OK);
  REQUIRE(csv != nullptr);
  const std::string text(csv);
  dpm_buffer_free(csv);
  CHECK(text.rfind("value,A,Gamma,regime,k_star,sigma_star,psi_star,phi_star",
                   0) == 0);
  // 32 rows plus header
  size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 33);

  request.points = 1;
  CHECK(dpm_sweep_csv(h.ptr, &request, &csv) == DPM_DOMAIN_ERROR);
}

TEST_CASE("sweep block round-trips through the handle") {
  const std::string text = std::string(kProfitable) +
                           "sweep_var = p\nsweep_lo = 0.6\nsweep_hi = 1.0\n"
                           "sweep_points = 11\nsweep_scale = linear\n";
  Handle h;
  REQUIRE(dpm_scenario_parse(text.c_str(), 0, &h.ptr) == DPM_OK);
  dpm_sweep_request request{};
  int present = 0;
  REQUIRE(dpm_scenario_sweep_request(h.ptr, &request, &present) == DPM_OK);
  CHECK(present == 1);
  CHECK(request.variable == DPM_SWEEP_P);
  CHECK(request.lo == 0.6);
  CHECK(request.points == 11);
  CHECK(request.scale == DPM_SCALE_LINEAR);
}

TEST_CASE("verification batch through the C surface") {
  Handle h;
  REQUIRE(dpm_scenario_parse(kProfitable, 0, &h.ptr) == DPM_OK);
  dpm_verify_summary summary{};
  char* report = nullptr;
  REQUIRE(dpm_verify(h.ptr, 2, 3, &summary, &report) == DPM_OK);
  REQUIRE(report != nullptr);
  const std::string text(report);
  dpm_buffer_free(report);
  CHECK(summary.oracle_total == 2);
  CHECK(summary.oracle_passed == 2);
  CHECK(summary.arbitrage_passed == summary.arbitrage_total);
  CHECK(summary.has_failing_seed == 0);
  CHECK(text.find("oracle comparisons") != std::string::npos);

  CHECK(dpm_verify(h.ptr, 0, 3, &summary, nullptr) == DPM_DOMAIN_ERROR);
}

TEST_CASE("version string is present") {
  CHECK(std::string(dpm_version()) == "0.1.0");
}
