#include <doctest.h>

#include <cmath>
#include <random>

#include "dpmarket/pricing.hpp"
#include "test_support.hpp"

using namespace dpmarket;
using dpmtest::uniform_in;

namespace {

// random (query, scenario) pair with constant intensity
struct Instance {
  LinearQuery query;
  MarketScenario scenario;
};

Instance random_instance(std::mt19937_64& rng, double p) {
  Instance inst;
  const std::size_t n = 1 + rng() % 6;
  inst.query.coeffs = dpmtest::random_vector(rng, n);
  if (std::fabs(inst.query.coeffs[0]) < 0.1) inst.query.coeffs[0] = 0.7;
  inst.query.intensity_kind = IntensityKind::Constant;
  inst.query.intensity_value = uniform_in(rng, 0.5, 10.0);
  inst.scenario.privacy_weights = dpmtest::random_vector(rng, n, 0.1, 2.0);
  inst.scenario.change_bound = uniform_in(rng, 0.2, 2.0);
  inst.scenario.sigma_min = dpmtest::log_uniform_in(rng, 0.01, 1.0);
  inst.scenario.exponent = p;
  return inst;
}

}  // namespace

TEST_CASE("pricing spec invariants") {
  PricingSpec spec{2.0, 0.75};
  CHECK_NOTHROW(spec.validate());
  spec.level = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.level = 1.0;
  spec.exponent = 0.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.exponent = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  CHECK_NOTHROW(spec.validate(/*allow_out_of_range_p=*/true));
}

TEST_CASE("original price k f^2 / sigma") {
  PricedQuery pq;
  pq.query.coeffs = {3.0, 4.0};  // f = 5
  pq.sigma = 10.0;
  CHECK(original_price(pq, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(original_price({pq.query, 20.0}, 2.0) ==
        doctest::Approx(2.5).epsilon(1e-15));

  PricedQuery zero;
  zero.query.coeffs = {0.0, 0.0};
  zero.sigma = 3.0;
  CHECK(original_price(zero, 7.0) == 0.0);

  CHECK_THROWS_AS(original_price({pq.query, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(original_price(pq, 0.0), std::invalid_argument);
}

TEST_CASE("balanced price takes the max of the two branches") {
  // Gamma = sqrt(2), f = 1
  MarketScenario s = dpmtest::unit_scenario();
  PricedQuery pq{dpmtest::unit_query(10.0), 1.0};

  CHECK(balanced_price(pq, 1.0, s) ==
        doctest::Approx(1.4142135623730951).epsilon(1e-14));
  CHECK(balanced_price(pq, 10.0, s) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("balanced price at p = 1 is exactly max(original, compensation)") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance inst = random_instance(rng, 1.0);
    const double sigma = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const double k = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const PricedQuery pq{inst.query, sigma};
    const double expected =
        std::max(original_price(pq, k),
                 total_compensation(inst.query, sigma, inst.scenario));
    CHECK(balanced_price(pq, k, inst.scenario) == expected);
  }
}

TEST_CASE("price transform: p = 1 passes through bitwise") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = dpmtest::log_uniform_in(rng, 1e-6, 1e6);
    CHECK(price_transform(x, 1.0) == x);
  }
  CHECK(price_transform(4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("power transform is sub-additive for p in (1/2, 1]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const double p = uniform_in(rng, 0.5 + 1e-9, 1.0);
    const double x = dpmtest::log_uniform_in(rng, 1e-4, 1e4);
    const double y = dpmtest::log_uniform_in(rng, 1e-4, 1e4);
    CHECK(price_transform(x + y, p) <=
          (price_transform(x, p) + price_transform(y, p)) * (1.0 + 1e-12));
  }
}

TEST_CASE("buyer valuation A / sqrt(sigma)") {
  PricedQuery pq{dpmtest::unit_query(10.0), 4.0};
  CHECK(buyer_valuation(pq) == doctest::Approx(5.0).epsilon(1e-15));
  pq.sigma = 16.0;
  CHECK(buyer_valuation(pq) == doctest::Approx(2.5).epsilon(1e-15));
  pq.query.intensity_value = 0.0;
  CHECK(buyer_valuation(pq) == 0.0);
  pq.sigma = -1.0;
  CHECK_THROWS_AS(buyer_valuation(pq), std::invalid_argument);
}

TEST_CASE("buyer utility: hand case and exact cancellation at A = Gamma") {
  MarketScenario s = dpmtest::unit_scenario();
  PricedQuery pq{dpmtest::unit_query(10.0), 1.0};
  CHECK(buyer_utility(pq, 1.0, s) ==
        doctest::Approx(8.585786437626904).epsilon(1e-14));  // 10 - sqrt(2)

  // A set to the computed Gamma: compensation branch cancels the valuation
  const double gamma = gamma_threshold(pq.query, s);
  PricedQuery tied{dpmtest::unit_query(gamma), 8.0};  // sigma >= sigma_th(k=1)
  CHECK(buyer_utility(tied, 1.0, s) == 0.0);
}

TEST_CASE("buyer utility matches the piecewise form at p = 1") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance inst = random_instance(rng, 1.0);
    const double k = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const double sigma = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const double a = inst.query.intensity_value;
    const double f = semi_norm(inst.query);
    const double gamma = gamma_threshold(inst.query, inst.scenario);
    const double sigma_th =
        (k / gamma) * (k / gamma) * f * f * f * f;  // branch split point
    const double piecewise =
        sigma <= sigma_th ? a / std::sqrt(sigma) - k * f * f / sigma
                          : (a - gamma) / std::sqrt(sigma);
    CHECK(buyer_utility({inst.query, sigma}, k, inst.scenario) ==
          doctest::Approx(piecewise).epsilon(1e-12));
  }
}

TEST_CASE("maker utility: hand case, clamp, and accounting identity") {
  MarketScenario s = dpmtest::unit_scenario();
  PricedQuery pq{dpmtest::unit_query(10.0), 1.0};
  CHECK(maker_utility(pq, 5.0, s) ==
        doctest::Approx(3.585786437626905).epsilon(1e-14));  // 5 - sqrt(2)

  // compensation branch active -> clamped to zero
  CHECK(maker_utility(pq, 0.1, s) == 0.0);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance inst = random_instance(rng, uniform_in(rng, 0.55, 1.0));
    const double k = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const double sigma = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    const PricedQuery probe{inst.query, sigma};
    const double psi = maker_utility(probe, k, inst.scenario);
    CHECK(psi >= 0.0);
    if (psi > 0.0) {
      // maker utility + compensation = balanced price
      CHECK(psi + total_compensation(inst.query, sigma, inst.scenario) ==
            doctest::Approx(balanced_price(probe, k, inst.scenario))
                .epsilon(1e-12));
    }
    // max definition
    CHECK(balanced_price(probe, k, inst.scenario) + 1e-12 >=
          total_compensation(inst.query, sigma, inst.scenario));
    CHECK(balanced_price(probe, k, inst.scenario) * (1.0 + 1e-12) + 1e-300 >=
          price_transform(original_price(probe, k), inst.scenario.exponent));
  }
}

TEST_CASE("pricing context and grid pricer agree with the scalar ops") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = random_instance(rng, uniform_in(rng, 0.55, 1.0));
    const QueryPricingContext ctx(inst.query, inst.scenario);
    std::vector<double> sigmas;
    for (int i = 0; i < 16; ++i) {
      sigmas.push_back(dpmtest::log_uniform_in(rng, 0.01, 100.0));
    }
    const SigmaGridPricer pricer(ctx, sigmas);
    std::vector<double> utilities(sigmas.size());
    const double k = dpmtest::log_uniform_in(rng, 0.01, 100.0);
    pricer.buyer_utilities(k, utilities);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const PricedQuery pq{inst.query, sigmas[i]};
      CHECK(ctx.balanced_price(sigmas[i], k) ==
            doctest::Approx(balanced_price(pq, k, inst.scenario))
                .epsilon(1e-12));
      CHECK(ctx.buyer_utility(sigmas[i], k) ==
            doctest::Approx(buyer_utility(pq, k, inst.scenario))
                .epsilon(1e-12));
      CHECK(ctx.maker_utility(sigmas[i], k) ==
            doctest::Approx(maker_utility(pq, k, inst.scenario))
                .epsilon(1e-12));
      CHECK(utilities[i] ==
            doctest::Approx(ctx.buyer_utility(sigmas[i], k)).epsilon(1e-12));
      CHECK(pricer.buyer_utility(i, k) == utilities[i]);
      CHECK(pricer.maker_utility(i, k) ==
            doctest::Approx(ctx.maker_utility(sigmas[i], k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear answerability") {
  LinearQuery q;
  q.coeffs = {1.0, -2.0};

  // bundle {(q, 2), (q, 2)}, alpha = (1/2, 1/2) answers (q, 1) tightly
  const std::vector<PricedQuery> bundle = {{q, 2.0}, {q, 2.0}};
  AnswerabilityWitness half{{0.5, 0.5}};
  CHECK(is_linearly_answerable({q, 1.0}, bundle, half, 1e-9));

  // identity decomposition
  const std::vector<PricedQuery> single = {{q, 3.0}};
  CHECK(is_linearly_answerable({q, 3.0}, single, {{1.0}}, 0.0));

  // variance condition violated
  CHECK_FALSE(is_linearly_answerable({q, 0.9}, bundle, half, 1e-9));

  // coefficient mismatch
  LinearQuery other;
  other.coeffs = {1.0, -1.0};
  CHECK_FALSE(is_linearly_answerable({other, 1.0}, bundle, half, 1e-9));

  CHECK_THROWS_AS(
      is_linearly_answerable({q, 1.0}, {}, half, 1e-9),
      std::invalid_argument);
  AnswerabilityWitness zeros{{0.0, 0.0}};
  CHECK_THROWS_AS(zeros.validate(), std::invalid_argument);
}

TEST_CASE("constructed answerable instances certify themselves") {
  MarketScenario s = dpmtest::unit_scenario();
  s.sigma_min = 0.05;
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t m = 1 + rng() % 5;
    const std::uint64_t seed = rng();
    const AnswerableInstance inst = make_answerable_instance(seed, n, m, s);
    CHECK(is_linearly_answerable(inst.target, inst.bundle, inst.witness, 1e-9));

    // tightness: shrinking the target variance breaks the certificate
    PricedQuery tighter = inst.target;
    tighter.sigma *= 0.9;
    CHECK_FALSE(
        is_linearly_answerable(tighter, inst.bundle, inst.witness, 1e-9));

    // determinism
    const AnswerableInstance again = make_answerable_instance(seed, n, m, s);
    CHECK(again.target.sigma == inst.target.sigma);
    CHECK(again.target.query.coeffs == inst.target.query.coeffs);
    CHECK(again.witness.alphas == inst.witness.alphas);
  }
}

TEST_CASE("balanced pricing is arbitrage-free on constructed instances") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t m = 1 + rng() % 5;
    MarketScenario s;
    s.privacy_weights = dpmtest::random_vector(rng, n, 0.1, 2.0);
    s.change_bound = uniform_in(rng, 0.2, 2.0);
    s.sigma_min = dpmtest::log_uniform_in(rng, 0.01, 1.0);
    s.exponent = trial % 2 == 0 ? 1.0 : uniform_in(rng, 0.5 + 1e-6, 1.0);
    const double k = dpmtest::log_uniform_in(rng, 0.1, 10.0);
    const AnswerableInstance inst = make_answerable_instance(rng(), n, m, s);
    const ArbitrageReport report = check_arbitrage(
        inst.target, inst.bundle, inst.witness, k, s, kArbitrageTol);
    CHECK_FALSE(report.violated);
    CHECK(report.slack >= -kArbitrageTol * (1.0 + report.bundle_price_sum));
  }
}

TEST_CASE("check_arbitrage rejects non-answerable inputs") {
  MarketScenario s = dpmtest::unit_scenario();
  s.privacy_weights = {1.0, 1.0};
  LinearQuery q;
  q.coeffs = {1.0, 1.0};
  const std::vector<PricedQuery> bundle = {{q, 1.0}};
  PricedQuery bogus{q, 0.1};  // variance too small for alpha = 1
  CHECK_THROWS_AS(
      check_arbitrage(bogus, bundle, {{1.0}}, 1.0, s, kArbitrageTol),
      std::invalid_argument);
}
