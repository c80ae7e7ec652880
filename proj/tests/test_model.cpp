#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "captrap/model.hpp"
#include "captrap/params_io.hpp"
#include "oracles.hpp"

using namespace captrap;

namespace {
ModelParams reference() { return make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.25); }
}  // namespace

TEST_CASE("growth rate from micro inputs") {
  CHECK(growth_rate(0.1, 4.0, 0.4) == doctest::Approx(1.44).epsilon(1e-15));
  CHECK(growth_rate(0.5, 2.0, 0.5) == doctest::Approx(0.5));
  CHECK(growth_rate(0.9, 1.0, 0.1) == doctest::Approx(0.01));
  CHECK_THROWS_AS(growth_rate(1.0, 2.0, 0.5), validation_error);
  CHECK_THROWS_AS(growth_rate(0.5, -1.0, 0.5), validation_error);
  CHECK_THROWS_AS(growth_rate(0.5, 2.0, 1.5), validation_error);
}

TEST_CASE("x** arithmetic") {
  CHECK(x_double_star(reference()) ==
        doctest::Approx((0.5 - 1.44) / 1.19).epsilon(1e-14));
  ModelParams p = make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.0);
  CHECK(x_double_star(p) == doctest::Approx(-1.0).epsilon(1e-14));
  ModelParams q = make_params(2.0, 1.0, 0.8, 1.0, 2.0, 1.0);
  CHECK(x_double_star(q) == doctest::Approx(0.0));
}

TEST_CASE("parameter validation names the offending key") {
  CHECK_THROWS_WITH_AS(make_params(-1.0, 1.0, 0.8, 1.0, 2.0, 0.25),
                       "r: must be > 0", validation_error);
  CHECK_THROWS_WITH_AS(make_params(1.44, 0.0, 0.8, 1.0, 2.0, 0.25),
                       "lambda: must be > 0", validation_error);
  CHECK_THROWS_WITH_AS(make_params(1.44, 1.0, 0.8, 1.0, 0.9, 0.25),
                       "barrier: must exceed x_star", validation_error);
  CHECK_THROWS_AS(make_params(1.44, 1.0, 0.8, 1.0, 2.0, 1.44),
                  validation_error);
}

TEST_CASE("flows: identities and reference arithmetic") {
  const ModelParams p = reference();
  CHECK(flow_above(p, 0.0, 3.0) == doctest::Approx(3.0));
  ModelParams unit = make_params(1.0, 1.0, 0.8, 1.0, 2.0, 0.25);
  CHECK(flow_above(unit, std::log(2.0), 2.0) == doctest::Approx(3.0));
  CHECK(flow_above(p, 0.5, 2.0) ==
        doctest::Approx(1.0 + std::exp(0.72)).epsilon(1e-14));
  CHECK(flow_mid(p, 0.0, 1.5) == doctest::Approx(1.5));
  const double tb = time_to_barrier(p, 1.5);
  CHECK(flow_mid(p, tb, 1.5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(flow_below(p, 0.0, 0.5) == doctest::Approx(0.5));
  const double tc = time_to_critical(p, 0.5);
  CHECK(tc == doctest::Approx(4.0 * std::log(1.5)).epsilon(1e-13));
  CHECK(flow_below(p, tc, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hitting times: edges") {
  const ModelParams p = reference();
  CHECK(time_to_barrier(p, 2.0) == doctest::Approx(0.0));
  const double xss = x_double_star(p);
  CHECK(time_to_barrier(p, 1.5) ==
        doctest::Approx(std::log((2.0 + xss) / (1.5 + xss)) / 1.19)
            .epsilon(1e-14));
  CHECK(time_to_critical(p, 1.0) == doctest::Approx(0.0));
  // limit x -> 0+ stays finite
  CHECK(time_to_critical(p, 1e-12) ==
        doctest::Approx(-4.0 * std::log(1.0 / 2.0)).epsilon(1e-9));
  // c_t > r: the mid flow still reaches the barrier in positive time
  ModelParams q = make_params(1.44, 1.0, 0.8, 1.0, 2.0, 10.0);
  const double tb = time_to_barrier(q, 1.5);
  CHECK(tb > 0.0);
  CHECK(flow_mid(q, tb, 1.5) == doctest::Approx(2.0).epsilon(1e-12));
  // c_t = 0: below the poverty line nothing moves
  ModelParams z = make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.0);
  CHECK(below_is_absorbing(z));
  CHECK(flow_below(z, 5.0, 0.5) == 0.5);
  CHECK(time_to_critical(z, 0.5) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("flow composition semigroup property") {
  const ModelParams p = reference();
  oracles::TestRng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double t1 = rng.uniform(0.0, 0.7), t2 = rng.uniform(0.0, 0.7);
    const double xa = rng.uniform(2.0, 8.0);
    CHECK(flow_above(p, t1 + t2, xa) ==
          doctest::Approx(flow_above(p, t2, flow_above(p, t1, xa)))
              .epsilon(1e-12));
    const double xm = rng.uniform(1.0, 2.0);
    const double tb = time_to_barrier(p, xm);
    const double s1 = std::min(t1, 0.49 * tb), s2 = std::min(t2, 0.49 * tb);
    CHECK(flow_mid(p, s1 + s2, xm) ==
          doctest::Approx(flow_mid(p, s2, flow_mid(p, s1, xm)))
              .epsilon(1e-12));
    const double xb = rng.uniform(0.05, 0.99);
    CHECK(flow_below(p, t1 + t2, xb) ==
          doctest::Approx(flow_below(p, t2, flow_below(p, t1, xb)))
              .epsilon(1e-12));
  }
}

TEST_CASE("equilibrium direction and positive mid drift") {
  const ModelParams p = reference();
  oracles::TestRng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(1.0, 2.0);
    const double drift = p.r * (x - p.x_star) + p.c_t * (p.barrier - x);
    CHECK(drift > 0.0);
    CHECK(flow_mid(p, 1e-3, x) > x);
  }
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.01, 0.99);
    CHECK(flow_below(p, 1e-3, x) > x);  // climbs toward B
    CHECK(flow_below(p, 50.0, x) < p.barrier);
    const double xa = rng.uniform(1.0001, 10.0);
    CHECK(flow_above(p, 1e-3, xa) > xa);  // grows above x*
  }
}

TEST_CASE("loss sampling") {
  const LossDistribution d1 = LossDistribution::beta_alpha_one(1.0);
  CHECK(sample_loss(d1, 0.3) == doctest::Approx(0.3));
  const LossDistribution d = LossDistribution::beta_alpha_one(0.8);
  CHECK(sample_loss(d, 0.5) ==
        doctest::Approx(std::pow(0.5, 1.25)).epsilon(1e-15));
  // empirical CDF at z = 0.7 vs 0.7^alpha within 3 binomial sigma
  oracles::TestRng rng(2);
  const int n = 1000000;
  int below = 0;
  for (int i = 0; i < n; ++i)
    if (sample_loss(d, rng.uniform()) <= 0.7) ++below;
  const double want = std::pow(0.7, 0.8);
  const double sigma = std::sqrt(want * (1.0 - want) / n);
  CHECK(std::fabs(static_cast<double>(below) / n - want) < 3.0 * sigma);
}

TEST_CASE("parameter file parsing") {
  nlohmann::json j = {{"r", 1.44},   {"lambda", 1.0}, {"alpha", 0.8},
                      {"x_star", 1.0}, {"barrier", 2.0}, {"c_t", 0.25}};
  const ModelParams p = captrap::io::params_from_json(j);
  CHECK(p.r == 1.44);
  CHECK(p.barrier == 2.0);

  nlohmann::json micro = {{"a", 0.1},      {"b", 4.0},       {"c_s", 0.4},
                          {"lambda", 1.0}, {"alpha", 0.8},   {"x_star", 1.0},
                          {"barrier", 2.0}, {"c_t", 0.25}};
  const ModelParams q = captrap::io::params_from_json(micro);
  CHECK(q.r == doctest::Approx(1.44).epsilon(1e-15));
  CHECK(q.a.has_value());

  nlohmann::json missing = j;
  missing.erase("alpha");
  CHECK_THROWS_WITH_AS(captrap::io::params_from_json(missing),
                       "alpha: missing", validation_error);
  nlohmann::json both = micro;
  both["r"] = 1.44;
  CHECK_THROWS_AS(captrap::io::params_from_json(both), validation_error);
}

TEST_CASE("grid parsing") {
  const auto g = captrap::io::parse_grid("1:2:0.25");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(2.0));
  CHECK_THROWS_AS(captrap::io::parse_grid("1:2"), validation_error);
  CHECK_THROWS_AS(captrap::io::parse_grid("2:1:0.5"), validation_error);
}
