#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "captrap/closed_form.hpp"
#include "captrap/monte_carlo.hpp"
#include "oracles.hpp"

using namespace captrap;
namespace mc = captrap::mc;
namespace cf = captrap::closed_form;

namespace {
ModelParams reference() { return make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.25); }
}  // namespace

TEST_CASE("psi increments: constant rate") {
  CHECK(mc::psi_increment_constant(0.5, 0.0, 0.02) == 0.0);
  CHECK(mc::psi_increment_constant(0.5, 1.5, 0.02) ==
        doctest::Approx(-0.03).epsilon(1e-15));
  // equals the quadrature of the hazard along the reverting flow
  const ModelParams p = reference();
  const OmegaRate wc = OmegaRate::constant(0.02);
  const double dt = 0.8;
  const double quad = oracles::simpson_fixed(
      [&](double t) { return wc(flow_below(p, t, 0.5)); }, 0.0, dt);
  CHECK(mc::psi_increment_constant(0.5, dt, 0.02) ==
        doctest::Approx(-quad).epsilon(1e-12));
}

TEST_CASE("psi increments: exponential rate vs quadrature") {
  const ModelParams p = reference();
  const double beta = 0.05;
  for (double x0 : {0.2, 0.5, 0.9}) {
    for (double frac : {0.3, 1.0}) {
      const double dt = frac * time_to_critical(p, x0);
      const double got = mc::psi_increment_exponential(p, x0, dt, beta);
      const double quad = oracles::simpson_fixed(
          [&](double t) { return beta / flow_below(p, t, x0); }, 0.0, dt);
      CHECK(std::fabs(got + quad) < 1e-9);
    }
  }
  // endpoint form: the flow finishes exactly at the poverty line
  const double x0 = 0.5;
  const double tau = time_to_critical(p, x0);
  const double want = -beta / (p.c_t * p.barrier) *
                      (p.c_t * tau + std::log(p.x_star) - std::log(x0));
  CHECK(mc::psi_increment_exponential(p, x0, tau, beta) ==
        doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("psi increments: numeric path agrees with the closed ones") {
  const ModelParams p = reference();
  const OmegaRate wc = OmegaRate::constant(0.02);
  const OmegaRate we = OmegaRate::exponential(0.05);
  const OmegaRate zero = OmegaRate::constant(0.0);
  oracles::TestRng rng(88);
  for (int i = 0; i < 1000; ++i) {
    const double x0 = rng.uniform(0.05, 0.99);
    const double dt = std::min(rng.uniform(0.0, 2.0), time_to_critical(p, x0));
    CHECK(std::fabs(mc::psi_increment_numeric(p, x0, dt, wc) -
                    mc::psi_increment_constant(x0, dt, 0.02)) < 1e-10);
    CHECK(std::fabs(mc::psi_increment_numeric(p, x0, dt, we) -
                    mc::psi_increment_exponential(p, x0, dt, 0.05)) < 1e-9);
    CHECK(mc::psi_increment_numeric(p, x0, dt, zero) == 0.0);
  }
}

TEST_CASE("simulate_path: eventless and absorbing behaviors") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  // lambda -> 0: no events inside the horizon, the flow is deterministic
  ModelParams quiet = make_params(1.44, 1e-12, 0.8, 1.0, 2.0, 0.25);
  mc::PathRng rng(1, 0);
  const auto rec = mc::simulate_path(quiet, loss, 1.5, 1.0, rng);
  CHECK(rec.events.empty());
  const double tb = time_to_barrier(quiet, 1.5);
  const double want = flow_above(quiet, 1.0 - tb, quiet.barrier);
  CHECK(rec.final_capital == doctest::Approx(want).epsilon(1e-12));

  // c_t = 0 below the poverty line: the capital never recovers
  ModelParams absorbing = make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.0);
  for (int k = 0; k < 50; ++k) {
    mc::PathRng r2(11, k);
    const auto path = mc::simulate_path(absorbing, loss, 0.5, 50.0, r2);
    CHECK(path.final_capital <= 0.5);
  }
}

TEST_CASE("simulate_path: record invariants") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  const OmegaRate wc = OmegaRate::constant(0.02);
  for (int k = 0; k < 200; ++k) {
    mc::PathRng rng(5, k);
    const auto rec = mc::simulate_path(p, loss, 1.5, 30.0, rng, &wc);
    double prev = 0.0;
    for (const auto& ev : rec.events) {
      CHECK(ev.time > prev);
      prev = ev.time;
      CHECK(ev.multiplier > 0.0);
      CHECK(ev.multiplier <= 1.0);
      CHECK(ev.pre_loss_capital > 0.0);
    }
    CHECK(rec.psi_exponent <= 0.0);
    CHECK(rec.final_capital > 0.0);
  }
}

TEST_CASE("event count follows the Poisson intensity") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  const int paths = 10000;
  double events = 0.0;
  for (int k = 0; k < paths; ++k) {
    mc::PathRng rng(21, k);
    events += static_cast<double>(
        mc::simulate_path(p, loss, 5.0, 10.0, rng).events.size());
  }
  const double mean = events / paths;
  const double sigma = std::sqrt(10.0 / paths);  // Var(Poisson(10))/n
  CHECK(std::fabs(mean - 10.0) < 3.0 * sigma);
}

TEST_CASE("estimators: determinism and worker invariance") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  mc::EstimateOptions opt;
  opt.n = 4000;
  opt.seed = 99;
  opt.horizon = 100.0;
  opt.check_horizon = false;
  opt.workers = 1;
  const auto e1 = mc::estimate_trapping(p, loss, 1.5, opt);
  opt.workers = 4;
  const auto e4 = mc::estimate_trapping(p, loss, 1.5, opt);
  opt.workers = 7;
  const auto e7 = mc::estimate_trapping(p, loss, 1.5, opt);
  CHECK(e1.value == e4.value);
  CHECK(e1.std_dev == e4.std_dev);
  CHECK(e1.ci_low == e4.ci_low);
  CHECK(e1.ci_high == e4.ci_high);
  CHECK(e1.value == e7.value);

  const OmegaRate wc = OmegaRate::constant(0.02);
  opt.workers = 1;
  const auto f1 = mc::estimate_ep(p, loss, wc, 1.5, opt);
  opt.workers = 5;
  const auto f5 = mc::estimate_ep(p, loss, wc, 1.5, opt);
  CHECK(f1.value == f5.value);
  CHECK(f1.std_dev == f5.std_dev);
}

TEST_CASE("estimator contracts: range, CI formula, zero hazard") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  mc::EstimateOptions opt;
  opt.n = 2000;
  opt.seed = 3;
  opt.horizon = 50.0;
  opt.check_horizon = false;
  const OmegaRate zero = OmegaRate::constant(0.0);
  const auto e0 = mc::estimate_ep(p, loss, zero, 1.5, opt);
  CHECK(e0.value == 0.0);
  CHECK(e0.std_dev == 0.0);
  CHECK(e0.ci_low == 0.0);
  CHECK(e0.ci_high == 0.0);

  const auto et = mc::estimate_trapping(p, loss, 1.2, opt);
  CHECK(et.value >= 0.0);
  CHECK(et.value <= 1.0);
  const double half = 2.81 * et.std_dev / std::sqrt(2000.0);
  CHECK(et.ci_low == doctest::Approx(std::max(et.value - half, 0.0)));
  CHECK(et.ci_high == doctest::Approx(std::min(et.value + half, 1.0)));
  CHECK_THROWS_AS(
      [&] {
        mc::EstimateOptions bad = opt;
        bad.n = 50;
        return mc::estimate_trapping(p, loss, 1.2, bad);
      }(),
      validation_error);
}

TEST_CASE("trapping estimate brackets the closed form") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  mc::EstimateOptions opt;
  opt.n = 40000;
  opt.seed = 17;
  opt.horizon = 400.0;
  opt.check_horizon = true;
  const auto e = mc::estimate_trapping(p, loss, 1.5, opt);
  const double want = cf::trapping_probability(p, 1.5);
  CHECK(e.ci_low <= want);
  CHECK(want <= e.ci_high);
  CHECK(e.horizon_checked);
  CHECK(e.horizon_ok);
  // far above the line the estimate tracks the (slowly decaying) tail
  mc::EstimateOptions far_opt = opt;
  far_opt.check_horizon = false;
  const auto far = mc::estimate_trapping(p, loss, 50.0, far_opt);
  const double want_far = cf::trapping_probability(p, 50.0);
  CHECK(far.ci_low - 0.01 <= want_far);
  CHECK(want_far <= far.ci_high + 0.01);
  const auto very_far = mc::estimate_trapping(p, loss, 1e8, far_opt);
  CHECK(very_far.value < cf::trapping_probability(p, 1e8) + 0.01);
}

TEST_CASE("extreme-poverty estimate brackets the closed form") {
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  mc::EstimateOptions opt;
  opt.n = 20000;
  opt.seed = 23;
  opt.horizon = 800.0;
  opt.check_horizon = false;
  const auto e = mc::estimate_ep(p, loss, OmegaRate::constant(0.02), 3.0, opt);
  const double want = cf::ep_probability_constant(p, 0.02, 0.0, 3.0);
  CHECK(e.ci_low - 0.001 <= want);
  CHECK(want <= e.ci_high + 0.001);
}

TEST_CASE("trapping is certain without the net profit condition") {
  ModelParams p = make_params(1.44, 1.0, 0.6, 1.0, 2.0, 0.25);
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  mc::EstimateOptions opt;
  opt.n = 2000;
  opt.seed = 9;
  opt.horizon = 800.0;
  opt.check_horizon = false;
  const auto e = mc::estimate_trapping(p, loss, 2.0, opt);
  CHECK(e.value >= 0.99);
}

TEST_CASE("coupled paths: more transfers never raise the hazard exposure") {
  const ModelParams lo = reference();
  const ModelParams hi = make_params(1.44, 1.0, 0.8, 1.0, 2.0, 0.75);
  const LossDistribution loss = LossDistribution::beta_alpha_one(0.8);
  const OmegaRate wc = OmegaRate::constant(0.02);
  for (int k = 0; k < 1000; ++k) {
    mc::PathRng r1(1234, k);
    mc::PathRng r2(1234, k);
    const auto a = mc::simulate_path(lo, loss, 1.5, 100.0, r1, &wc);
    const auto b = mc::simulate_path(hi, loss, 1.5, 100.0, r2, &wc);
    // identical event draws: the higher transfer rate accumulates no more
    // hazard and is trapped no earlier
    CHECK(b.psi_exponent >= a.psi_exponent - 1e-12);
    if (b.trapped_at && !a.trapped_at) CHECK(false);
  }
}

TEST_CASE("a loss landing exactly on the poverty line is not trapping") {
  const ModelParams p = reference();
  // every loss halves the capital: from 2 x* the first event lands exactly
  // on x*, which stays in the transfer regime and flows back up
  const LossDistribution halver =
      LossDistribution::custom([](double) { return 0.5; });
  mc::PathRng rng(71, 0);
  const auto rec =
      mc::simulate_path(p, halver, 2.0 * p.x_star, 0.75, rng, nullptr,
                        /*kill_at_trapping=*/true);
  if (!rec.events.empty()) {
    CHECK(rec.events.front().pre_loss_capital * 0.5 >= p.x_star);
    if (rec.events.front().pre_loss_capital * 0.5 == p.x_star)
      CHECK(!rec.trapped_at.has_value());
  }
}

TEST_CASE("custom loss distributions run through the simulator") {
  const ModelParams p = reference();
  const LossDistribution table = LossDistribution::custom(
      [](double u) { return 0.2 + 0.8 * u; });  // uniform on [0.2, 1]
  mc::EstimateOptions opt;
  opt.n = 2000;
  opt.seed = 31;
  opt.horizon = 100.0;
  opt.check_horizon = false;
  const auto e = mc::estimate_trapping(p, table, 1.5, opt);
  CHECK(e.value > 0.0);
  CHECK(e.value < 1.0);
  const auto f =
      mc::estimate_ep(p, table, OmegaRate::constant(0.05), 1.5, opt);
  CHECK(f.value > 0.0);
  CHECK(f.value < 1.0);
}

TEST_CASE("transform estimate: discounted trapping indicator") {
  // E[e^{-delta tau}; tau < inf] estimated from killed paths brackets the
  // closed-form transform
  const ModelParams p = reference();
  const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
  const double delta = 0.05;
  const int n = 40000;
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    mc::PathRng rng(1337, k);
    const auto rec = mc::simulate_path(p, loss, 1.5, 400.0, rng, nullptr,
                                       /*kill_at_trapping=*/true);
    const double v =
        rec.trapped_at ? std::exp(-delta * *rec.trapped_at) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  const double half = 2.81 * sd / std::sqrt(static_cast<double>(n));
  const double want = cf::laplace_trapping(p, delta, 1.5);
  CHECK(want > mean - half);
  CHECK(want < mean + half);
}
