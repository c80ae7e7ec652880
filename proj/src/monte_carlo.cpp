#include "captrap/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <type_traits>

namespace captrap::mc {
namespace {

// capital this far above the poverty line has no measurable chance of
// falling back; paths are cut here to bound the work per path
constexpr double kEscapeCap = 1e100;

constexpr double kCi99 = 2.81;  // two-sided 99% normal quantile as used

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// adaptive Simpson on [0, h]
double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol || (b - a) < 1e-14)
    return left + right + delta / 15.0;
  if (depth > 60)
    throw std::runtime_error("psi_increment_numeric: quadrature failed to converge");
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

struct PathOutcome {
  bool trapped = false;
  double psi = 0.0;
};

// Evolve x forward by dt across regime boundaries with closed-form flows.
// Returns false once the capital exceeds the escape cap.
inline bool evolve(const ModelParams& p, double& x, double dt, double xss) {
  double rem = dt;
  while (rem > 0.0) {
    if (x >= p.barrier) {
      x = (x - p.x_star) * std::exp(p.r * rem) + p.x_star;
      break;
    }
    if (x >= p.x_star) {
      const double tb =
          std::log((p.barrier + xss) / (x + xss)) / (p.r - p.c_t);
      if (rem < tb) {
        x = (x + xss) * std::exp((p.r - p.c_t) * rem) - xss;
        break;
      }
      x = p.barrier;
      rem -= tb;
      continue;
    }
    if (p.c_t == 0.0) break;  // absorbing below x*
    const double tc =
        -std::log((p.x_star - p.barrier) / (x - p.barrier)) / p.c_t;
    if (rem < tc) {
      x = (x - p.barrier) * std::exp(-p.c_t * rem) + p.barrier;
      break;
    }
    x = p.x_star;
    rem -= tc;
  }
  return x < kEscapeCap;
}

// core loop shared by the estimators and simulate_path
template <bool Kill, typename OmegaInc>
PathOutcome run_path(const ModelParams& p, const LossDistribution& d,
                     double x0, double horizon, PathRng& rng, double xss,
                     const OmegaInc& omega_inc, PathRecord* rec) {
  PathOutcome out;
  double x = x0;
  double t = 0.0;
  if constexpr (Kill) {
    if (x < p.x_star) {
      out.trapped = true;
      if (rec) rec->trapped_at = 0.0;
      if (rec) rec->final_capital = x;
      return out;
    }
  }
  while (t < horizon) {
    const double dt = rng.next_exponential(p.lambda);
    const double dt_eff = std::min(dt, horizon - t);
    if constexpr (!std::is_same_v<OmegaInc, std::nullptr_t>) {
      if (x < p.x_star) {
        const double tc = time_to_critical(p, x);
        out.psi += omega_inc(x, std::min(dt_eff, tc));
      }
    }
    const bool alive = evolve(p, x, dt_eff, xss);
    t += dt_eff;
    if (dt_eff < dt) break;  // horizon reached inside the interval
    if (!alive) break;
    const double z = d.sample(rng.next_unit());
    if (rec) rec->events.push_back({t, x, z});
    x *= z;
    if (x < p.x_star) {
      if (!out.trapped && rec && !rec->trapped_at) rec->trapped_at = t;
      if (!out.trapped) out.trapped = true;
      if constexpr (Kill) break;
    }
  }
  if (rec) rec->final_capital = x;
  return out;
}

struct Accumulators {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// run n paths with fixed-size blocks handed to workers; the per-block sums
// and the block reduction order do not depend on the worker count, so the
// estimate is bit-identical for any number of threads
template <typename PathValue>
Accumulators reduce_paths(std::int64_t n, int workers,
                          const PathValue& path_value) {
  constexpr std::int64_t kBlock = 1024;
  const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<Accumulators> block(nblocks);
  std::atomic<std::int64_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::int64_t bi = next.fetch_add(1);
      if (bi >= nblocks) return;
      Accumulators acc;
      const std::int64_t lo = bi * kBlock;
      const std::int64_t hi = std::min(n, lo + kBlock);
      for (std::int64_t k = lo; k < hi; ++k) {
        const double v = path_value(k);
        acc.sum += v;
        acc.sum_sq += v * v;
      }
      block[bi] = acc;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  Accumulators total;
  for (const auto& bacc : block) {
    total.sum += bacc.sum;
    total.sum_sq += bacc.sum_sq;
  }
  return total;
}

Estimate finish_estimate(const Accumulators& acc, std::int64_t n,
                         std::uint64_t seed, double horizon) {
  Estimate e;
  e.n = n;
  e.seed = seed;
  e.horizon = horizon;
  e.value = acc.sum / static_cast<double>(n);
  double var = (acc.sum_sq - static_cast<double>(n) * e.value * e.value) /
               static_cast<double>(n - 1);
  if (var < 0.0) var = 0.0;
  e.std_dev = std::sqrt(var);
  const double half = kCi99 * e.std_dev / std::sqrt(static_cast<double>(n));
  e.ci_low = std::max(e.value - half, 0.0);
  e.ci_high = std::min(e.value + half, 1.0);
  return e;
}

template <typename PathValue>
Estimate estimate_with_diagnostic(std::int64_t n, const EstimateOptions& opt,
                                  const PathValue& path_value_at) {
  Estimate e = finish_estimate(
      reduce_paths(n, opt.workers,
                   [&](std::int64_t k) { return path_value_at(k, opt.horizon); }),
      n, opt.seed, opt.horizon);
  if (opt.check_horizon) {
    const Estimate e2 = finish_estimate(
        reduce_paths(n, opt.workers,
                     [&](std::int64_t k) {
                       return path_value_at(k, 2.0 * opt.horizon);
                     }),
        n, opt.seed, opt.horizon * 2.0);
    e.horizon_checked = true;
    e.value_2x = e2.value;
    const double half = kCi99 * e.std_dev / std::sqrt(static_cast<double>(n));
    e.horizon_ok = std::fabs(e2.value - e.value) < half;
  }
  return e;
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_index)
    : state_(mix64(mix64(seed + 0x9E3779B97F4A7C15ull) +
                   0x9E3779B97F4A7C15ull * (path_index + 1))) {}

std::uint64_t PathRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ull;
  return mix64(state_);
}

double PathRng::next_unit() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double PathRng::next_exponential(double rate) {
  return -std::log(next_unit()) / rate;
}

double psi_increment_constant(double /*x_start*/, double dt_below,
                              double omega_c) {
  return -omega_c * dt_below;
}

double psi_increment_exponential(const ModelParams& p, double x_start,
                                 double dt_below, double beta) {
  if (dt_below == 0.0) return 0.0;
  if (below_is_absorbing(p)) return -beta / x_start * dt_below;
  const double end = flow_below(p, dt_below, x_start);
  return -beta / (p.c_t * p.barrier) *
         (p.c_t * dt_below + std::log(end) - std::log(x_start));
}

double psi_increment_numeric(const ModelParams& p, double x_start,
                             double dt_below, const OmegaRate& omega,
                             double abs_tol) {
  if (dt_below == 0.0) return 0.0;
  auto f = [&](double t) { return omega(flow_below(p, t, x_start)); };
  const double fa = f(0.0), fb = f(dt_below), fm = f(0.5 * dt_below);
  const double whole = simpson(fa, fm, fb, dt_below);
  return -adaptive_simpson(f, 0.0, dt_below, fa, fm, fb, whole, abs_tol, 0);
}

PathRecord simulate_path(const ModelParams& p, const LossDistribution& d,
                         double x0, double horizon, PathRng& rng,
                         const OmegaRate* omega, bool kill_at_trapping) {
  if (!(x0 > 0.0)) throw validation_error("x0: must be > 0");
  if (!(horizon > 0.0)) throw validation_error("horizon: must be > 0");
  p.validate();
  const double xss =
      std::fabs(p.r - p.c_t) > 1e-12 ? x_double_star(p) : 0.0;
  PathRecord rec;
  rec.horizon = horizon;
  auto inc = [&](double x, double dtb) {
    if (!omega) return 0.0;
    switch (omega->kind) {
      case OmegaRate::Kind::constant:
        return psi_increment_constant(x, dtb, omega->value);
      case OmegaRate::Kind::exponential:
        return psi_increment_exponential(p, x, dtb, omega->value);
      case OmegaRate::Kind::custom:
        return psi_increment_numeric(p, x, dtb, *omega);
    }
    return 0.0;
  };
  PathOutcome out;
  if (kill_at_trapping)
    out = run_path<true>(p, d, x0, horizon, rng, xss, inc, &rec);
  else
    out = run_path<false>(p, d, x0, horizon, rng, xss, inc, &rec);
  rec.psi_exponent = out.psi;
  return rec;
}

Estimate estimate_trapping(const ModelParams& p, const LossDistribution& d,
                           double x0, const EstimateOptions& opt) {
  if (opt.n < 100) throw validation_error("n: at least 100 paths required");
  if (!(x0 >= p.x_star))
    throw validation_error("x0: trapping estimation starts at x0 >= x_star");
  p.validate();
  const double xss =
      std::fabs(p.r - p.c_t) > 1e-12 ? x_double_star(p) : 0.0;
  auto value_at = [&](std::int64_t k, double horizon) {
    PathRng rng(opt.seed, static_cast<std::uint64_t>(k));
    const PathOutcome o =
        run_path<true>(p, d, x0, horizon, rng, xss, nullptr, nullptr);
    return o.trapped ? 1.0 : 0.0;
  };
  return estimate_with_diagnostic(opt.n, opt, value_at);
}

Estimate estimate_ep(const ModelParams& p, const LossDistribution& d,
                     const OmegaRate& omega, double x0,
                     const EstimateOptions& opt) {
  if (opt.n < 100) throw validation_error("n: at least 100 paths required");
  if (!(x0 > 0.0)) throw validation_error("x0: must be > 0");
  p.validate();
  const double xss =
      std::fabs(p.r - p.c_t) > 1e-12 ? x_double_star(p) : 0.0;

  auto run_with = [&](auto inc, std::int64_t k, double horizon) {
    PathRng rng(opt.seed, static_cast<std::uint64_t>(k));
    const PathOutcome o =
        run_path<false>(p, d, x0, horizon, rng, xss, inc, nullptr);
    return 1.0 - std::exp(o.psi);
  };
  auto value_at = [&](std::int64_t k, double horizon) {
    switch (omega.kind) {
      case OmegaRate::Kind::constant:
        return run_with(
            [&](double x, double dtb) {
              return psi_increment_constant(x, dtb, omega.value);
            },
            k, horizon);
      case OmegaRate::Kind::exponential:
        return run_with(
            [&](double x, double dtb) {
              return psi_increment_exponential(p, x, dtb, omega.value);
            },
            k, horizon);
      case OmegaRate::Kind::custom:
      default:
        return run_with(
            [&](double x, double dtb) {
              return psi_increment_numeric(p, x, dtb, omega);
            },
            k, horizon);
    }
  };
  return estimate_with_diagnostic(opt.n, opt, value_at);
}

}  // namespace captrap::mc
