#ifndef CAPTRAP_MONTE_CARLO_HPP
#define CAPTRAP_MONTE_CARLO_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "captrap/model.hpp"

namespace captrap::mc {

// Counter-based per-path stream: SplitMix64 seeded by mixing (seed, index).
// Cheap, reproducible, and independent of how paths are assigned to workers.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index);

  std::uint64_t next_u64();
  double next_unit();                       // uniform on (0,1)
  double next_exponential(double rate);

 private:
  std::uint64_t state_;
};

struct PathEvent {
  double time = 0.0;
  double pre_loss_capital = 0.0;
  double multiplier = 1.0;
};

struct PathRecord {
  std::vector<PathEvent> events;
  double psi_exponent = 0.0;  // accumulated hazard, <= 0
  std::optional<double> trapped_at;
  double horizon = 0.0;
  double final_capital = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_dev = 0.0;
  double ci_low = 0.0;   // max(value - 2.81 sd/sqrt(n), 0)
  double ci_high = 0.0;  // min(value + 2.81 sd/sqrt(n), 1)
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  // doubling diagnostic (when run): estimate at 2x horizon and whether the
  // two estimates agree within one CI half-width
  bool horizon_checked = false;
  double value_2x = 0.0;
  bool horizon_ok = true;
};

// Per-segment hazard accumulated while the capital sits below x*; dt_below
// must already be clipped to min(inter-event time, time_to_critical).
double psi_increment_constant(double x_start, double dt_below, double omega_c);
double psi_increment_exponential(const ModelParams& p, double x_start,
                                 double dt_below, double beta);
double psi_increment_numeric(const ModelParams& p, double x_start,
                             double dt_below, const OmegaRate& omega,
                             double abs_tol = 1e-10);

// One exact trajectory: Poisson(lambda) event times, closed-form flows in
// between (no time stepping), multiplicative Beta losses at events.
PathRecord simulate_path(const ModelParams& p, const LossDistribution& d,
                         double x0, double horizon, PathRng& rng,
                         const OmegaRate* omega = nullptr,
                         bool kill_at_trapping = false);

struct EstimateOptions {
  std::int64_t n = 10000;
  double horizon = 400.0;
  std::uint64_t seed = 1;
  int workers = 1;
  bool check_horizon = true;  // rerun at 2x horizon as a bias diagnostic
};

Estimate estimate_trapping(const ModelParams& p, const LossDistribution& d,
                           double x0, const EstimateOptions& opt);
Estimate estimate_ep(const ModelParams& p, const LossDistribution& d,
                     const OmegaRate& omega, double x0,
                     const EstimateOptions& opt);

}  // namespace captrap::mc

#endif
