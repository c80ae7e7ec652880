#ifndef CAPTRAP_POLICY_HPP
#define CAPTRAP_POLICY_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "captrap/model.hpp"

namespace captrap::policy {

// Target probability cannot be bracketed by the search bounds; the message
// reports the endpoint probabilities.
class no_bracket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TargetKind { trapping, ep_constant, ep_exponential };
enum class SolveFor { transfer_rate, barrier };

struct PolicyQuery {
  ModelParams base;          // the solved field is ignored / overwritten
  double x0 = 0.0;           // initial capital the probability refers to
  double target = 0.0;       // in (0,1)
  TargetKind kind = TargetKind::trapping;
  double omega = 0.0;        // omega_c or beta for the EP kinds
  SolveFor solve_for = SolveFor::transfer_rate;
  double lo = 0.0, hi = 0.0; // search bounds for the solved variable
};

// probability of the query's kind with the solved variable set to v
double evaluate(const PolicyQuery& q, double v);

// Bisection on the monotone closed form: returns v with
// |probability(v) - target| <= 1e-8.
double solve(const PolicyQuery& q);

struct FrontierPoint {
  double barrier = 0.0;
  std::optional<double> c_t;  // empty when the target is unattainable
  double achieved = 0.0;      // probability at the solved point (if any)
};

// Solve the transfer rate for each barrier in an increasing grid;
// unattainable points are kept with an empty c_t.
std::vector<FrontierPoint> frontier(const PolicyQuery& q,
                                    const std::vector<double>& barrier_grid);

}  // namespace captrap::policy

#endif
