#include "captrap/policy.hpp"

#include <cmath>
#include <sstream>

#include "captrap/closed_form.hpp"

namespace captrap::policy {
namespace {

void check_query(const PolicyQuery& q) {
  if (!(q.target > 0.0 && q.target < 1.0))
    throw validation_error("target: must lie in (0,1)");
  if (!(q.lo > 0.0 && q.hi > q.lo))
    throw validation_error("bounds: need 0 < lo < hi");
  if (q.solve_for == SolveFor::barrier && !(q.lo > q.base.x_star))
    throw validation_error("bounds: barrier search needs lo > x_star");
  if (q.kind != TargetKind::trapping && !(q.omega > 0.0))
    throw validation_error("omega: must be > 0 for extreme-poverty targets");
}

ModelParams with_value(const PolicyQuery& q, double v) {
  ModelParams p = q.base;
  if (q.solve_for == SolveFor::transfer_rate) {
    // keep clear of the r = c_t singularity excluded by the model
    if (std::fabs(v - p.r) <= 1e-9) v = p.r + (v < p.r ? -1e-9 : 1e-9);
    p.c_t = v;
  } else {
    p.barrier = v;
  }
  return p;
}

}  // namespace

double evaluate(const PolicyQuery& q, double v) {
  const ModelParams p = with_value(q, v);
  switch (q.kind) {
    case TargetKind::trapping:
      return closed_form::trapping_probability(p, q.x0);
    case TargetKind::ep_constant:
      return closed_form::ep_probability_constant(p, q.omega, 0.0, q.x0);
    case TargetKind::ep_exponential:
      return closed_form::ep_probability_exponential(p, q.omega, q.x0);
  }
  return 0.0;
}

double solve(const PolicyQuery& q) {
  check_query(q);
  double lo = q.lo, hi = q.hi;
  const double p_lo = evaluate(q, lo);
  const double p_hi = evaluate(q, hi);
  if (p_lo < p_hi)
    throw no_bracket("solve: probability increases across the bracket "
                     "(expected non-increasing in the solved variable)");
  if (!(p_lo >= q.target && q.target >= p_hi)) {
    std::ostringstream msg;
    msg << "solve: target " << q.target << " not bracketed: p(lo)=" << p_lo
        << ", p(hi)=" << p_hi;
    throw no_bracket(msg.str());
  }
  double mid = lo;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted in doubles
    const double pm = evaluate(q, mid);
    if (pm >= q.target)
      lo = mid;
    else
      hi = mid;
  }
  mid = 0.5 * (lo + hi);
  const double achieved = evaluate(q, mid);
  if (std::fabs(achieved - q.target) > 1e-8) {
    std::ostringstream msg;
    msg << "solve: bisection stalled at probability " << achieved
        << " for target " << q.target;
    throw std::runtime_error(msg.str());
  }
  return mid;
}

std::vector<FrontierPoint> frontier(const PolicyQuery& q,
                                    const std::vector<double>& barrier_grid) {
  for (std::size_t i = 0; i + 1 < barrier_grid.size(); ++i)
    if (!(barrier_grid[i] < barrier_grid[i + 1]))
      throw validation_error("barrier grid: must be strictly increasing");
  std::vector<FrontierPoint> out;
  out.reserve(barrier_grid.size());
  for (const double b : barrier_grid) {
    if (!(b > q.base.x_star))
      throw validation_error("barrier grid: every point must exceed x_star");
    FrontierPoint pt;
    pt.barrier = b;
    PolicyQuery qb = q;
    qb.base.barrier = b;
    qb.solve_for = SolveFor::transfer_rate;
    try {
      const double ct = solve(qb);
      pt.c_t = ct;
      pt.achieved = evaluate(qb, ct);
    } catch (const no_bracket&) {
      // kept as an unattainable marker
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace captrap::policy
