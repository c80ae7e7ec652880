#ifndef CAPTRAP_CLOSED_FORM_HPP
#define CAPTRAP_CLOSED_FORM_HPP

#include <stdexcept>

#include "captrap/model.hpp"

namespace captrap::closed_form {

// Junction system could not be solved reliably; message carries the
// condition estimate. Signals parameter degeneracy (e.g. coincident
// exponents).
class singular_system : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Indicial exponents of one flow regime with net growth rate g. At
// delta = 0 the pair collapses exactly to {0, alpha - lambda/g} (for
// g < 0 the |.| sign convention puts the nonzero root first).
struct ExponentPair {
  double lo = 0.0;
  double hi = 0.0;
};
ExponentPair regime_exponents(double g, double lambda, double alpha,
                              double delta);

// Integration constants of the trapping-time transform, with the exponent
// bundle they belong to. The basis multiplied by a1_l/a2_l depends on where
// the mid-regime hypergeometric variable lands (see RegimeBasis in the
// implementation); in the r > c_t, x** < 0 regime it is exactly the
// printed pair of solutions around y = infinity.
struct TrappingConstants {
  bool certain = false;  // alpha <= lambda/r at delta = 0: trapping is sure
  double a2_u = 0.0;
  double a1_l = 0.0;
  double a2_l = 0.0;
  double a_u = 0.0, b_u = 0.0;
  double a_l = 0.0, b_l = 0.0;
  double c = 0.0;  // = alpha
  double cond = 0.0;
};

struct ContinuityDiag;

class TrappingSolution {
 public:
  TrappingSolution(const ModelParams& p, double delta);

  double operator()(double x) const;  // m_delta(x) for x >= x_star
  double derivative(double x) const;
  const TrappingConstants& constants() const { return k_; }
  ContinuityDiag diagnostics() const;

 private:
  struct Impl;
  ModelParams p_;
  double delta_;
  TrappingConstants k_;
  // basis parameters (kept flat so the object stays copyable)
  int upper_mode_ = 0, mid_mode_ = 0;
  double ut_ = 0, us_ = 0, mt_ = 0, ms_ = 0, mc_ = 0, mxref_ = 0;
};

TrappingConstants trapping_constants(const ModelParams& p, double delta);
double laplace_trapping(const ModelParams& p, double delta, double x);
double trapping_probability(const ModelParams& p, double x);

// Extreme-poverty constants. a_l multiplies the bounded lower-regime
// solution; for large hazard rates that basis function overflows double
// range, so the solution is carried internally as the scaled pair
// (a_l_scaled, ln_lower_ref) with a_l = a_l_scaled * exp(-ln_lower_ref)
// (which may underflow to zero without loss of evaluability).
struct EpConstants {
  double a2_u = 0.0;
  double a1_m = 0.0;
  double a2_m = 0.0;
  double a_l = 0.0;
  double a_l_scaled = 0.0;
  double ln_lower_ref = 0.0;
  double a_u = 0.0, b_u = 0.0;
  double a_m = 0.0, b_m = 0.0;
  double a_low = 0.0, b_low = 0.0, c_low = 0.0;
  double cond = 0.0;
};

class EpSolution {
 public:
  // constant rate omega_c > 0; delta >= 0
  EpSolution(const ModelParams& p, const OmegaRate& rate, double delta);

  double operator()(double x) const;  // x > 0
  double derivative(double x) const;
  const EpConstants& constants() const { return k_; }
  ContinuityDiag diagnostics() const;

 private:
  ModelParams p_;
  double delta_ = 0.0;
  EpConstants k_;
  OmegaRate::Kind kind_ = OmegaRate::Kind::constant;
  double omega_value_ = 0.0;
  double particular_ = 0.0;
  int mid_mode_ = 0;
  double mt_ = 0, ms_ = 0, mc_ = 0, mxref_ = 0;
  double ut_ = 0;
  // lower-regime basis bundle (log-space)
  double low_q_ = 0.0, low_a_ = 0.0, low_b_ = 0.0, low_c_ = 0.0;
};

EpConstants ep_constants_constant_rate(const ModelParams& p, double omega_c,
                                       double delta);
double ep_probability_constant(const ModelParams& p, double omega_c,
                               double delta, double x);
double ep_probability_exponential(const ModelParams& p, double beta, double x);

// Junction diagnostics, from the exact branch formulas on both sides.
// For the extreme-poverty solution the slope is continuous at B but jumps
// at x* by omega(x*-) (1 - m(x*)) / (c_t (B - x*)); deriv_gap_critical is
// the signed measured jump and kink_expected that prediction.
struct ContinuityDiag {
  double value_gap_barrier = 0.0;
  double deriv_gap_barrier = 0.0;
  double value_gap_critical = 0.0;   // EP only
  double deriv_gap_critical = 0.0;   // EP only (signed)
  double kink_expected = 0.0;        // EP only
  double boundary_residual = 0.0;    // trapping only: identity at x*
};

ContinuityDiag trapping_continuity(const ModelParams& p, double delta);
ContinuityDiag ep_continuity(const ModelParams& p, const OmegaRate& rate,
                             double delta);

}  // namespace captrap::closed_form

#endif
