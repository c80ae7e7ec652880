#ifndef CAPTRAP_MODEL_HPP
#define CAPTRAP_MODEL_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace captrap {

class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural parameters of the capital process. Immutable after validation.
//
//   dX/dt = r [X - x*]^+ + c_t [B - X]^+
//
// with multiplicative losses X -> X Z at Poisson(lambda) events.
struct ModelParams {
  double r = 0.0;        // capital growth rate
  double lambda = 0.0;   // loss intensity
  double alpha = 0.0;    // Beta(alpha, 1) shape of remaining proportions
  double x_star = 0.0;   // critical capital (poverty line)
  double barrier = 0.0;  // transfer eligibility barrier B > x*
  double c_t = 0.0;      // transfer rate, >= 0

  // present when r was derived from the micro inputs r = (1-a) b c_s
  std::optional<double> a, b, c_s;

  // throws validation_error naming the offending key
  void validate() const;

  bool net_profit_condition() const { return alpha > lambda / r; }
};

ModelParams make_params(double r, double lambda, double alpha, double x_star,
                        double barrier, double c_t);
ModelParams make_params_micro(double a, double b, double c_s, double lambda,
                              double alpha, double x_star, double barrier,
                              double c_t);

// r = (1-a) b c_s with range checks.
double growth_rate(double a, double b, double c_s);

// flow constant x** = (c_t B - r x*)/(r - c_t) of the mid regime
double x_double_star(const ModelParams& p);

// deterministic flows between loss events
double flow_above(const ModelParams& p, double t, double x);  // x >= B
double flow_mid(const ModelParams& p, double t, double x);    // x* <= x <= B
double flow_below(const ModelParams& p, double t, double x);  // 0 < x < x*

// time for flow_mid to reach the barrier from x in [x*, B)
double time_to_barrier(const ModelParams& p, double x);
// time for flow_below to reach x* from x in (0, x*); +inf when c_t = 0
double time_to_critical(const ModelParams& p, double x);

// true when capital below x* cannot move (c_t = 0)
inline bool below_is_absorbing(const ModelParams& p) { return p.c_t == 0.0; }

// Distribution of the remaining proportion Z in (0,1].
class LossDistribution {
 public:
  static LossDistribution beta_alpha_one(double alpha);
  static LossDistribution custom(std::function<double(double)> inverse_cdf);

  // map a uniform variate u in (0,1) to a sample
  double sample(double u) const;

  bool is_beta() const { return inverse_cdf_ == nullptr; }
  double beta_alpha() const { return alpha_; }

 private:
  double alpha_ = 1.0;
  std::function<double(double)> inverse_cdf_;
};

double sample_loss(const LossDistribution& d, double u);

// State-dependent extreme-poverty hazard on (0, x*].
struct OmegaRate {
  enum class Kind { constant, exponential, custom };

  Kind kind = Kind::constant;
  double value = 0.0;  // omega_c for constant, beta for exponential
  std::function<double(double)> fn;

  static OmegaRate constant(double omega_c);
  static OmegaRate exponential(double beta);
  static OmegaRate custom(std::function<double(double)> fn);

  double operator()(double x) const;
};

}  // namespace captrap

#endif
