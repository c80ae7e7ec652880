#include "captrap/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace captrap {
namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw validation_error(key + ": " + what);
}

}  // namespace

void ModelParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) fail("r", "must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda", "must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha", "must be > 0");
  if (!(x_star > 0.0) || !std::isfinite(x_star)) fail("x_star", "must be > 0");
  if (!(c_t >= 0.0) || !std::isfinite(c_t)) fail("c_t", "must be >= 0");
  if (!(barrier > x_star))
    fail("barrier", "must exceed x_star");
  if (std::fabs(r - c_t) <= 1e-12)
    fail("c_t", "must differ from r by more than 1e-12");
  if (a || b || c_s) {
    if (!(a && b && c_s))
      fail("a", "micro inputs a, b, c_s must be given together");
    if (!(*a > 0.0 && *a < 1.0)) fail("a", "must lie in (0,1)");
    if (!(*b > 0.0)) fail("b", "must be > 0");
    if (!(*c_s > 0.0 && *c_s < 1.0)) fail("c_s", "must lie in (0,1)");
    const double derived = (1.0 - *a) * *b * *c_s;
    if (std::fabs(derived - r) > 1e-12 * std::max(1.0, std::fabs(r)))
      fail("r", "inconsistent with (1-a) b c_s");
  }
}

ModelParams make_params(double r, double lambda, double alpha, double x_star,
                        double barrier, double c_t) {
  ModelParams p;
  p.r = r;
  p.lambda = lambda;
  p.alpha = alpha;
  p.x_star = x_star;
  p.barrier = barrier;
  p.c_t = c_t;
  p.validate();
  return p;
}

ModelParams make_params_micro(double a, double b, double c_s, double lambda,
                              double alpha, double x_star, double barrier,
                              double c_t) {
  ModelParams p;
  p.a = a;
  p.b = b;
  p.c_s = c_s;
  p.r = growth_rate(a, b, c_s);
  p.lambda = lambda;
  p.alpha = alpha;
  p.x_star = x_star;
  p.barrier = barrier;
  p.c_t = c_t;
  p.validate();
  return p;
}

double growth_rate(double a, double b, double c_s) {
  if (!(a > 0.0 && a < 1.0)) throw validation_error("a: must lie in (0,1)");
  if (!(b > 0.0)) throw validation_error("b: must be > 0");
  if (!(c_s > 0.0 && c_s < 1.0))
    throw validation_error("c_s: must lie in (0,1)");
  return (1.0 - a) * b * c_s;
}

double x_double_star(const ModelParams& p) {
  if (std::fabs(p.r - p.c_t) <= 1e-12)
    throw std::domain_error("x_double_star: singular at r = c_t");
  return (p.c_t * p.barrier - p.r * p.x_star) / (p.r - p.c_t);
}

double flow_above(const ModelParams& p, double t, double x) {
  return (x - p.x_star) * std::exp(p.r * t) + p.x_star;
}

double flow_mid(const ModelParams& p, double t, double x) {
  const double xss = x_double_star(p);
  return (x + xss) * std::exp((p.r - p.c_t) * t) - xss;
}

double flow_below(const ModelParams& p, double t, double x) {
  if (below_is_absorbing(p)) return x;
  return (x - p.barrier) * std::exp(-p.c_t * t) + p.barrier;
}

double time_to_barrier(const ModelParams& p, double x) {
  const double xss = x_double_star(p);
  return std::log((p.barrier + xss) / (x + xss)) / (p.r - p.c_t);
}

double time_to_critical(const ModelParams& p, double x) {
  if (below_is_absorbing(p)) return std::numeric_limits<double>::infinity();
  return -std::log((p.x_star - p.barrier) / (x - p.barrier)) / p.c_t;
}

LossDistribution LossDistribution::beta_alpha_one(double alpha) {
  if (!(alpha > 0.0)) throw validation_error("alpha: must be > 0");
  LossDistribution d;
  d.alpha_ = alpha;
  return d;
}

LossDistribution LossDistribution::custom(
    std::function<double(double)> inverse_cdf) {
  if (!inverse_cdf)
    throw validation_error("loss distribution: empty inverse CDF");
  LossDistribution d;
  d.inverse_cdf_ = std::move(inverse_cdf);
  return d;
}

double LossDistribution::sample(double u) const {
  if (inverse_cdf_) return inverse_cdf_(u);
  return std::pow(u, 1.0 / alpha_);
}

double sample_loss(const LossDistribution& d, double u) { return d.sample(u); }

OmegaRate OmegaRate::constant(double omega_c) {
  if (!(omega_c >= 0.0))
    throw validation_error("omega_c: must be >= 0");
  OmegaRate w;
  w.kind = Kind::constant;
  w.value = omega_c;
  return w;
}

OmegaRate OmegaRate::exponential(double beta) {
  if (!(beta > 0.0)) throw validation_error("beta: must be > 0");
  OmegaRate w;
  w.kind = Kind::exponential;
  w.value = beta;
  return w;
}

OmegaRate OmegaRate::custom(std::function<double(double)> fn) {
  if (!fn) throw validation_error("omega: empty rate function");
  OmegaRate w;
  w.kind = Kind::custom;
  w.fn = std::move(fn);
  return w;
}

double OmegaRate::operator()(double x) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::exponential:
      return value / x;
    case Kind::custom:
      return fn(x);
  }
  return 0.0;
}

}  // namespace captrap
