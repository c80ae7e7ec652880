#include "captrap/closed_form.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "captrap/special_functions.hpp"

namespace captrap::closed_form {
namespace {

namespace sf = captrap::sf;

constexpr double kCondLimit = 1e13;
constexpr double kUnitSlack = 1e-10;

double clamp_unit(double v, const char* what) {
  if (v >= 0.0 && v <= 1.0) return v;
  if (v > -kUnitSlack && v < 1.0 + kUnitSlack)
    return std::min(1.0, std::max(0.0, v));
  std::ostringstream msg;
  msg << what << ": value " << v << " outside [0,1] beyond numerical slack";
  throw std::runtime_error(msg.str());
}

// ---------------------------------------------------------------------------
// tiny dense solver with column equilibration and a 1-norm condition estimate
// ---------------------------------------------------------------------------

struct LinSolve {
  std::array<double, 4> x{};
  double cond = 0.0;
};

LinSolve solve_small(int n, std::array<double, 16> A, std::array<double, 4> b) {
  std::array<double, 4> colscale{};
  for (int j = 0; j < n; ++j) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(A[i * 4 + j]));
    if (m == 0.0) throw singular_system("junction system: zero column");
    colscale[j] = 1.0 / m;
    for (int i = 0; i < n; ++i) A[i * 4 + j] *= colscale[j];
  }
  const std::array<double, 16> A0 = A;

  // LU with partial pivoting
  std::array<int, 4> piv{0, 1, 2, 3};
  for (int k = 0; k < n; ++k) {
    int imax = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(A[i * 4 + k]) > std::fabs(A[imax * 4 + k])) imax = i;
    if (imax != k) {
      for (int j = 0; j < n; ++j) std::swap(A[k * 4 + j], A[imax * 4 + j]);
      std::swap(piv[k], piv[imax]);
    }
    const double pivot = A[k * 4 + k];
    if (std::fabs(pivot) < 1e-300)
      throw singular_system("junction system: vanishing pivot");
    for (int i = k + 1; i < n; ++i) {
      const double f = A[i * 4 + k] / pivot;
      A[i * 4 + k] = f;
      for (int j = k + 1; j < n; ++j) A[i * 4 + j] -= f * A[k * 4 + j];
    }
  }

  auto lu_solve = [&](const std::array<double, 4>& rhs) {
    std::array<double, 4> y{};
    for (int i = 0; i < n; ++i) {
      double s = rhs[piv[i]];
      for (int j = 0; j < i; ++j) s -= A[i * 4 + j] * y[j];
      y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int j = i + 1; j < n; ++j) s -= A[i * 4 + j] * y[j];
      y[i] = s / A[i * 4 + i];
    }
    return y;
  };

  // condition estimate: ||A||_1 * ||A^-1||_1 on the equilibrated matrix
  double norm_a = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(A0[i * 4 + j]);
    norm_a = std::max(norm_a, s);
  }
  double norm_inv = 0.0;
  for (int j = 0; j < n; ++j) {
    std::array<double, 4> e{};
    e[j] = 1.0;
    const auto col = lu_solve(e);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(col[i]);
    norm_inv = std::max(norm_inv, s);
  }

  LinSolve out;
  out.cond = norm_a * norm_inv;
  if (!std::isfinite(out.cond) || out.cond > kCondLimit) {
    std::ostringstream msg;
    msg << "junction system is ill-conditioned (cond ~ " << out.cond << ")";
    throw singular_system(msg.str());
  }
  const auto y = lu_solve(b);
  for (int j = 0; j < n; ++j) out.x[j] = y[j] * colscale[j];
  return out;
}

// ---------------------------------------------------------------------------
// solution bases of one flow regime
// ---------------------------------------------------------------------------

enum Mode : int { kInf = 0, kZero = 1, kPower = 2 };

struct BasisPair {
  double w1 = 0, dw1 = 0;  // lo-exponent solution (or y-regular one in kZero)
  double w2 = 0, dw2 = 0;  // hi-exponent solution
};

// Hypergeometric variable y(x) = sigma * x / t. Around y = infinity the two
// solutions are |y|^{-e} 2F1(e, e-c+1; e-e'+1; 1/y); for 0 < y < 1 (which
// happens when c_t > r) the pair around y = 0 is used instead, and when the
// flow constant degenerates to zero the exponents give plain powers.
struct RegimeBasis {
  int mode = kInf;
  double lo = 0, hi = 0, c = 0;
  double t = 1.0, sigma = 1.0;
  double xref = 0.0;  // power normalization point; defaults to t (printed form)

  static RegimeBasis upper(ExponentPair e, double alpha, double x_star) {
    RegimeBasis r;
    r.mode = kInf;
    r.lo = e.lo;
    r.hi = e.hi;
    r.c = alpha;
    r.t = x_star;
    r.xref = x_star;
    r.sigma = 1.0;
    r.fix_degenerate_difference();
    return r;
  }

  static RegimeBasis mid(ExponentPair e, double alpha, double xss,
                         double x_star, double barrier) {
    RegimeBasis r;
    r.lo = e.lo;
    r.hi = e.hi;
    r.c = alpha;
    if (std::fabs(xss) < 1e-12 * x_star) {
      r.mode = kPower;
      r.t = 1.0;
      return r;
    }
    r.t = std::fabs(xss);
    r.sigma = xss > 0.0 ? -1.0 : 1.0;
    const double emax = std::max(std::fabs(r.lo), std::fabs(r.hi));
    if (r.t <= x_star) {
      // |y| > 1 across the regime: the expansion around y = infinity.
      // Exponents stay moderate here (|x**| small forces |r - c_t| large).
      r.mode = kInf;
      r.xref = r.t;
      r.fix_degenerate_difference();
      return r;
    }
    if (r.t >= barrier &&
        (r.sigma < 0.0 ? emax * std::log(r.t / x_star) > 600.0 : true)) {
      // |y| < 1 across the regime: the pair around y = 0. This is the
      // r < c_t branch, and also the c_t -> r boundary layer where the
      // y = infinity pair overflows (exponents ~ lambda/(r - c_t)).
      r.mode = kZero;
      r.xref = r.t;
      if (std::fabs(r.c - std::round(r.c)) < sf::integer_tol)
        r.c += 1.1e-9;  // split the y=0 pair off the logarithmic case
      return r;
    }
    // x** > 0 with moderate exponents: y < 0, arguments handled by Pfaff.
    r.mode = kInf;
    r.fix_degenerate_difference();
    const double span = std::max(std::fabs(std::log(x_star / r.t)),
                                 std::fabs(std::log(barrier / r.t)));
    r.xref = (emax * span > 600.0) ? barrier : r.t;
    return r;
  }

  // hi - lo >= 1 and integral makes e - e' + 1 hit a pole of the second
  // solution; nudge per the documented perturbation policy.
  void fix_degenerate_difference() {
    const double d = hi - lo;
    if (d >= 1.0 - sf::integer_tol &&
        std::fabs(d - std::round(d)) < sf::integer_tol)
      hi += 1.1e-9;
  }

  BasisPair eval(double x) const {
    BasisPair out;
    if (mode == kPower) {
      out.w1 = std::pow(x, -lo);
      out.dw1 = -lo * std::pow(x, -lo - 1.0);
      out.w2 = std::pow(x, -hi);
      out.dw2 = -hi * std::pow(x, -hi - 1.0);
      return out;
    }
    if (mode == kZero) {
      const double ay = x / t;          // |y|
      const double y = sigma * ay;      // signed argument, |y| < 1
      const double f1 = sf::hyp2f1(lo, hi, c, y);
      out.w1 = f1;
      out.dw1 =
          (lo * hi / c) * sf::hyp2f1(lo + 1, hi + 1, c + 1, y) * sigma / t;
      const double a2 = lo - c + 1, b2 = hi - c + 1, c2 = 2.0 - c;
      const double f2 = sf::hyp2f1(a2, b2, c2, y);
      out.w2 = std::pow(ay, 1.0 - c) * f2;
      out.dw2 = ((1.0 - c) * std::pow(ay, -c) * f2 +
                 std::pow(ay, 1.0 - c) * (a2 * b2 / c2) *
                     sf::hyp2f1(a2 + 1, b2 + 1, c2 + 1, y) * sigma) /
                t;
      return out;
    }
    const double arg = sigma * t / x;
    const double darg = -sigma * t / (x * x);
    auto sol = [&](double e, double eo, double& w, double& dw) {
      const double cp = e - eo + 1.0;
      const double f = sf::hyp2f1(e, e - c + 1.0, cp, arg);
      const double fd = (e * (e - c + 1.0) / cp) *
                        sf::hyp2f1(e + 1.0, e - c + 2.0, cp + 1.0, arg);
      const double pw = std::pow(x / xref, -e);
      w = pw * f;
      dw = -e * pw / x * f + pw * fd * darg;
    };
    sol(lo, hi, out.w1, out.dw1);
    sol(hi, lo, out.w2, out.dw2);
    return out;
  }
};

RegimeBasis make_upper(const ModelParams& p, double delta) {
  return RegimeBasis::upper(regime_exponents(p.r, p.lambda, p.alpha, delta),
                            p.alpha, p.x_star);
}

RegimeBasis make_mid(const ModelParams& p, double delta) {
  return RegimeBasis::mid(
      regime_exponents(p.r - p.c_t, p.lambda, p.alpha, delta), p.alpha,
      x_double_star(p), p.x_star, p.barrier);
}

void require_transfers(const ModelParams& p) {
  if (p.c_t <= 0.0)
    throw validation_error(
        "c_t: the closed forms require c_t > 0 (use the simulator for the "
        "no-transfer model)");
}

// pack/unpack so the solution objects stay trivially copyable
RegimeBasis basis_from(int mode, double lo, double hi, double c, double t,
                       double sigma, double xref) {
  RegimeBasis r;
  r.mode = mode;
  r.lo = lo;
  r.hi = hi;
  r.c = c;
  r.t = t;
  r.sigma = sigma;
  r.xref = xref;
  return r;
}

// ---------------------------------------------------------------------------
// lower-regime basis for extreme poverty, carried in log space: for large
// hazard rates both the basis value and its coefficient overflow double
// range while their product stays in [0,1].
// ---------------------------------------------------------------------------

double log_add(double u, double v) {
  if (u < v) std::swap(u, v);
  return u + std::log1p(std::exp(v - u));
}

struct LowerBasis {
  // constant rate: q = 0, F(a,b;c;y); exponential rate: y^q F(a,b;c;y)
  double q = 0, a = 0, b = 0, c = 0;
  double barrier = 1.0;
  double alpha = 1.0;

  double ln_value(double x) const {
    const double y = x / barrier;
    return q * std::log(y) + sf::ln_hyp2f1_pos(a, b, c, y);
  }
  double ln_deriv(double x) const {
    const double y = x / barrier;
    const double contig =
        std::log(a * b / (c * barrier)) + sf::ln_hyp2f1_pos(a + 1, b + 1, c + 1, y);
    if (q == 0.0) return contig;
    const double power = std::log(q / barrier) + (q - 1.0) * std::log(y) +
                         sf::ln_hyp2f1_pos(a, b, c, y);
    return log_add(power, q * std::log(y) + contig);
  }
  // log of int_0^1 h(x z) dG(z) for G(z) = z^alpha
  double ln_integral(double x) const {
    const double y = x / barrier;
    return std::log(alpha / (alpha + q)) + q * std::log(y) +
           sf::ln_hyp2f1_pos(a, b, c + 1, y);
  }
};

}  // namespace

ExponentPair regime_exponents(double g, double lambda, double alpha,
                              double delta) {
  ExponentPair e;
  if (delta == 0.0) {
    const double v = alpha - lambda / g;
    if (g > 0.0) {
      e.lo = std::min(0.0, v);
      e.hi = std::max(0.0, v);
    } else {
      e.lo = v;  // positive for g < 0; keeps the root order of the |.| form
      e.hi = 0.0;
    }
    return e;
  }
  const double d = delta + lambda - alpha * g;
  const double disc = std::sqrt(d * d + 4.0 * g * alpha * delta);
  e.lo = (-d - disc) / (2.0 * g);
  e.hi = (-d + disc) / (2.0 * g);
  if (e.lo > e.hi) std::swap(e.lo, e.hi);  // g < 0 flips the ordering
  return e;
}

// ---------------------------------------------------------------------------
// trapping time
// ---------------------------------------------------------------------------

TrappingSolution::TrappingSolution(const ModelParams& p, double delta)
    : p_(p), delta_(delta) {
  p_.validate();
  require_transfers(p_);
  if (delta < 0.0) throw validation_error("delta: must be >= 0");
  k_.c = p.alpha;
  if (delta == 0.0 && !p.net_profit_condition()) {
    k_.certain = true;
    return;
  }

  const RegimeBasis up = make_upper(p_, delta);
  const RegimeBasis mid = make_mid(p_, delta);
  upper_mode_ = up.mode;
  ut_ = up.t;
  us_ = up.sigma;
  mid_mode_ = mid.mode;
  mt_ = mid.t;
  ms_ = mid.sigma;
  mc_ = mid.c;
  mxref_ = mid.xref;
  k_.a_u = up.lo;
  k_.b_u = up.hi;
  k_.a_l = mid.lo;
  k_.b_l = mid.hi;

  const double B = p.barrier, xs = p.x_star;
  const BasisPair uB = up.eval(B);
  const BasisPair mB = mid.eval(B);
  const BasisPair mS = mid.eval(xs);

  // unknowns [A2u, A1l, A2l]:      value and slope match at B, and the
  // boundary identity (lam+d) m(x*) = c_t (B-x*) m'(x*) + lam closes it.
  std::array<double, 16> A{};
  std::array<double, 4> rhs{};
  A[0 * 4 + 0] = uB.w2;
  A[0 * 4 + 1] = -mB.w1;
  A[0 * 4 + 2] = -mB.w2;
  A[1 * 4 + 0] = uB.dw2;
  A[1 * 4 + 1] = -mB.dw1;
  A[1 * 4 + 2] = -mB.dw2;
  A[2 * 4 + 1] = (p.lambda + delta) * mS.w1 - p.c_t * (B - xs) * mS.dw1;
  A[2 * 4 + 2] = (p.lambda + delta) * mS.w2 - p.c_t * (B - xs) * mS.dw2;
  rhs[2] = p.lambda;

  const LinSolve sol = solve_small(3, A, rhs);
  k_.a2_u = sol.x[0];
  k_.a1_l = sol.x[1];
  k_.a2_l = sol.x[2];
  k_.cond = sol.cond;
}

double TrappingSolution::operator()(double x) const {
  if (!(x >= p_.x_star))
    throw std::domain_error("laplace_trapping: requires x >= x_star");
  if (k_.certain) return 1.0;
  const RegimeBasis up = basis_from(upper_mode_, k_.a_u, k_.b_u, p_.alpha, ut_, us_, ut_);
  const RegimeBasis mid = basis_from(mid_mode_, k_.a_l, k_.b_l, mc_, mt_, ms_, mxref_);
  double v;
  if (x >= p_.barrier)
    v = k_.a2_u * up.eval(x).w2;
  else {
    const BasisPair m = mid.eval(x);
    v = k_.a1_l * m.w1 + k_.a2_l * m.w2;
  }
  return clamp_unit(v, "laplace_trapping");
}

double TrappingSolution::derivative(double x) const {
  if (!(x >= p_.x_star))
    throw std::domain_error("laplace_trapping: requires x >= x_star");
  if (k_.certain) return 0.0;
  const RegimeBasis up = basis_from(upper_mode_, k_.a_u, k_.b_u, p_.alpha, ut_, us_, ut_);
  const RegimeBasis mid = basis_from(mid_mode_, k_.a_l, k_.b_l, mc_, mt_, ms_, mxref_);
  if (x >= p_.barrier) return k_.a2_u * up.eval(x).dw2;
  const BasisPair m = mid.eval(x);
  return k_.a1_l * m.dw1 + k_.a2_l * m.dw2;
}

ContinuityDiag TrappingSolution::diagnostics() const {
  ContinuityDiag d;
  if (k_.certain) return d;
  const RegimeBasis up = basis_from(upper_mode_, k_.a_u, k_.b_u, p_.alpha, ut_, us_, ut_);
  const RegimeBasis mid = basis_from(mid_mode_, k_.a_l, k_.b_l, mc_, mt_, ms_, mxref_);
  const double B = p_.barrier, xs = p_.x_star;
  const BasisPair uB = up.eval(B);
  const BasisPair mB = mid.eval(B);
  const BasisPair mS = mid.eval(xs);
  const double mid_vB = k_.a1_l * mB.w1 + k_.a2_l * mB.w2;
  const double mid_dB = k_.a1_l * mB.dw1 + k_.a2_l * mB.dw2;
  d.value_gap_barrier = std::fabs(k_.a2_u * uB.w2 - mid_vB);
  d.deriv_gap_barrier = std::fabs(k_.a2_u * uB.dw2 - mid_dB);
  const double v_xs = k_.a1_l * mS.w1 + k_.a2_l * mS.w2;
  const double dv_xs = k_.a1_l * mS.dw1 + k_.a2_l * mS.dw2;
  d.boundary_residual = std::fabs((p_.lambda + delta_) * v_xs -
                                  p_.c_t * (B - xs) * dv_xs - p_.lambda);
  return d;
}

TrappingConstants trapping_constants(const ModelParams& p, double delta) {
  return TrappingSolution(p, delta).constants();
}

double laplace_trapping(const ModelParams& p, double delta, double x) {
  return TrappingSolution(p, delta)(x);
}

double trapping_probability(const ModelParams& p, double x) {
  return TrappingSolution(p, 0.0)(x);
}

// ---------------------------------------------------------------------------
// extreme poverty
// ---------------------------------------------------------------------------

EpSolution::EpSolution(const ModelParams& p, const OmegaRate& rate,
                       double delta)
    : p_(p), delta_(delta), kind_(rate.kind), omega_value_(rate.value) {
  p_.validate();
  require_transfers(p_);
  if (delta < 0.0) throw validation_error("delta: must be >= 0");
  if (rate.kind == OmegaRate::Kind::custom)
    throw validation_error(
        "omega: closed forms cover constant and exponential rates only");
  if (!(rate.value > 0.0)) throw validation_error("omega: rate must be > 0");
  if (delta == 0.0 && !p.net_profit_condition())
    throw validation_error(
        "alpha: net profit condition alpha > lambda/r required at delta = 0");
  if (rate.kind == OmegaRate::Kind::exponential && delta != 0.0)
    throw validation_error(
        "delta: only the probability (delta = 0) is available for the "
        "exponential rate");

  const double B = p.barrier, xs = p.x_star, al = p.alpha, lam = p.lambda;

  const RegimeBasis up = make_upper(p_, delta);
  const RegimeBasis mid = make_mid(p_, delta);
  ut_ = up.t;
  mid_mode_ = mid.mode;
  mt_ = mid.t;
  ms_ = mid.sigma;
  mc_ = mid.c;
  mxref_ = mid.xref;
  k_.a_u = up.lo;
  k_.b_u = up.hi;
  k_.a_m = mid.lo;
  k_.b_m = mid.hi;

  LowerBasis low;
  low.barrier = B;
  low.alpha = al;
  if (rate.kind == OmegaRate::Kind::constant) {
    const double om = rate.value;
    const double s = al * p.c_t + lam + delta + om;
    const double disc = std::sqrt(s * s - 4.0 * al * p.c_t * (delta + om));
    low.q = 0.0;
    low.a = (s - disc) / (2.0 * p.c_t);
    low.b = (s + disc) / (2.0 * p.c_t);
    low.c = al;
    particular_ = om / (delta + om);
  } else {
    // omega(x) = beta / x; substitution h = x^{1-alpha} g moves the lower
    // equation onto the hypergeometric form with the parameters below.
    const double beta = rate.value;
    const double cl = -(B * p.c_t * (al - 2.0) + beta) / (B * p.c_t);
    low.q = 2.0 - al - cl;  // = beta / (B c_t)
    low.a = 1.0 - al - cl + 1.0;
    low.b = (p.c_t + lam) / p.c_t - cl + 1.0;
    low.c = 2.0 - cl;
    particular_ = 1.0;
  }
  low_q_ = low.q;
  low_a_ = low.a;
  low_b_ = low.b;
  low_c_ = low.c;
  k_.a_low = low.a;
  k_.b_low = low.b;
  k_.c_low = low.c;

  const BasisPair uB = up.eval(B);
  const BasisPair mB = mid.eval(B);
  const BasisPair mS = mid.eval(xs);

  const double ln_ref = low.ln_value(xs);
  k_.ln_lower_ref = ln_ref;
  const double lsi = std::exp(low.ln_integral(xs) - ln_ref);

  // unknowns [A2u, A1m, A2m, A_low_scaled]; rows: value and slope at B,
  // value at x*, and the mid-regime equation taken at x* (the lower-regime
  // hazard makes the slope jump there, so matching slopes would solve a
  // different process; see the tests for the jump identity).
  std::array<double, 16> A{};
  std::array<double, 4> rhs{};
  A[0 * 4 + 0] = uB.w2;
  A[0 * 4 + 1] = -mB.w1;
  A[0 * 4 + 2] = -mB.w2;
  A[1 * 4 + 0] = uB.dw2;
  A[1 * 4 + 1] = -mB.dw1;
  A[1 * 4 + 2] = -mB.dw2;
  A[2 * 4 + 1] = mS.w1;
  A[2 * 4 + 2] = mS.w2;
  A[2 * 4 + 3] = -1.0;
  rhs[2] = particular_;
  A[3 * 4 + 1] = p.c_t * (B - xs) * mS.dw1 - (lam + delta) * mS.w1;
  A[3 * 4 + 2] = p.c_t * (B - xs) * mS.dw2 - (lam + delta) * mS.w2;
  A[3 * 4 + 3] = lam * lsi;
  rhs[3] = -lam * particular_;

  const LinSolve sol = solve_small(4, A, rhs);
  k_.a2_u = sol.x[0];
  k_.a1_m = sol.x[1];
  k_.a2_m = sol.x[2];
  k_.a_l_scaled = sol.x[3];
  k_.a_l = k_.a_l_scaled * std::exp(-ln_ref);  // may underflow; informational
  k_.cond = sol.cond;
}

double EpSolution::operator()(double x) const {
  if (!(x > 0.0)) throw std::domain_error("ep probability: requires x > 0");
  double v;
  if (x >= p_.barrier) {
    const RegimeBasis up =
        basis_from(kInf, k_.a_u, k_.b_u, p_.alpha, ut_, 1.0, ut_);
    v = k_.a2_u * up.eval(x).w2;
  } else if (x >= p_.x_star) {
    const RegimeBasis mid =
        basis_from(mid_mode_, k_.a_m, k_.b_m, mc_, mt_, ms_, mxref_);
    const BasisPair m = mid.eval(x);
    v = k_.a1_m * m.w1 + k_.a2_m * m.w2;
  } else {
    LowerBasis low{low_q_, low_a_, low_b_, low_c_, p_.barrier, p_.alpha};
    v = particular_ +
        k_.a_l_scaled * std::exp(low.ln_value(x) - k_.ln_lower_ref);
  }
  return clamp_unit(v, "ep probability");
}

double EpSolution::derivative(double x) const {
  if (!(x > 0.0)) throw std::domain_error("ep probability: requires x > 0");
  if (x >= p_.barrier) {
    const RegimeBasis up =
        basis_from(kInf, k_.a_u, k_.b_u, p_.alpha, ut_, 1.0, ut_);
    return k_.a2_u * up.eval(x).dw2;
  }
  if (x >= p_.x_star) {
    const RegimeBasis mid =
        basis_from(mid_mode_, k_.a_m, k_.b_m, mc_, mt_, ms_, mxref_);
    const BasisPair m = mid.eval(x);
    return k_.a1_m * m.dw1 + k_.a2_m * m.dw2;
  }
  LowerBasis low{low_q_, low_a_, low_b_, low_c_, p_.barrier, p_.alpha};
  return k_.a_l_scaled * std::exp(low.ln_deriv(x) - k_.ln_lower_ref);
}

ContinuityDiag EpSolution::diagnostics() const {
  ContinuityDiag d;
  const RegimeBasis up = basis_from(kInf, k_.a_u, k_.b_u, p_.alpha, ut_, 1.0, ut_);
  const RegimeBasis mid = basis_from(mid_mode_, k_.a_m, k_.b_m, mc_, mt_, ms_, mxref_);
  const double B = p_.barrier, xs = p_.x_star;
  const BasisPair uB = up.eval(B);
  const BasisPair mB = mid.eval(B);
  const BasisPair mS = mid.eval(xs);
  const double mid_vB = k_.a1_m * mB.w1 + k_.a2_m * mB.w2;
  const double mid_dB = k_.a1_m * mB.dw1 + k_.a2_m * mB.dw2;
  d.value_gap_barrier = std::fabs(k_.a2_u * uB.w2 - mid_vB);
  d.deriv_gap_barrier = std::fabs(k_.a2_u * uB.dw2 - mid_dB);
  LowerBasis low{low_q_, low_a_, low_b_, low_c_, p_.barrier, p_.alpha};
  const double low_v = particular_ + k_.a_l_scaled;  // basis scaled to 1 at x*
  const double low_d =
      k_.a_l_scaled * std::exp(low.ln_deriv(xs) - k_.ln_lower_ref);
  const double mid_v = k_.a1_m * mS.w1 + k_.a2_m * mS.w2;
  const double mid_d = k_.a1_m * mS.dw1 + k_.a2_m * mS.dw2;
  d.value_gap_critical = std::fabs(mid_v - low_v);
  d.deriv_gap_critical = mid_d - low_d;
  const double omega_at_xs =
      (kind_ == OmegaRate::Kind::constant) ? omega_value_
                                           : omega_value_ / xs;
  d.kink_expected = omega_at_xs * (1.0 - mid_v) / (p_.c_t * (B - xs));
  return d;
}

EpConstants ep_constants_constant_rate(const ModelParams& p, double omega_c,
                                       double delta) {
  return EpSolution(p, OmegaRate::constant(omega_c), delta).constants();
}

double ep_probability_constant(const ModelParams& p, double omega_c,
                               double delta, double x) {
  return EpSolution(p, OmegaRate::constant(omega_c), delta)(x);
}

double ep_probability_exponential(const ModelParams& p, double beta,
                                  double x) {
  return EpSolution(p, OmegaRate::exponential(beta), 0.0)(x);
}

ContinuityDiag trapping_continuity(const ModelParams& p, double delta) {
  return TrappingSolution(p, delta).diagnostics();
}

ContinuityDiag ep_continuity(const ModelParams& p, const OmegaRate& rate,
                             double delta) {
  return EpSolution(p, rate, delta).diagnostics();
}

}  // namespace captrap::closed_form
