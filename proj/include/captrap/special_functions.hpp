#ifndef CAPTRAP_SPECIAL_FUNCTIONS_HPP
#define CAPTRAP_SPECIAL_FUNCTIONS_HPP

#include <stdexcept>
#include <string>

namespace captrap::sf {

// Thrown when an argument sits on a pole of the gamma function or of the
// hypergeometric parameter lattice (c a non-positive integer).
class pole_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Thrown when every evaluation branch fails to converge.
class no_convergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tolerance below which a real is treated as an integer on parameter lattices.
inline constexpr double integer_tol = 1e-9;

bool is_nonpositive_integer(double x);

// log|Gamma(x)|; if sign is non-null it receives the sign of Gamma(x).
// Throws pole_error at non-positive integers.
double ln_gamma(double x, int* sign = nullptr);

// Gamma(x) itself (may overflow to +-inf for large x).
double gamma_fn(double x);

// Pochhammer symbol (a)_n = Gamma(a+n)/Gamma(a), integer n >= 0.
double pochhammer(double a, int n);

// Gauss hypergeometric function 2F1(a,b;c;z) for real parameters and real
// z excluded from [1, inf), except z = 1 itself when c-a-b > 0 (Gauss
// summation). Symmetric in (a,b) exactly at the API level.
double hyp2f1(double a, double b, double c, double z);

// 2F1(a,b;c;z)/Gamma(c); finite for every real c including non-positive
// integers, where the series-limit formula is used.
double hyp2f1_regularized(double a, double b, double c, double z);

// d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z). Requires c != 0.
double hyp2f1_derivative(double a, double b, double c, double z);

// log of 2F1(a,b;c;z) when every series term is positive (a,b,c > 0 and
// 0 < z < 1). Handles values far beyond double range; used where the
// parameters grow with the extreme-poverty rate.
double ln_hyp2f1_pos(double a, double b, double c, double z);

}  // namespace captrap::sf

#endif
