#pragma once

namespace ifperf {

// Upper incomplete gamma for real order a (any sign) and x > 0.
//
// The Rayleigh-fading transforms in this library evaluate these at
// strongly negative orders and at arguments spanning many decades,
// which is outside the comfortable range of the usual positive-order
// routines.  Guaranteed relative accuracy 1e-10 for a in [-80, 10] and
// x in [1e-6, 1e3]; the implementation degrades gracefully well beyond
// that box.
//
// upper_incomplete_gamma throws std::overflow_error /
// std::underflow_error when the value does not fit a double; the log
// and scaled forms stay finite across the supported domain.  x <= 0 or
// non-finite inputs throw std::domain_error.
double upper_incomplete_gamma(double a, double x);
double log_upper_incomplete_gamma(double a, double x);

// e^x x^{-a} Gamma(a, x).  Well-scaled: O(1/(x + 1 - a)) over the whole
// domain, so it never over- or underflows where the plain value would.
double scaled_upper_incomplete_gamma(double a, double x);

// log of the truncated integral int_{x1}^{x2} t^{a-1} e^{-t} dt with
// 0 < x1 < x2 (x2 may be +infinity).  Computed from whichever of the
// lower or upper tails is small so the subtraction never cancels
// catastrophically, e.g. for a = 31, x in [0.004, 0.099] where both
// upper tails agree to 40 digits.
double log_gamma_difference(double a, double x1, double x2);

} // namespace ifperf
