#pragma once

#include <functional>

namespace ifperf {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;      // accept when error <= max(abs_tol, rel_tol * |I|)
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Adaptive Gauss-Kronrod integration of f over [lo, hi].  hi may be
// +infinity; the tail is folded onto a finite interval internally.
// Throws QuadratureError when the error estimate stays above tolerance.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo, double hi,
                                    const QuadratureSpec& spec = {});

} // namespace ifperf
