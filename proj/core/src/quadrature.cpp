#include "ifperf/quadrature.hpp"

#include "ifperf/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ifperf {

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo, double hi,
                                    const QuadratureSpec& spec) {
    if (!(lo < hi)) {
        throw QuadratureError("integrate_adaptive: empty or inverted interval");
    }

    // Bisection depth d allows 2^d panels.
    const int depth = std::max(1, static_cast<int>(
        std::ceil(std::log2(static_cast<double>(std::max(2, spec.max_subdivisions))))));

    using integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator::integrate(f, lo, hi, depth, spec.rel_tol, &error, &l1);

    // The internal stop test compares against the L1 norm; re-check the
    // reported estimate so callers can trust the tolerance they asked
    // for.  A small slack absorbs the estimate's own noise.
    const double scale = std::max(std::abs(value), l1);
    const double accept = std::max(spec.abs_tol, 10.0 * spec.rel_tol * scale);
    if (!std::isfinite(value) || !(error <= accept)) {
        std::ostringstream msg;
        msg << "integrate_adaptive: error estimate " << error
            << " exceeds tolerance " << accept
            << " (value " << value << ", interval [" << lo << ", " << hi << "])";
        throw QuadratureError(msg.str());
    }
    return QuadratureResult{value, error};
}

} // namespace ifperf
