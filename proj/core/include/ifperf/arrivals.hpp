#pragma once

#include <ifperf/errors.hpp>

#include <cmath>

namespace ifperf {

// Constant-rate arrivals in service units per slot. The cumulative arrivals
// over n slots have Mellin transform e^{rate (s-1) n}; per slot the factor
// is e^{rate (s-1)}.
struct ArrivalSpec {
    double rate = 0.0;

    void validate() const
    {
        if (!(rate >= 0.0) || !std::isfinite(rate))
            throw ConfigError("arrival rate must be nonnegative and finite");
    }
};

inline double arrival_mellin(const ArrivalSpec& spec, double s)
{
    return std::exp(spec.rate * (s - 1.0));
}

} // namespace ifperf
