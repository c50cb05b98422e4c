#pragma once

#include "ifperf/rng.hpp"
#include "ifperf/warnings.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ifperf {

// One Rayleigh block-fading link.  The desired signal has mean SNR
// avg_snr (linear); interferer i is described by the power ratio
// a_i = avg_snr / avg_inr_i, so large a_i means a weak interferer.
// The instantaneous SINR is X0 / (1 + sum X_i) with X0, X_i
// independent exponentials of means avg_snr and avg_snr / a_i.
//
// symbols_per_slot converts the per-symbol rate log2(1+SINR) into a
// per-slot service in bits.  The default ln(2) makes the service
// increment ln(1+SINR), the natural-log convention used throughout
// the transform algebra; experiments typically override it to 1 so
// rates read in bits per slot.
struct ChannelSpec {
    double avg_snr = 1.0;
    std::vector<double> interferer_ratios;
    double symbols_per_slot = std::numbers::ln2;

    // throws ConfigError on nonsense (non-positive powers, ...)
    void validate() const;

    // exponent of (1+SINR) per slot
    double bandwidth_exponent() const { return symbols_per_slot / std::numbers::ln2; }
};

// P(SINR <= x).
double sinr_cdf(const ChannelSpec& spec, double x);

// Partial-fraction expansion of prod a_i/(a_i+x) as sum u_i/(a_i+x).
// Requires pairwise-distinct ratios; nearly equal ones make the
// weights blow up in magnitude with cancelling signs, which is
// reported through min_relative_gap / ill_conditioned and a warning.
struct PartialFractionWeights {
    std::vector<double> u;
    double min_relative_gap = 0.0;

    bool ill_conditioned() const { return min_relative_gap < 1e-4; }
};

PartialFractionWeights partial_fraction_weights(const ChannelSpec& spec,
                                                WarningSink* sink = nullptr);

// Draws instantaneous SINR values, one independent exponential stream
// per constituent so results are reproducible under refactoring.
class SinrSampler {
public:
    SinrSampler(const ChannelSpec& spec, std::uint64_t seed, std::uint64_t base_stream = 0);

    double next();

private:
    ExponentialStream signal_;
    std::vector<ExponentialStream> interference_;
};

// Experiment-level description: mean SNR plus a target mean SINR
// reached by n equal-power interferers.  Exactly equal powers make the
// partial fractions degenerate, so the powers are spread by the small
// relative perturbation eta while keeping their sum (and thus the mean
// SINR) exact.
struct ScenarioSpec {
    double avg_snr = 1.0;   // linear
    double avg_sinr = 1.0;  // linear, <= avg_snr
    int n_interferers = 0;
    double perturbation = 1e-2;
    double symbols_per_slot = 1.0;
};

ChannelSpec scenario_to_channel(const ScenarioSpec& scenario);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

} // namespace ifperf
