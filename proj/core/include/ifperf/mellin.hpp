#pragma once

#include <ifperf/channel.hpp>
#include <ifperf/warnings.hpp>

namespace ifperf {

// Controls for the series enclosures of the per-ratio integrals and for the
// quadrature fallback. `truncation_order` is the first checkpoint at which
// convergence is assessed (and the fixed order when `adaptive` is false);
// adaptive runs double the order until `bracket_rel_target` is met or the
// projected cost exceeds `max_truncation_order`.
struct MellinParams {
    int truncation_order = 16;
    int max_truncation_order = 4096;
    double split_width = 1e-9;
    double bracket_rel_target = 1e-8;
    bool adaptive = true;
    double quadrature_rel_tol = 1e-11;

    void validate() const;
};

// Two-sided enclosure of a transform value. Series and closed-form results
// are rigorous up to the evaluation accuracy of the underlying incomplete
// gamma routines (~1e-13 relative per term); quadrature fallback results
// carry the integrator's error estimate instead, flagged by
// `from_quadrature`.
struct MellinValue {
    double lower = 0.0;
    double point = 0.0;
    double upper = 0.0;
    bool met_target = false;
    bool from_quadrature = false;
    int terms_used = 0;
};

// E[(1+snr)^(sigma-1)] for a Rayleigh channel without interferers, average
// SNR avg_snr. Exact closed form, any real sigma in roughly [-140, 10].
double mellin_rayleigh(double avg_snr, double sigma);

// Per-ratio integral
//   R(a) = int_0^inf (1+x)^(sigma-2) e^(-x/avg_snr) / (a+x) dx,
// the building block of the interference transform: with partial-fraction
// weights u_i the base transform is 1 + (sigma-1) sum_i u_i R(a_i).
// Returns a two-sided series enclosure; requires sigma < 2.
MellinValue mellin_term(double ratio, double avg_snr, double sigma,
                        const MellinParams& params = {});
double mellin_term_quadrature(double ratio, double avg_snr, double sigma,
                              double rel_tol = 1e-11);

// Interference-limited counterpart (receiver noise dropped from the SINR
// denominator): R(a) = int_0^inf (1+x)^(sigma-2) / (a+x) dx, sigma < 2.
MellinValue mellin_term_interference_limited(double ratio, double sigma,
                                             const MellinParams& params = {});
double mellin_term_interference_limited_quadrature(double ratio, double sigma,
                                                   double rel_tol = 1e-11);

// Mellin transform M_g(s) = E[g^(s-1)] of the per-slot service factor
// g = (1+snr)^scriptN with scriptN = spec.bandwidth_exponent(). Internally
// evaluates the base SINR transform at sigma = scriptN*(s-1)+1. Without
// interferers this is the exact closed form for any s; with interferers the
// partial-fraction series is used and s must satisfy scriptN*(s-1)+1 < 2.
// When the series enclosure misses the target and `adaptive` is set, falls
// back to direct quadrature of the survival-function form (which never needs
// the partial-fraction weights) and emits TruncationFallback.
MellinValue mellin_service(const ChannelSpec& spec, double s,
                           const MellinParams& params = {},
                           WarningSink* sink = nullptr);
double mellin_service_quadrature(const ChannelSpec& spec, double s,
                                 double rel_tol = 1e-11);

// Interference-limited service transform; requires at least one interferer.
MellinValue mellin_service_interference_limited(const ChannelSpec& spec, double s,
                                                const MellinParams& params = {},
                                                WarningSink* sink = nullptr);
double mellin_service_interference_limited_quadrature(const ChannelSpec& spec, double s,
                                                      double rel_tol = 1e-11);

// Effective capacity -log(M_g(1-s))/s in service units per slot, s > 0.
// Decreasing in s; tends to the average capacity as s -> 0.
double effective_capacity(const ChannelSpec& spec, double s,
                          const MellinParams& params = {},
                          WarningSink* sink = nullptr);

// Mean service per slot, scriptN * int_0^inf survival(x)/(1+x) dx.
double average_capacity(const ChannelSpec& spec, double rel_tol = 1e-11);

} // namespace ifperf
