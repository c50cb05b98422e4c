#include <ifperf/mellin.hpp>

#include <ifperf/errors.hpp>
#include <ifperf/gamma.hpp>
#include <ifperf/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifperf {

namespace {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Enclosure of the tiny integral over the strip [z_lo, z_hi] around the
// expansion boundary z = b, where neither geometric series of 1/(b+z)
// converges. f(z) = z^(sigma-2) e^((1-z)*inv_g0) / (b+z) varies by at most
// exp(width * Lambda) with Lambda a bound on |d log f / dz|, so endpoint
// values give rigorous bounds.
Interval strip_envelope(double b, double sigma, double inv_g0,
                        double z_lo, double z_hi)
{
    auto f = [&](double z) {
        return std::exp((sigma - 2.0) * std::log(z) + (1.0 - z) * inv_g0) / (b + z);
    };
    const double w = z_hi - z_lo;
    const double lam = std::abs(sigma - 2.0) / z_lo + inv_g0 + 1.0 / (b + z_lo);
    const double flo = f(z_lo);
    const double fhi = f(z_hi);
    Interval out;
    out.lo = w * std::min(flo, fhi) * std::exp(-w * lam);
    out.hi = w * std::max(flo, fhi) * std::exp(w * lam);
    return out;
}

struct SeriesSetup {
    bool has_head = false;     // expansion piece on [1, b-delta]
    bool alternating = true;   // tail series sign pattern; head always alternates
    double tail_ratio = 0.0;   // bound on t_{n+1}/t_n when !alternating
    std::function<double(int)> head_term;   // term magnitudes, all positive
    std::function<double(int)> tail_term;
    Interval strip;
};

// Shared driver: accumulates both sub-series in lockstep and maintains a
// two-sided enclosure. Alternating series with decreasing terms bracket via
// partial sums (even-index terms close an upper bound, odd a lower); the
// all-positive case bounds its remainder by the geometric tail
// t_n * r / (1 - r). Adaptive growth fits a power law to the width between
// checkpoints and bails out when the projected order exceeds the cap.
MellinValue run_bracket_series(const SeriesSetup& sp, const MellinParams& pr)
{
    const double inf = std::numeric_limits<double>::infinity();
    double head_sum = 0.0;
    double tail_sum = 0.0;
    Interval head{0.0, sp.has_head ? inf : 0.0};
    Interval tail{0.0, inf};

    const int k0 = std::max(2, pr.truncation_order);
    const int kmax = std::max(k0, pr.max_truncation_order);
    int next_check = k0;
    int n = 0;
    double prev_width = -1.0;
    int prev_k = 0;
    bool met = false;

    while (n < kmax) {
        const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        double cn = 0.0;
        if (sp.has_head) {
            cn = sp.head_term(n);
            head_sum += sgn * cn;
            (n % 2 == 0 ? head.hi : head.lo) = head_sum;
        }
        const double tn = sp.tail_term(n);
        if (sp.alternating) {
            tail_sum += sgn * tn;
            (n % 2 == 0 ? tail.hi : tail.lo) = tail_sum;
        } else {
            tail_sum += tn;
            tail.lo = tail_sum;
            tail.hi = tail_sum + tn * sp.tail_ratio / (1.0 - sp.tail_ratio);
        }
        ++n;

        // terms decrease monotonically, so two consecutive zeros end the series
        if (cn == 0.0 && tn == 0.0 && n >= 2) break;

        if (n == next_check || n == kmax) {
            const double lo = head.lo + sp.strip.lo + tail.lo;
            const double hi = head.hi + sp.strip.hi + tail.hi;
            const double width = hi - lo;
            const double point = 0.5 * (lo + hi);
            const double target =
                pr.bracket_rel_target * std::max(std::abs(point), 1e-300);
            if (width <= target) {
                met = true;
                break;
            }
            if (!pr.adaptive || n >= kmax) break;
            if (prev_width > 0.0 && width > 0.0 && width < prev_width) {
                double p = std::log(prev_width / width) /
                           std::log(static_cast<double>(n) / prev_k);
                p = std::clamp(p, 0.5, 60.0);
                const double needed =
                    n * std::pow(width / target, 1.0 / p);
                if (needed > static_cast<double>(kmax)) break;
            }
            prev_width = width;
            prev_k = n;
            next_check = std::min(2 * next_check, kmax);
        }
    }

    MellinValue out;
    out.lower = head.lo + sp.strip.lo + tail.lo;
    out.upper = head.hi + sp.strip.hi + tail.hi;
    out.point = 0.5 * (out.lower + out.upper);
    const double target =
        pr.bracket_rel_target * std::max(std::abs(out.point), 1e-300);
    out.met_target = met || (out.upper - out.lower) <= target;
    out.terms_used = n;
    return out;
}

// Enclosure of R = int_1^inf z^(sigma-2) w(z) / (b+z) dz with weight
// w(z) = e^((1-z)*inv_g0) (inv_g0 = 0 drops the noise term). Expands
// 1/(b+z) geometrically on either side of z = b, leaving a strip of width
// 2*delta around the boundary that is bounded directly.
MellinValue bracket_ratio_integral(double ratio, double sigma, double inv_g0,
                                   const MellinParams& params)
{
    const double b = ratio - 1.0;
    const double delta = params.split_width;

    const bool has_strip = (b + delta > 1.0);
    const double zp = has_strip ? b + delta : 1.0;
    const bool has_head = (b - delta > 1.0);

    SeriesSetup sp;
    sp.has_head = has_head;
    sp.alternating = (b > 0.0);
    if (has_strip) {
        sp.strip = strip_envelope(b, sigma, inv_g0, std::max(1.0, b - delta), zp);
    }

    const double log_zp = std::log(zp);
    const double log_ratio = std::log(std::abs(b) / zp);
    if (!sp.alternating) sp.tail_ratio = std::abs(b) / zp;

    if (inv_g0 > 0.0) {
        const double log_g0 = -std::log(inv_g0);
        if (has_head) {
            const double log_b = std::log(b);
            const double x1 = inv_g0;
            const double x2 = (b - delta) * inv_g0;
            sp.head_term = [=](int n) {
                const double p = sigma + n - 1.0;
                return std::exp(inv_g0 + log_gamma_difference(p, x1, x2) +
                                p * log_g0 - (n + 1.0) * log_b);
            };
        }
        sp.tail_term = [=](int n) {
            const double g =
                scaled_upper_incomplete_gamma(sigma - 2.0 - n, zp * inv_g0);
            return std::exp(n * log_ratio + (sigma - 2.0) * log_zp +
                            (1.0 - zp) * inv_g0) * g;
        };
    } else {
        if (has_head) {
            const double log_b = std::log(b);
            const double L = std::log(b - delta);
            sp.head_term = [=](int n) {
                const double m = sigma - 1.0 + n;
                const double mL = m * L;
                if (mL > 700.0)
                    return std::exp(mL - std::log(m) - (n + 1.0) * log_b);
                const double q = (std::abs(m) < 1e-15) ? L : std::expm1(mL) / m;
                return q * std::exp(-(n + 1.0) * log_b);
            };
        }
        sp.tail_term = [=](int n) {
            return std::exp(n * log_ratio + (sigma - 2.0) * log_zp) /
                   (n + 2.0 - sigma);
        };
    }

    return run_bracket_series(sp, params);
}

struct LadderResult {
    double value = 0.0;
    double error = 0.0;
};

// Integrates a positive nonincreasing f over [0, inf) by dyadic pieces
// starting at scale/1024, stopping once tail_bound(c) >= int_c^inf f is
// negligible. Piece tolerances follow the sup-bound f(lo)*width so that tiny
// pieces are not asked for more relative accuracy than the estimator floor
// supports.
LadderResult integrate_decreasing(const std::function<double(double)>& f,
                                  double scale,
                                  const std::function<double(double)>& tail_bound,
                                  double rel_tol)
{
    LadderResult out;
    double lo = 0.0;
    double hi = scale / 1024.0;
    double max_bound = 0.0;
    for (int piece = 0; piece < 2000; ++piece) {
        const double bound = f(lo) * (hi - lo);
        max_bound = std::max(max_bound, bound);
        if (bound > 1e-17 * max_bound) {
            QuadratureSpec qs;
            qs.rel_tol = std::max(rel_tol, 1e-15 * max_bound / bound);
            qs.abs_tol = 1e-16 * max_bound;
            qs.max_subdivisions = 4096;
            const auto r = integrate_adaptive(f, lo, hi, qs);
            out.value += r.value;
            out.error += r.error_estimate;
        } else {
            out.error += bound;
        }
        const double tb = tail_bound(hi);
        if (tb <= std::max(rel_tol * 0.05 * out.value, 1e-300)) {
            out.error += tb;
            return out;
        }
        lo = hi;
        hi *= 2.0;
    }
    throw QuadratureError("tail bound did not become negligible within the piece budget");
}

double sigma_of(const ChannelSpec& spec, double s)
{
    return spec.bandwidth_exponent() * (s - 1.0) + 1.0;
}

void require_sigma_below_two(double sigma)
{
    if (!(sigma < 2.0))
        throw std::domain_error(
            "interference transform needs sigma < 2, got sigma = " +
            std::to_string(sigma));
}

void check_ratio_snr(double ratio, double avg_snr)
{
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw std::domain_error("interferer ratio must be positive and finite");
    if (!(avg_snr > 0.0) || !std::isfinite(avg_snr))
        throw std::domain_error("average SNR must be positive and finite");
}

Interval scale_interval(Interval v, double c)
{
    if (c >= 0.0) return {c * v.lo, c * v.hi};
    return {c * v.hi, c * v.lo};
}

// Combines per-ratio enclosures into 1 + (sigma-1) * sum_i u_i R_i.
MellinValue combine_terms(const std::vector<double>& weights,
                          const std::vector<MellinValue>& terms,
                          double sigma, double rel_target)
{
    Interval acc{0.0, 0.0};
    double point_sum = 0.0;
    int max_terms = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const Interval w =
            scale_interval({terms[i].lower, terms[i].upper}, weights[i]);
        acc.lo += w.lo;
        acc.hi += w.hi;
        point_sum += weights[i] * terms[i].point;
        max_terms = std::max(max_terms, terms[i].terms_used);
    }
    const Interval t = scale_interval(acc, sigma - 1.0);
    MellinValue out;
    out.lower = 1.0 + t.lo;
    out.upper = 1.0 + t.hi;
    out.point = 1.0 + (sigma - 1.0) * point_sum;
    out.terms_used = max_terms;
    const double width = out.upper - out.lower;
    out.met_target = width <= 10.0 * rel_target * std::max(std::abs(out.point), 1e-300);
    return out;
}

// Direct quadrature of 1 + (sigma-1) int (1+x)^(sigma-2) survival(x) dx.
// Works straight from the survival function, so it needs no partial-fraction
// weights and stays stable for near-equal ratios.
double survival_transform_quadrature(const ChannelSpec& spec, double sigma,
                                     bool with_noise, double rel_tol)
{
    const double g0 = spec.avg_snr;
    const auto& ratios = spec.interferer_ratios;
    const double rt = std::max(rel_tol, 1e-11);

    auto log_survival = [&](double x) {
        double ls = with_noise ? -x / g0 : 0.0;
        for (double a : ratios) ls -= std::log1p(x / a);
        return ls;
    };
    auto f = [&](double x) {
        return std::exp((sigma - 2.0) * std::log1p(x) + log_survival(x));
    };

    double scale = std::min(1.0, with_noise ? g0 : 1.0);
    for (double a : ratios) scale = std::min(scale, a);

    std::function<double(double)> tail;
    if (with_noise) {
        tail = [=](double X) {
            return std::exp((sigma - 2.0) * std::log1p(X) - X / g0) * g0;
        };
    } else {
        const double amin = *std::min_element(ratios.begin(), ratios.end());
        // for x >= max(1, X): a/(a+x) <= 2a/(1+x) and the rest <= 1
        tail = [=](double X) {
            if (X < 1.0) return std::numeric_limits<double>::infinity();
            return 2.0 * amin * std::exp((sigma - 2.0) * std::log1p(X)) / (2.0 - sigma);
        };
    }

    const auto r = integrate_decreasing(f, scale, tail, rt);
    if (r.error > 20.0 * rt * std::max(std::abs(r.value), 1e-300))
        throw QuadratureError("survival transform quadrature error above tolerance");
    return 1.0 + (sigma - 1.0) * r.value;
}

MellinValue quadrature_fallback(const ChannelSpec& spec, double sigma,
                                bool with_noise, const MellinParams& params,
                                const MellinValue& series,
                                WarningSink* sink)
{
    warn(sink, WarningCode::TruncationFallback,
         "series enclosure stalled at " + std::to_string(series.terms_used) +
             " terms; switching to survival-function quadrature");
    const double q = survival_transform_quadrature(spec, sigma, with_noise,
                                                   params.quadrature_rel_tol);
    const double margin =
        std::max(10.0 * params.quadrature_rel_tol, 1e-12) * std::abs(q);
    MellinValue out;
    out.lower = q - margin;
    out.point = q;
    out.upper = q + margin;
    out.met_target = true;
    out.from_quadrature = true;
    out.terms_used = series.terms_used;
    return out;
}

MellinValue service_transform(const ChannelSpec& spec, double s, bool with_noise,
                              const MellinParams& params, WarningSink* sink)
{
    spec.validate();
    params.validate();
    const double sigma = sigma_of(spec, s);

    if (spec.interferer_ratios.empty()) {
        if (!with_noise)
            throw std::domain_error(
                "interference-limited transform needs at least one interferer");
        const double v = mellin_rayleigh(spec.avg_snr, sigma);
        const double margin = 1e-10 * std::abs(v);
        return MellinValue{v - margin, v, v + margin, true, false, 0};
    }

    require_sigma_below_two(sigma);
    const auto pf = partial_fraction_weights(spec, sink);

    std::vector<MellinValue> terms;
    terms.reserve(pf.u.size());
    for (double a : spec.interferer_ratios) {
        terms.push_back(with_noise
                            ? mellin_term(a, spec.avg_snr, sigma, params)
                            : mellin_term_interference_limited(a, sigma, params));
    }
    MellinValue combined =
        combine_terms(pf.u, terms, sigma, params.bracket_rel_target);
    if (combined.met_target || !params.adaptive) return combined;
    return quadrature_fallback(spec, sigma, with_noise, params, combined, sink);
}

} // namespace

void MellinParams::validate() const
{
    if (truncation_order < 2)
        throw std::invalid_argument("truncation_order must be at least 2");
    if (max_truncation_order < truncation_order)
        throw std::invalid_argument("max_truncation_order below truncation_order");
    if (!(split_width > 0.0) || !(split_width <= 0.2))
        throw std::invalid_argument("split_width must lie in (0, 0.2]");
    if (!(bracket_rel_target > 0.0) || !(bracket_rel_target < 1.0))
        throw std::invalid_argument("bracket_rel_target must lie in (0, 1)");
    if (!(quadrature_rel_tol > 0.0))
        throw std::invalid_argument("quadrature_rel_tol must be positive");
}

double mellin_rayleigh(double avg_snr, double sigma)
{
    if (!(avg_snr > 0.0) || !std::isfinite(avg_snr))
        throw std::domain_error("average SNR must be positive and finite");
    return scaled_upper_incomplete_gamma(sigma, 1.0 / avg_snr) / avg_snr;
}

MellinValue mellin_term(double ratio, double avg_snr, double sigma,
                        const MellinParams& params)
{
    check_ratio_snr(ratio, avg_snr);
    require_sigma_below_two(sigma);
    params.validate();
    if (ratio == 1.0) {
        // b = 0: R = e^(1/g0) g0^(sigma-2) Gamma(sigma-2, 1/g0), which is the
        // scaled upper gamma at 1/g0 exactly.
        const double v = scaled_upper_incomplete_gamma(sigma - 2.0, 1.0 / avg_snr);
        const double margin = 1e-10 * std::abs(v);
        return MellinValue{v - margin, v, v + margin, true, false, 0};
    }
    return bracket_ratio_integral(ratio, sigma, 1.0 / avg_snr, params);
}

double mellin_term_quadrature(double ratio, double avg_snr, double sigma,
                              double rel_tol)
{
    check_ratio_snr(ratio, avg_snr);
    require_sigma_below_two(sigma);
    const double rt = std::max(rel_tol, 1e-11);
    const double a = ratio;
    const double g0 = avg_snr;
    auto f = [=](double x) {
        return std::exp((sigma - 2.0) * std::log1p(x) - x / g0) / (a + x);
    };
    auto tail = [=](double X) {
        return std::exp((sigma - 2.0) * std::log1p(X) - X / g0) * g0 / (a + X);
    };
    const auto r = integrate_decreasing(f, std::min({1.0, a, g0}), tail, rt);
    if (r.error > 20.0 * rt * std::max(std::abs(r.value), 1e-300))
        throw QuadratureError("ratio integral quadrature error above tolerance");
    return r.value;
}

MellinValue mellin_term_interference_limited(double ratio, double sigma,
                                             const MellinParams& params)
{
    check_ratio_snr(ratio, 1.0);
    require_sigma_below_two(sigma);
    params.validate();
    if (ratio == 1.0) {
        const double v = 1.0 / (2.0 - sigma);
        return MellinValue{v, v, v, true, false, 0};
    }
    return bracket_ratio_integral(ratio, sigma, 0.0, params);
}

double mellin_term_interference_limited_quadrature(double ratio, double sigma,
                                                   double rel_tol)
{
    check_ratio_snr(ratio, 1.0);
    require_sigma_below_two(sigma);
    const double rt = std::max(rel_tol, 1e-11);
    const double b = ratio - 1.0;

    // After z = 1+x and v = 1/z the integral becomes
    // int_0^1 v^(1-sigma) / (1+b v) dv; the endpoint piece [0, h] is summed
    // as a geometric series (|b| h <= 1/2), the rest is smooth quadrature.
    const double h = std::min(0.5, 0.5 / (1.0 + std::abs(b)));
    double head = 0.0;
    double hp = std::pow(h, 2.0 - sigma);
    double bj = 1.0;
    for (int j = 0; j < 200; ++j) {
        const double term = bj * hp / (2.0 - sigma + j);
        head += term;
        if (std::abs(term) <= 1e-16 * std::abs(head)) break;
        bj *= -b;
        hp *= h;
    }

    auto f = [=](double v) {
        return std::exp((1.0 - sigma) * std::log(v)) / (1.0 + b * v);
    };
    double value = head;
    double err = 0.0;
    double lo = h;
    while (lo < 1.0) {
        const double hi = std::min(1.0, 2.0 * lo);
        QuadratureSpec qs;
        qs.rel_tol = rt;
        qs.max_subdivisions = 4096;
        const auto r = integrate_adaptive(f, lo, hi, qs);
        value += r.value;
        err += r.error_estimate;
        lo = hi;
    }
    if (err > 20.0 * rt * std::max(std::abs(value), 1e-300))
        throw QuadratureError("ratio integral quadrature error above tolerance");
    return value;
}

MellinValue mellin_service(const ChannelSpec& spec, double s,
                           const MellinParams& params, WarningSink* sink)
{
    return service_transform(spec, s, true, params, sink);
}

double mellin_service_quadrature(const ChannelSpec& spec, double s, double rel_tol)
{
    spec.validate();
    const double sigma = sigma_of(spec, s);
    if (spec.interferer_ratios.empty())
        return mellin_rayleigh(spec.avg_snr, sigma);
    require_sigma_below_two(sigma);
    return survival_transform_quadrature(spec, sigma, true, rel_tol);
}

MellinValue mellin_service_interference_limited(const ChannelSpec& spec, double s,
                                                const MellinParams& params,
                                                WarningSink* sink)
{
    return service_transform(spec, s, false, params, sink);
}

double mellin_service_interference_limited_quadrature(const ChannelSpec& spec,
                                                      double s, double rel_tol)
{
    spec.validate();
    if (spec.interferer_ratios.empty())
        throw std::domain_error(
            "interference-limited transform needs at least one interferer");
    const double sigma = sigma_of(spec, s);
    require_sigma_below_two(sigma);
    return survival_transform_quadrature(spec, sigma, false, rel_tol);
}

double effective_capacity(const ChannelSpec& spec, double s,
                          const MellinParams& params, WarningSink* sink)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::domain_error("effective capacity needs s > 0");
    const MellinValue m = mellin_service(spec, 1.0 - s, params, sink);
    return -std::log(m.point) / s;
}

double average_capacity(const ChannelSpec& spec, double rel_tol)
{
    spec.validate();
    const double g0 = spec.avg_snr;
    const auto& ratios = spec.interferer_ratios;
    const double rt = std::max(rel_tol, 1e-11);

    auto f = [&](double x) {
        double ls = -x / g0 - std::log1p(x);
        for (double a : ratios) ls -= std::log1p(x / a);
        return std::exp(ls);
    };
    auto tail = [=](double X) { return g0 * std::exp(-X / g0) / (1.0 + X); };

    double scale = std::min(1.0, g0);
    for (double a : ratios) scale = std::min(scale, a);

    const auto r = integrate_decreasing(f, scale, tail, rt);
    if (r.error > 20.0 * rt * std::max(std::abs(r.value), 1e-300))
        throw QuadratureError("average capacity quadrature error above tolerance");
    return spec.bandwidth_exponent() * r.value;
}

} // namespace ifperf
