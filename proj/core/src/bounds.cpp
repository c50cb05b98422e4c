#include <ifperf/bounds.hpp>

#include <ifperf/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ifperf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// binom(hops-1+j, j) * x^j summed over j with x = e^{rho s} M: the terms of
// the multi-hop kernel at fixed w, indexed by the slack v. Everything runs in
// logs; consecutive terms obey the exact ratio
//   t_{v+1}/t_v = x * (hops + v + w) / (v + w + 1),
// which decreases in v, so once the ratio drops below one the remainder is
// dominated by a geometric series and can be certified.
double log_kernel_series(double log_q, double log_m, int hops, int w,
                         double series_rel_tol, long long max_terms) {
    // log_q = rho*s + log_m; caller guarantees log_q < 0
    //
    // The ratio only drops below one after roughly (q*hops-1)/(1-q) terms
    // and then decays no faster than q per step, so points sitting almost
    // on the stability boundary may need more terms than the cap allows.
    // Returning +inf there keeps the bound valid; such points are never
    // the optimizer's pick.
    const double q = std::exp(log_q);
    const double one_minus_q = -std::expm1(log_q);
    const double settle =
        std::max(0.0, (q * hops - 1.0) / one_minus_q - static_cast<double>(w));
    const double decay = 30.0 / one_minus_q;
    if (settle + decay > static_cast<double>(max_terms)) return kInf;

    double running_max = -kInf;
    double scaled_sum = 0.0;  // sum of e^{t_v - running_max}
    const double lg_h = std::lgamma(static_cast<double>(hops));
    for (long long v = 0; v < max_terms; ++v) {
        const double vw = static_cast<double>(v) + static_cast<double>(w);
        const double t = static_cast<double>(v) * (log_q - log_m)
                         + std::lgamma(static_cast<double>(hops) + vw)
                         - std::lgamma(vw + 1.0) - lg_h + vw * log_m;
        if (t <= running_max) {
            scaled_sum += std::exp(t - running_max);
        } else {
            scaled_sum = scaled_sum * std::exp(running_max - t) + 1.0;
            running_max = t;
        }
        const double ratio =
            q * (static_cast<double>(hops) + vw) / (vw + 1.0);
        if (ratio < 1.0) {
            const double term_scaled = std::exp(t - running_max);
            const double tail_scaled = term_scaled * ratio / (1.0 - ratio);
            if (tail_scaled <= series_rel_tol * scaled_sum) {
                scaled_sum += tail_scaled;
                return running_max + std::log(scaled_sum);
            }
        }
    }
    return kInf;
}

} // namespace

void BoundParams::validate() const {
    mellin.validate();
    if (!(s_grid_min > 0.0) || !(s_grid_max > s_grid_min))
        throw std::invalid_argument("kernel s grid must satisfy 0 < min < max");
    if (!(s_grid_log2_step > 0.0))
        throw std::invalid_argument("kernel s grid step must be positive");
    if (!(refine_tol > 0.0))
        throw std::invalid_argument("kernel refine tolerance must be positive");
    if (!(series_rel_tol > 0.0) || series_rel_tol >= 1.0)
        throw std::invalid_argument("kernel series tolerance must lie in (0, 1)");
    if (max_series_terms < 16)
        throw std::invalid_argument("kernel series term cap is too small");
}

KernelEvaluator::KernelEvaluator(ChannelSpec spec, int hops, BoundParams params,
                                 WarningSink* sink)
    : spec_(std::move(spec)), hops_(hops), params_(params), sink_(sink) {
    spec_.validate();
    params_.validate();
    if (hops_ < 1 || hops_ > 10000)
        throw std::invalid_argument("hop count must lie in [1, 10000]");
    const double lo = std::log2(params_.s_grid_min);
    const double hi = std::log2(params_.s_grid_max);
    for (double u = lo; u <= hi + 1e-12; u += params_.s_grid_log2_step)
        grid_log2_.push_back(std::min(u, hi));
}

double KernelEvaluator::log_service_mellin(double s) {
    auto it = log_mellin_.find(s);
    if (it != log_mellin_.end()) return it->second;
    const MellinValue m = mellin_service(spec_, 1.0 - s, params_.mellin, sink_);
    const double lm = std::log(m.upper);
    log_mellin_.emplace(s, lm);
    return lm;
}

double KernelEvaluator::log_kernel(double s, double rho, int delay_slots) {
    if (!(s > 0.0)) throw std::invalid_argument("kernel requires s > 0");
    if (delay_slots < 0)
        throw std::invalid_argument("delay must be nonnegative");
    const double log_m = log_service_mellin(s);
    const double log_q = rho * s + log_m;
    if (!(log_q < 0.0)) return kInf;
    if (hops_ == 1)
        return delay_slots * log_m - std::log1p(-std::exp(log_q));
    return log_kernel_series(log_q, log_m, hops_, delay_slots,
                             params_.series_rel_tol, params_.max_series_terms);
}

std::pair<double, double> KernelEvaluator::optimize(double rho,
                                                    int delay_slots) {
    double best = kInf;
    double best_u = grid_log2_.front();
    for (double u : grid_log2_) {
        const double lk = log_kernel(std::exp2(u), rho, delay_slots);
        if (lk < best) {
            best = lk;
            best_u = u;
        }
    }
    if (!(best < kInf))
        return {kInf, std::numeric_limits<double>::quiet_NaN()};

    // golden-section refinement around the best grid point
    const double gr = 0.6180339887498949;
    double a = std::max(grid_log2_.front(), best_u - params_.s_grid_log2_step);
    double b = std::min(grid_log2_.back(), best_u + params_.s_grid_log2_step);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = log_kernel(std::exp2(c), rho, delay_slots);
    double fd = log_kernel(std::exp2(d), rho, delay_slots);
    if (fc < best) { best = fc; best_u = c; }
    if (fd < best) { best = fd; best_u = d; }
    while (b - a > params_.refine_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = log_kernel(std::exp2(c), rho, delay_slots);
            if (fc < best) { best = fc; best_u = c; }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = log_kernel(std::exp2(d), rho, delay_slots);
            if (fd < best) { best = fd; best_u = d; }
        }
    }
    return {best, std::exp2(best_u)};
}

double KernelEvaluator::violation_probability(double rho, int delay_slots) {
    const double best = optimize(rho, delay_slots).first;
    if (best >= 0.0) return 1.0;
    return std::exp(best);
}

double KernelEvaluator::optimal_s(double rho, int delay_slots) {
    return optimize(rho, delay_slots).second;
}

bool KernelEvaluator::feasible(double rho) {
    for (double u : grid_log2_) {
        const double s = std::exp2(u);
        if (rho * s + log_service_mellin(s) < 0.0) return true;
    }
    return false;
}

double KernelEvaluator::stability_margin(double rho, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("stability margin requires s > 0");
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw ConfigError("arrival rate must be nonnegative and finite");
    // expm1 keeps precision when the margin is tiny on either side of zero
    return -std::expm1(rho * s + log_service_mellin(s));
}

int KernelEvaluator::delay_bound(double rho, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("violation target must lie in (0, 1)");
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw ConfigError("arrival rate must be nonnegative and finite");
    if (!feasible(rho))
        throw InstabilityError(
            "arrival rate is outside the stability region; no finite delay bound");
    int w = 1;
    while (violation_probability(rho, w) > epsilon) {
        if (w > (1 << 26))
            throw ConvergenceError("delay bound exceeds the search cap");
        w *= 2;
    }
    if (w == 1) return 1;
    // invariant: lo fails the target, hi passes it
    int lo = w / 2;
    int hi = w;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (violation_probability(rho, mid) > epsilon)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double KernelEvaluator::max_rate(int delay_slots, double epsilon) {
    if (delay_slots < 0)
        throw std::invalid_argument("delay must be nonnegative");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("violation target must lie in (0, 1)");
    const double hi_cap =
        average_capacity(spec_, params_.mellin.quadrature_rel_tol);
    auto ok = [&](double rho) {
        return violation_probability(rho, delay_slots) <= epsilon;
    };
    if (ok(hi_cap)) return hi_cap;  // cannot happen for a finite target; defensive
    if (!ok(0.0)) return 0.0;
    double lo = 0.0;
    double hi = hi_cap;
    const double tol = 1e-4 * hi_cap;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double stability_margin(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                        double s, const BoundParams& params, WarningSink* sink) {
    arrivals.validate();
    KernelEvaluator ev(spec, 1, params, sink);
    return ev.stability_margin(arrivals.rate, s);
}

double violation_probability(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                             int delay_slots, int hops,
                             const BoundParams& params, WarningSink* sink) {
    arrivals.validate();
    KernelEvaluator ev(spec, hops, params, sink);
    return ev.violation_probability(arrivals.rate, delay_slots);
}

int delay_bound(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                double epsilon, int hops, const BoundParams& params,
                WarningSink* sink) {
    arrivals.validate();
    KernelEvaluator ev(spec, hops, params, sink);
    return ev.delay_bound(arrivals.rate, epsilon);
}

double max_rate(const ChannelSpec& spec, int delay_slots, double epsilon,
                int hops, const BoundParams& params, WarningSink* sink) {
    KernelEvaluator ev(spec, hops, params, sink);
    return ev.max_rate(delay_slots, epsilon);
}

} // namespace ifperf
