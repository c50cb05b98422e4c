#pragma once

#include <ifperf/arrivals.hpp>
#include <ifperf/channel.hpp>
#include <ifperf/mellin.hpp>
#include <ifperf/warnings.hpp>

#include <map>
#include <utility>
#include <vector>

namespace ifperf {

// Optimizer and series controls for the delay-violation kernel.
struct BoundParams {
    MellinParams mellin;
    double s_grid_min = 9.5367431640625e-07;  // 2^-20
    double s_grid_max = 64.0;                 // 2^6
    double s_grid_log2_step = 0.5;
    double refine_tol = 1e-3;       // golden-section window width in log2(s)
    double series_rel_tol = 1e-12;  // multi-hop certified tail cutoff
    long long max_series_terms = 10000000;

    void validate() const;
};

// Delay-violation kernel
//   K(s,-w) = sum_{v>=0} e^{rho s v} binom(hops-1+v+w, v+w) M(1-s)^{v+w},
// which collapses to M^w / (1 - e^{rho s} M) for one hop. M is the upper
// enclosure of the service Mellin transform, so the kernel keeps its bound
// character. Transforms are cached per s: sweeping rate or delay against one
// evaluator reuses them. Not thread safe.
class KernelEvaluator {
public:
    explicit KernelEvaluator(ChannelSpec spec, int hops = 1,
                             BoundParams params = {},
                             WarningSink* sink = nullptr);

    // ln of the upper enclosure of M_g(1-s), cached
    double log_service_mellin(double s);

    // ln K(s,-w) at arrival rate rho; +inf when e^{rho s} M(1-s) >= 1, or
    // for multi-hop points so close to that boundary that the series cannot
    // be certified within the term cap (the bound stays valid either way)
    double log_kernel(double s, double rho, int delay_slots);

    // inf_s K over the grid with golden-section refinement, clamped to <= 1;
    // returns exactly 1 when no grid point is stable
    double violation_probability(double rho, int delay_slots);

    // the s achieving that infimum; log_service_mellin at this point is the
    // bound's asymptotic decay of ln(epsilon) per delay slot. NaN when no
    // grid point is stable.
    double optimal_s(double rho, int delay_slots);

    // true when some grid point satisfies e^{rho s} M(1-s) < 1
    bool feasible(double rho);

    // 1 - e^{rho s} M(1-s) from the cached upper enclosure; positive exactly
    // where the kernel converges at this s, so a positive margin certifies
    // stability while a negative one may only reflect enclosure slack
    double stability_margin(double rho, double s);

    // smallest delay whose violation bound is at most epsilon; throws
    // InstabilityError when the rate is outside the stability region
    int delay_bound(double rho, double epsilon);

    // largest rate meeting the (delay_slots, epsilon) target, bisected
    // between zero and the average capacity at 1e-4 of the latter
    double max_rate(int delay_slots, double epsilon);

    const ChannelSpec& spec() const { return spec_; }
    int hops() const { return hops_; }

private:
    // {inf_s ln K, argmin s}; {+inf, NaN} when nothing is stable
    std::pair<double, double> optimize(double rho, int delay_slots);

    ChannelSpec spec_;
    int hops_;
    BoundParams params_;
    WarningSink* sink_;
    std::vector<double> grid_log2_;
    std::map<double, double> log_mellin_;
};

// Stability margin 1 - e^{rate s} M(1-s) at one transform argument. The
// margin is a per-slot condition, so it does not depend on the hop count.
double stability_margin(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                        double s, const BoundParams& params = {},
                        WarningSink* sink = nullptr);

double violation_probability(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                             int delay_slots, int hops = 1,
                             const BoundParams& params = {},
                             WarningSink* sink = nullptr);

// Smallest delay (in slots) whose violation bound is at most epsilon.
// Throws InstabilityError when the rate is outside the stability region.
int delay_bound(const ChannelSpec& spec, const ArrivalSpec& arrivals,
                double epsilon, int hops = 1, const BoundParams& params = {},
                WarningSink* sink = nullptr);

// Largest arrival rate meeting the (delay_slots, epsilon) target, found by
// bisection between zero and the average capacity at a resolution of 1e-4
// of the latter.
double max_rate(const ChannelSpec& spec, int delay_slots, double epsilon,
                int hops = 1, const BoundParams& params = {},
                WarningSink* sink = nullptr);

} // namespace ifperf
