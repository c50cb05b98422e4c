#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ifperf/arrivals.hpp"
#include "ifperf/bounds.hpp"
#include "ifperf/channel.hpp"
#include "ifperf/errors.hpp"
#include "ifperf/mellin.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace ifperf;

namespace {

ChannelSpec make_spec(double avg_snr, std::vector<double> ratios,
                      double symbols_per_slot)
{
    ChannelSpec spec;
    spec.avg_snr = avg_snr;
    spec.interferer_ratios = std::move(ratios);
    spec.symbols_per_slot = symbols_per_slot;
    return spec;
}

// Direct log-sum-exp over the kernel series; independent of the streaming
// evaluation and its certified tail.
double brute_log_kernel(double log_m, double s, double rho, int hops, int w,
                        int terms)
{
    const double lg_h = std::lgamma(static_cast<double>(hops));
    std::vector<double> t(static_cast<size_t>(terms));
    double mx = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < terms; ++v) {
        const double vw = static_cast<double>(v) + static_cast<double>(w);
        t[static_cast<size_t>(v)] = v * rho * s
            + std::lgamma(static_cast<double>(hops) + vw)
            - std::lgamma(vw + 1.0) - lg_h + vw * log_m;
        mx = std::max(mx, t[static_cast<size_t>(v)]);
    }
    double sum = 0.0;
    for (double tv : t) sum += std::exp(tv - mx);
    return mx + std::log(sum);
}

// mpmath, 40 digits, exact service transforms
constexpr double kNoiseLogM = -1.2359416447428591;   // ln M(1-s) at s=0.5, snr 10
constexpr double kTwoIntLogM = -0.26451575683067796; // ln M(1-s) at s=0.25, snr 10, ratios {2,4}
constexpr double kNoiseK1 = -11.707307274470339;     // ln K(0.5,-10), rho 1, one hop
constexpr double kNoiseK2 = -9.2291244037340027;     // two hops
constexpr double kNoiseK4 = -5.7951604002704782;     // four hops
constexpr double kTwoIntK1 = -3.2517904217113184;    // ln K(0.25,-20), rho 0.5, one hop
constexpr double kTwoIntK3 = 2.7945330957393716;     // three hops; kernel above one here
constexpr double kNoiseOptRef = -35.796148568941453; // min_s ln K(s,-10) at rho 1, dense s grid

} // namespace

TEST_CASE("arrival envelope matches the constant-rate formula")
{
    ArrivalSpec a;
    a.rate = 2.0;
    CHECK(arrival_mellin(a, 1.0) == 1.0);
    CHECK(std::abs(arrival_mellin(a, 1.5) - std::exp(1.0)) <= 1e-15 * std::exp(1.0));
    CHECK(std::abs(arrival_mellin(a, 0.25) - std::exp(-1.5)) <= 1e-15);
    a.rate = 0.0;
    CHECK(arrival_mellin(a, 7.0) == 1.0);
    CHECK_NOTHROW(a.validate());

    ArrivalSpec bad;
    bad.rate = -0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.rate = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.rate = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("cached service transform matches the frozen values")
{
    KernelEvaluator noise(make_spec(10.0, {}, 1.0));
    CHECK(std::abs(noise.log_service_mellin(0.5) - kNoiseLogM) <= 1e-9);

    KernelEvaluator two(make_spec(10.0, {2.0, 4.0}, 1.0));
    CHECK(std::abs(two.log_service_mellin(0.25) - kTwoIntLogM) <= 5e-9);
}

TEST_CASE("single-hop kernel matches the frozen references")
{
    KernelEvaluator noise(make_spec(10.0, {}, 1.0));
    CHECK(std::abs(noise.log_kernel(0.5, 1.0, 10) - kNoiseK1) <= 1e-6);

    KernelEvaluator two(make_spec(10.0, {2.0, 4.0}, 1.0));
    CHECK(std::abs(two.log_kernel(0.25, 0.5, 20) - kTwoIntK1) <= 1e-6);
}

TEST_CASE("multi-hop kernel matches the frozen references")
{
    const ChannelSpec noise = make_spec(10.0, {}, 1.0);
    KernelEvaluator h2(noise, 2);
    KernelEvaluator h4(noise, 4);
    CHECK(std::abs(h2.log_kernel(0.5, 1.0, 10) - kNoiseK2) <= 1e-6);
    CHECK(std::abs(h4.log_kernel(0.5, 1.0, 10) - kNoiseK4) <= 1e-6);

    KernelEvaluator h3(make_spec(10.0, {2.0, 4.0}, 1.0), 3);
    CHECK(std::abs(h3.log_kernel(0.25, 0.5, 20) - kTwoIntK3) <= 1e-6);
}

TEST_CASE("single-hop kernel agrees with the closed form on an independent transform")
{
    const ChannelSpec spec = make_spec(10.0, {2.0, 4.0}, 1.0);
    KernelEvaluator ev(spec);
    const double s = 0.25;
    const double rho = 0.5;
    const int w = 20;
    const double log_m = std::log(mellin_service_quadrature(spec, 1.0 - s));
    const double manual = w * log_m - std::log1p(-std::exp(rho * s + log_m));
    CHECK(std::abs(ev.log_kernel(s, rho, w) - manual) <= 1e-6);
}

TEST_CASE("multi-hop kernel matches brute-force summation")
{
    const ChannelSpec noise = make_spec(10.0, {}, 1.0);
    KernelEvaluator h2(noise, 2);
    const double lm = h2.log_service_mellin(0.5);
    const double brute = brute_log_kernel(lm, 0.5, 1.0, 2, 10, 4000);
    CHECK(std::abs(h2.log_kernel(0.5, 1.0, 10) - brute) <= 1e-9);

    KernelEvaluator h3(make_spec(10.0, {2.0, 4.0}, 1.0), 3);
    const double lm3 = h3.log_service_mellin(0.25);
    const double brute3 = brute_log_kernel(lm3, 0.25, 0.5, 3, 20, 5000);
    CHECK(std::abs(h3.log_kernel(0.25, 0.5, 20) - brute3) <= 1e-9);

    // one hop: the truncated series must reproduce the geometric closed form
    KernelEvaluator h1(noise);
    const double brute1 = brute_log_kernel(lm, 0.5, 1.0, 1, 10, 4000);
    CHECK(std::abs(h1.log_kernel(0.5, 1.0, 10) - brute1) <= 1e-12);
}

TEST_CASE("kernel reports instability as an infinite value")
{
    KernelEvaluator ev(make_spec(10.0, {}, 1.0));
    // large s: e^{rho s} M(1-s) >> 1
    CHECK(std::isinf(ev.log_kernel(64.0, 1.0, 10)));
    CHECK(ev.log_kernel(64.0, 1.0, 10) > 0.0);
    CHECK_THROWS_AS(ev.log_kernel(0.0, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(ev.log_kernel(0.5, 1.0, -1), std::invalid_argument);
}

TEST_CASE("grid optimizer tracks a dense reference sweep")
{
    KernelEvaluator ev(make_spec(10.0, {}, 1.0));
    const double vp = ev.violation_probability(1.0, 10);
    CHECK(vp > 0.0);
    CHECK(vp < 1.0);
    CHECK(std::abs(std::log(vp) - kNoiseOptRef) <= 5e-3);
    // repeat evaluation hits the transform cache and stays bit-identical
    CHECK(ev.violation_probability(1.0, 10) == vp);

    // dense reference locates the optimum near log2(s) = 1.84
    const double s_star = ev.optimal_s(1.0, 10);
    CHECK(std::abs(std::log2(s_star) - 1.84) <= 0.1);

    // envelope property: the bound's per-slot decay at large delay matches
    // the service transform at the optimizing point
    const double slope = std::log(ev.violation_probability(1.0, 41)) -
                         std::log(ev.violation_probability(1.0, 40));
    const double lm = ev.log_service_mellin(ev.optimal_s(1.0, 40));
    CHECK(std::abs(slope - lm) <= 0.01 * std::abs(lm));

    // infeasible everywhere: no optimizer output
    CHECK(std::isnan(ev.optimal_s(10.0, 10)));
}

TEST_CASE("violation bound is monotone in rate, delay, and hop count")
{
    const ChannelSpec spec = make_spec(10.0, {2.0, 4.0}, 1.0);
    KernelEvaluator ev(spec);

    double prev = 0.0;
    for (double rho : {0.4, 0.7, 1.0}) {
        const double vp = ev.violation_probability(rho, 12);
        CHECK(vp > prev);
        CHECK(vp <= 1.0);
        prev = vp;
    }

    prev = 1.5;
    for (int w : {1, 4, 16, 64}) {
        const double vp = ev.violation_probability(0.7, w);
        CHECK(vp < prev);
        prev = vp;
    }

    prev = 0.0;
    for (int hops : {1, 2, 3, 4}) {
        KernelEvaluator hv(spec, hops);
        const double vp = hv.violation_probability(0.5, 30);
        CHECK(vp >= prev);
        CHECK(vp <= 1.0);
        prev = vp;
    }

    // delay zero can never be met; the bound saturates at one
    CHECK(ev.violation_probability(0.7, 0) == 1.0);
}

TEST_CASE("delay bound is the smallest delay meeting the target")
{
    const ChannelSpec spec = make_spec(10.0, {}, 1.0);
    ArrivalSpec arr;
    arr.rate = 1.7;
    const double eps = 1e-4;
    const int w = delay_bound(spec, arr, eps);
    CHECK(w >= 1);

    KernelEvaluator ev(spec);
    CHECK(ev.violation_probability(arr.rate, w) <= eps);
    if (w > 1) CHECK(ev.violation_probability(arr.rate, w - 1) > eps);

    // tighter target or faster arrivals cannot shorten the bound
    CHECK(delay_bound(spec, arr, 1e-8) >= w);
    ArrivalSpec faster;
    faster.rate = 2.1;
    CHECK(delay_bound(spec, faster, eps) >= w);
    CHECK(delay_bound(spec, arr, eps) == w);
}

TEST_CASE("rates outside the stability region are rejected")
{
    const ChannelSpec spec = make_spec(10.0, {}, 1.0);
    const double cap = average_capacity(spec);
    ArrivalSpec arr;
    arr.rate = 1.1 * cap;
    CHECK(violation_probability(spec, arr, 50) == 1.0);
    CHECK_THROWS_AS(delay_bound(spec, arr, 1e-3), InstabilityError);

    arr.rate = 0.5 * cap;
    CHECK(violation_probability(spec, arr, 40) < 1.0);
    CHECK_THROWS_AS(delay_bound(spec, arr, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(delay_bound(spec, arr, 1.0), std::invalid_argument);
    arr.rate = -1.0;
    CHECK_THROWS_AS(delay_bound(spec, arr, 1e-3), ConfigError);
}

TEST_CASE("stability margin tracks the kernel and the capacity")
{
    const ChannelSpec noise = make_spec(10.0, {}, 1.0);
    const ChannelSpec two = make_spec(10.0, {2.0, 4.0}, 1.0);

    // zero load leaves a positive margin at small s
    CHECK(stability_margin(noise, {0.0}, 0.1) > 0.0);
    CHECK(stability_margin(two, {0.0}, 0.1) > 0.0);

    // overload is negative at every transform argument
    const double cap = average_capacity(two);
    for (double s : {1e-4, 0.01, 0.25, 1.0, 4.0, 32.0})
        CHECK(stability_margin(two, {2.0 * cap}, s) < 0.0);

    KernelEvaluator ev(two, 1);
    const double rho = 0.5 * cap;
    for (double s : {0.05, 0.2, 0.8, 3.0, 12.0}) {
        const double margin = ev.stability_margin(rho, s);
        // agrees with the direct composition of the cached transform
        CHECK(margin ==
              doctest::Approx(1.0 - std::exp(rho * s + ev.log_service_mellin(s)))
                  .epsilon(1e-12));
        // the kernel is finite exactly where the margin is positive
        const bool finite = std::isfinite(ev.log_kernel(s, rho, 5));
        CHECK(finite == (margin > 0.0));
        // continuity: a tiny step in s moves the margin only a little
        CHECK(std::abs(ev.stability_margin(rho, s + 1e-6) - margin) < 1e-4);
    }

    CHECK_THROWS_AS(ev.stability_margin(rho, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ev.stability_margin(-1.0, 0.5), ConfigError);
}

TEST_CASE("max rate saturates the delay target")
{
    const ChannelSpec spec = make_spec(10.0, {}, 1.0);
    const double cap = average_capacity(spec);
    const int w = 10;
    const double eps = 1e-6;
    const double rate = max_rate(spec, w, eps);
    CHECK(rate > 0.0);
    CHECK(rate < cap);

    KernelEvaluator ev(spec);
    CHECK(ev.violation_probability(rate, w) <= eps);
    CHECK(ev.violation_probability(rate + 2e-4 * cap, w) > eps);

    // achievable rate grows with the delay budget and with the target
    CHECK(max_rate(spec, 2, eps) < rate);
    CHECK(max_rate(spec, 32, eps) > rate);
    CHECK(max_rate(spec, w, 1e-2) > rate);

    // the saturating rate meets the delay it was solved for
    ArrivalSpec arr;
    arr.rate = rate;
    CHECK(delay_bound(spec, arr, eps) <= w);
}

TEST_CASE("weaker interference shortens the delay bound")
{
    const ChannelSpec strong = make_spec(10.0, {2.0, 4.0}, 1.0);
    const ChannelSpec weak = make_spec(10.0, {20.0, 40.0}, 1.0);
    ArrivalSpec arr;
    arr.rate = 0.4 * average_capacity(strong);
    const double eps = 1e-3;
    CHECK(delay_bound(weak, arr, eps) <= delay_bound(strong, arr, eps));
}

TEST_CASE("bound parameter and hop validation")
{
    const ChannelSpec spec = make_spec(10.0, {}, 1.0);
    CHECK_THROWS_AS(KernelEvaluator(spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(KernelEvaluator(spec, 10001), std::invalid_argument);

    BoundParams p;
    p.s_grid_min = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.s_grid_max = p.s_grid_min;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.s_grid_log2_step = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.refine_tol = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.series_rel_tol = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.max_series_terms = 8;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS_AS(max_rate(spec, -1, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(max_rate(spec, 10, 0.0), std::invalid_argument);
}
