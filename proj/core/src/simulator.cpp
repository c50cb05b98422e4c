#include <ifperf/simulator.hpp>

#include <ifperf/errors.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace ifperf {

namespace {

// Lentz continued fraction for the regularized incomplete beta; standard
// even/odd coefficient pairs. Needs x below the (a+1)/(a+b+2) transition,
// which reg_inc_beta arranges via the symmetry.
double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction stalled");
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * betacf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * betacf(b, a, 1.0 - x) / b;
}

[[noreturn]] void throw_unstable(long long slot, long long in_flight,
                                 double backlog) {
    std::ostringstream msg;
    msg << "queue looks unstable: " << in_flight
        << " arrival batches in flight (backlog " << backlog
        << ") at slot " << slot
        << "; the arrival rate likely exceeds the service capacity";
    throw InstabilityError(msg.str());
}

SimOutcome run_core(const SimConfig& cfg, const ServiceSource& capacity) {
    cfg.validate();
    const double rho = cfg.arrivals.rate;
    const int hops = cfg.hops;
    const size_t n_grid = cfg.delay_grid.size();
    const long long max_w = n_grid == 0 ? 0 : cfg.delay_grid.back();

    // Batch k's level is the cumulative external arrival total right after
    // its slot; it has departed the final hop once arrivals minus the total
    // in-flight backlog reaches that level. bucket[j] counts batches whose
    // delay exceeds grid entries 0..j-1 exactly.
    std::deque<double> levels;
    long long head_slot = 0;
    std::vector<long long> bucket(n_grid + 1, 0);

    double arrivals_total = 0.0;
    std::vector<double> backlog(static_cast<size_t>(hops), 0.0);
    double max_backlog = 0.0;

    const long long total = cfg.slots + max_w;
    for (long long t = 0; t < total; ++t) {
        double carry = 0.0;
        if (t < cfg.slots) {
            arrivals_total += rho;
            levels.push_back(arrivals_total);
            if (static_cast<long long>(levels.size()) > cfg.max_in_flight) {
                double q = 0.0;
                for (double b : backlog) q += b;
                throw_unstable(t, static_cast<long long>(levels.size()), q);
            }
            carry = rho;
        }
        double in_flight = 0.0;
        for (int h = 0; h < hops; ++h) {
            const double held = backlog[static_cast<size_t>(h)] + carry;
            const double served = std::min(held, capacity(t, h));
            backlog[static_cast<size_t>(h)] = held - served;
            in_flight += held - served;
            carry = served;
        }
        max_backlog = std::max(max_backlog, in_flight);
        while (!levels.empty() &&
               arrivals_total - levels.front() >= in_flight) {
            const long long wait = t - head_slot;
            const auto it = std::lower_bound(cfg.delay_grid.begin(),
                                             cfg.delay_grid.end(), wait);
            ++bucket[static_cast<size_t>(it - cfg.delay_grid.begin())];
            levels.pop_front();
            ++head_slot;
        }
    }
    // whatever is left waited longer than the whole grid
    bucket[n_grid] += static_cast<long long>(levels.size());

    SimOutcome out;
    out.delay_grid = cfg.delay_grid;
    out.violation_count.resize(n_grid);
    out.violation_freq.resize(n_grid);
    out.ccdf_upper_99.resize(n_grid);
    long long exceeding = bucket[n_grid];
    for (size_t i = n_grid; i-- > 0;) {
        out.violation_count[i] = exceeding;
        out.violation_freq[i] =
            static_cast<double>(exceeding) / static_cast<double>(cfg.slots);
        out.ccdf_upper_99[i] = binomial_upper_confidence(exceeding, cfg.slots);
        exceeding += bucket[i];
    }
    out.max_backlog = max_backlog;
    out.slots_run = cfg.slots;
    return out;
}

} // namespace

void SimConfig::validate() const {
    spec.validate();
    arrivals.validate();
    if (slots < 1) throw ConfigError("simulation needs at least one slot");
    if (hops < 1 || hops > 10000)
        throw ConfigError("hop count must lie in [1, 10000]");
    if (max_in_flight < 1024)
        throw ConfigError("in-flight batch cap is too small to be useful");
    for (size_t i = 0; i < delay_grid.size(); ++i) {
        if (delay_grid[i] < 0)
            throw ConfigError("delay grid entries must be nonnegative");
        if (i > 0 && delay_grid[i] <= delay_grid[i - 1])
            throw ConfigError("delay grid must be strictly ascending");
    }
}

SimOutcome run_queue(const SimConfig& config) {
    config.validate();
    // hop h draws from streams [h*(1+n_i), (h+1)*(1+n_i)): disjoint and
    // reproducible no matter how many hops a run uses
    const std::uint64_t span = config.spec.interferer_ratios.size() + 1;
    std::vector<SinrSampler> samplers;
    samplers.reserve(static_cast<size_t>(config.hops));
    for (int h = 0; h < config.hops; ++h)
        samplers.emplace_back(config.spec, config.seed,
                              static_cast<std::uint64_t>(h) * span);
    const double nb = config.spec.bandwidth_exponent();
    const ServiceSource source = [&](long long, int hop) {
        return nb * std::log1p(samplers[static_cast<size_t>(hop)].next());
    };
    return run_core(config, source);
}

SimOutcome run_queue_with_service(const SimConfig& config,
                                  const ServiceSource& capacity) {
    if (!capacity) throw std::invalid_argument("capacity source is empty");
    return run_core(config, capacity);
}

std::vector<MellinMcEstimate> estimate_mellin_mc(const ChannelSpec& spec,
                                                 const std::vector<double>& s,
                                                 long long n_samples,
                                                 std::uint64_t seed) {
    spec.validate();
    if (n_samples < 2)
        throw std::invalid_argument("transform estimate needs >= 2 samples");
    for (double sv : s)
        if (!(sv <= 1.0))
            throw std::invalid_argument(
                "transform estimate requires s <= 1 for a bounded power");
    SinrSampler sampler(spec, seed);
    std::vector<double> mean(s.size(), 0.0);
    std::vector<double> m2(s.size(), 0.0);
    for (long long i = 0; i < n_samples; ++i) {
        const double lg = std::log1p(sampler.next());
        for (size_t j = 0; j < s.size(); ++j) {
            const double x = std::exp((s[j] - 1.0) * lg);
            const double delta = x - mean[j];
            mean[j] += delta / static_cast<double>(i + 1);
            m2[j] += delta * (x - mean[j]);
        }
    }
    std::vector<MellinMcEstimate> out(s.size());
    for (size_t j = 0; j < s.size(); ++j) {
        out[j].mean = mean[j];
        out[j].std_error = std::sqrt(
            m2[j] / (static_cast<double>(n_samples) *
                     static_cast<double>(n_samples - 1)));
        out[j].samples = n_samples;
    }
    return out;
}

MellinMcEstimate estimate_mellin_mc(const ChannelSpec& spec, double s,
                                    long long n_samples, std::uint64_t seed) {
    return estimate_mellin_mc(spec, std::vector<double>{s}, n_samples,
                              seed)[0];
}

double binomial_upper_confidence(long long successes, long long trials,
                                 double level) {
    if (trials < 1 || successes < 0 || successes > trials)
        throw std::invalid_argument("confidence limit needs 0 <= k <= n");
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("confidence level must lie in (0, 1)");
    if (successes == trials) return 1.0;
    if (successes == 0)
        return -std::expm1(std::log1p(-level) / static_cast<double>(trials));
    // smallest p with P(X <= k; p) = 1 - level, i.e. I_p(k+1, n-k) = level
    const double a = static_cast<double>(successes) + 1.0;
    const double b = static_cast<double>(trials - successes);
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reg_inc_beta(a, b, mid) < level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace ifperf
