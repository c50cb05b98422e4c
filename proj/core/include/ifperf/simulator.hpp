#pragma once

#include <ifperf/arrivals.hpp>
#include <ifperf/channel.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace ifperf {

// One seeded FIFO queue run (a tandem of queues when hops > 1).
struct SimConfig {
    ChannelSpec spec;
    ArrivalSpec arrivals;
    long long slots = 1;
    std::uint64_t seed = 1;
    std::vector<int> delay_grid;  // slots; strictly ascending, nonnegative
    int hops = 1;
    // in-flight batch cap; exceeding it aborts the run as unstable
    long long max_in_flight = 1LL << 22;

    void validate() const;
};

struct SimOutcome {
    std::vector<int> delay_grid;          // echoed from the config
    std::vector<long long> violation_count;
    std::vector<double> violation_freq;   // empirical Pr[W > w]
    std::vector<double> ccdf_upper_99;    // one-sided 99% binomial upper limit
    double max_backlog = 0.0;             // largest end-of-slot total backlog
    long long slots_run = 0;
};

// Capacity of hop `hop` in slot `slot`, in the units of the arrival rate.
// Called exactly once per (slot, hop), slot-major, hops in order.
using ServiceSource = std::function<double(long long slot, int hop)>;

// Fluid FIFO queue: each slot adds `rate` to the backlog, then each hop in
// turn serves min(backlog, capacity) and forwards within the same slot.
// The delay of slot t's arrival batch is the number of extra slots until
// the final hop's cumulative departures cover the batch (0 when it clears
// in its own slot); after the last arrival the run drains just long enough
// to classify every batch against the delay grid. The queue starts empty,
// which biases delays low, so bound-versus-simulation checks stay
// conservative. Throws InstabilityError when the in-flight cap is hit.
SimOutcome run_queue(const SimConfig& config);

// Same queue with an injected capacity sequence instead of sampled fading.
// config.seed and config.spec's fading distribution are ignored.
SimOutcome run_queue_with_service(const SimConfig& config,
                                  const ServiceSource& capacity);

struct MellinMcEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long samples = 0;
};

// Sample mean and standard error of (1+SINR)^{s-1}. Requires s <= 1 so the
// power is bounded and the variance finite. The vector overload reuses one
// set of SINR draws for every transform argument.
MellinMcEstimate estimate_mellin_mc(const ChannelSpec& spec, double s,
                                    long long n_samples, std::uint64_t seed);
std::vector<MellinMcEstimate> estimate_mellin_mc(const ChannelSpec& spec,
                                                 const std::vector<double>& s,
                                                 long long n_samples,
                                                 std::uint64_t seed);

// One-sided upper confidence limit for a binomial proportion after
// observing `successes` out of `trials` (Clopper-Pearson).
double binomial_upper_confidence(long long successes, long long trials,
                                 double level = 0.99);

} // namespace ifperf
