#pragma once

#include <cstdint>
#include <random>

namespace ifperf {

// Deterministic stream-seed derivation.  Mixing the user seed with a
// stream index through SplitMix64 gives independent, reproducible
// per-link generators regardless of how many streams a run uses.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform in [0, 1) with exactly 53 random bits, identical on every
// platform given the same engine state.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Exponential variates via inversion.  log1p(-u) keeps full precision
// near u = 0 and never evaluates log(0) since u < 1.
class ExponentialStream {
public:
    ExponentialStream(double mean, std::uint64_t seed, std::uint64_t stream)
        : mean_(mean), engine_(derive_stream_seed(seed, stream)) {}

    double next() {
        const double u = uniform01(engine_);
        return -mean_ * std::log1p(-u);
    }

    double mean() const { return mean_; }

private:
    double mean_;
    std::mt19937_64 engine_;
};

} // namespace ifperf
