#include "ifperf/channel.hpp"

#include "ifperf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ifperf {

void ChannelSpec::validate() const {
    if (!(avg_snr > 0.0) || !std::isfinite(avg_snr)) {
        throw ConfigError("channel: avg_snr must be positive and finite");
    }
    if (!(symbols_per_slot > 0.0) || !std::isfinite(symbols_per_slot)) {
        throw ConfigError("channel: symbols_per_slot must be positive and finite");
    }
    for (double a : interferer_ratios) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw ConfigError("channel: interferer ratios must be positive and finite");
        }
    }
}

double sinr_cdf(const ChannelSpec& spec, double x) {
    if (x <= 0.0) return 0.0;
    double expo = -x / spec.avg_snr;
    for (double a : spec.interferer_ratios) {
        expo -= std::log1p(x / a);
    }
    return -std::expm1(expo);
}

PartialFractionWeights partial_fraction_weights(const ChannelSpec& spec,
                                                WarningSink* sink) {
    const std::vector<double>& a = spec.interferer_ratios;
    const std::size_t n = a.size();
    PartialFractionWeights w;
    w.min_relative_gap = std::numeric_limits<double>::infinity();
    if (n == 0) return w;

    // u_i = prod_s a_s / prod_{t != i} (a_t - a_i), assembled in log
    // magnitude so large interferer counts cannot overflow
    // intermediates.
    double log_num = 0.0;
    for (double as : a) log_num += std::log(as);

    w.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double log_den = 0.0;
        int sign = 1;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == i) continue;
            const double d = a[t] - a[i];
            if (d == 0.0) {
                throw ConfigError("channel: interferer ratios must be pairwise distinct "
                                  "for the partial-fraction form");
            }
            if (d < 0.0) sign = -sign;
            log_den += std::log(std::abs(d));
            w.min_relative_gap = std::min(w.min_relative_gap,
                                          std::abs(d) / std::max(a[t], a[i]));
        }
        w.u[i] = sign * std::exp(log_num - log_den);
        if (!std::isfinite(w.u[i])) {
            throw ConfigError("channel: interferer ratios too close; "
                              "partial-fraction weights overflow");
        }
    }
    if (n == 1) w.min_relative_gap = 1.0;

    if (w.ill_conditioned()) {
        std::ostringstream msg;
        msg << "partial-fraction weights ill-conditioned (closest ratio gap "
            << w.min_relative_gap << " relative); expect precision loss";
        warn(sink, WarningCode::IllConditionedWeights, msg.str());
    }
    return w;
}

SinrSampler::SinrSampler(const ChannelSpec& spec, std::uint64_t seed,
                         std::uint64_t base_stream)
    : signal_(spec.avg_snr, seed, base_stream) {
    interference_.reserve(spec.interferer_ratios.size());
    std::uint64_t stream = base_stream;
    for (double a : spec.interferer_ratios) {
        interference_.emplace_back(spec.avg_snr / a, seed, ++stream);
    }
}

double SinrSampler::next() {
    double denom = 1.0;
    for (ExponentialStream& s : interference_) {
        denom += s.next();
    }
    return signal_.next() / denom;
}

ChannelSpec scenario_to_channel(const ScenarioSpec& scenario) {
    if (!(scenario.avg_snr > 0.0) || !(scenario.avg_sinr > 0.0)) {
        throw ConfigError("scenario: mean SNR and SINR must be positive");
    }
    if (scenario.n_interferers < 0) {
        throw ConfigError("scenario: interferer count cannot be negative");
    }
    ChannelSpec spec;
    spec.avg_snr = scenario.avg_snr;
    spec.symbols_per_slot = scenario.symbols_per_slot;
    if (scenario.n_interferers == 0) {
        if (scenario.avg_sinr != scenario.avg_snr) {
            throw ConfigError("scenario: without interferers the mean SINR "
                              "must equal the mean SNR");
        }
        return spec;
    }
    // Total interference power from gamma_bar = gamma_0 / (1 + P).
    const double total = scenario.avg_snr / scenario.avg_sinr - 1.0;
    if (!(total > 0.0)) {
        throw ConfigError("scenario: mean SINR must be strictly below mean SNR "
                          "when interferers are present");
    }
    const int n = scenario.n_interferers;
    const double eta = scenario.perturbation;
    if (!(eta >= 0.0) || !std::isfinite(eta) ||
        (n > 1 && eta * (n - 1) / 2.0 >= 1.0)) {
        throw ConfigError("scenario: perturbation must keep all powers positive");
    }
    if (n > 1 && eta == 0.0) {
        throw ConfigError("scenario: equal-power interferers need a nonzero "
                          "perturbation to keep the ratios distinct");
    }
    // p_i = (P/n)(1 + eta (i - (n+1)/2)): linear spread, exact sum P.
    spec.interferer_ratios.reserve(n);
    for (int i = 1; i <= n; ++i) {
        const double p = total / n * (1.0 + eta * (i - 0.5 * (n + 1)));
        spec.interferer_ratios.push_back(scenario.avg_snr / p);
    }
    spec.validate();
    return spec;
}

} // namespace ifperf
