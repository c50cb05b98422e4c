#pragma once

#include <ifperf/config_io.hpp>
#include <ifperf/csv.hpp>
#include <ifperf/warnings.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ifperf {

// Canned parameter studies. Each kind produces one CSV dataset whose rows
// are deterministic given (settings, seed); the companion checker re-derives
// the qualitative claims a dataset is supposed to exhibit, so a regenerated
// file can be validated without reference output.
enum class ExperimentKind {
    EffectiveCapacity,   // transform-domain capacity vs QoS exponent
    DelayVsEpsilon,      // delay bound vs violation target
    DelayVsRate,         // delay bound vs arrival rate
    DelayVsInterferers,  // delay bound vs interferer count
    MaxRateVsSnr,        // largest admissible rate vs mean SNR
    AvgCapVsSnr,         // average capacity vs mean SNR
    Validate,            // analytic bound vs seeded queue simulation
};

const char* kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);  // throws ConfigError
std::vector<ExperimentKind> all_experiment_kinds();

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::EffectiveCapacity;
    std::uint64_t seed = 20250819;  // master seed; only `validate` draws
    long long slots = 10000000;     // simulated slots per scenario
    int threads = 0;                // 0: one worker per hardware thread
    ConfigMap settings;             // kind-specific knobs, defaults fill gaps

    // rejects unknown settings and out-of-range values
    void validate() const;
};

ExperimentConfig default_config(ExperimentKind kind);

// Parse `key = value` experiment text. `kind` must be present in the text
// unless `fallback_kind` supplies it; when both exist they must agree.
ExperimentConfig config_from_text(const std::string& text,
                                  const std::string& source_name = "<config>",
                                  const std::string& fallback_kind = "");

// Runs the configured study. Output is independent of `threads`.
CsvDocument run_experiment(const ExperimentConfig& config,
                           WarningSink* sink = nullptr);

struct CheckItem {
    std::string description;
    bool passed = false;
    std::string detail;  // measured numbers, filled on failure and success
};

struct CheckReport {
    std::string kind;
    std::vector<CheckItem> items;

    bool all_passed() const;
    std::string to_text() const;  // one [PASS]/[FAIL] line per item
};

// Re-derives the dataset's qualitative claims (orderings, monotonicity,
// bound validity against simulated frequencies) from the rows alone.
CheckReport check_reproduction(const CsvDocument& dataset);

} // namespace ifperf
