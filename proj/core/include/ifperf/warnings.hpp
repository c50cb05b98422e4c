#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ifperf {

enum class WarningCode {
    IllConditionedWeights,   // partial-fraction weights lose precision (near-equal ratios)
    TruncationFallback,      // series bracket too loose, switched to quadrature
    SimulationDrainCutoff,   // queue did not fully drain within the drain budget
};

struct Warning {
    WarningCode code;
    std::string message;
};

// Collects warnings emitted by library routines.  Callers that pass a
// nullptr sink simply drop them.
class WarningSink {
public:
    void emit(WarningCode code, std::string message) {
        warnings_.push_back(Warning{code, std::move(message)});
        if (callback_) callback_(warnings_.back());
    }

    const std::vector<Warning>& warnings() const { return warnings_; }
    bool empty() const { return warnings_.empty(); }
    void clear() { warnings_.clear(); }

    // Optionally invoked on every emit, e.g. to log immediately.
    void set_callback(std::function<void(const Warning&)> cb) { callback_ = std::move(cb); }

private:
    std::vector<Warning> warnings_;
    std::function<void(const Warning&)> callback_;
};

inline void warn(WarningSink* sink, WarningCode code, std::string message) {
    if (sink) sink->emit(code, std::move(message));
}

} // namespace ifperf
