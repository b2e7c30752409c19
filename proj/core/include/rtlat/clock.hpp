#pragma once

#include <cstddef>
#include <vector>

#include "rtlat/time.hpp"

namespace rtlat {

// Time source a measurement worker runs against. sleep_until blocks to an
// absolute instant and reports the actual wake time, which is where firing
// latency comes from.
class Clock {
public:
    virtual ~Clock() = default;
    virtual TimeNs now() = 0;
    virtual TimeNs sleep_until(TimeNs deadline) = 0;
};

// CLOCK_MONOTONIC with absolute-time clock_nanosleep.
class MonotonicClock final : public Clock {
public:
    TimeNs now() override;
    TimeNs sleep_until(TimeNs deadline) override;
};

// Deterministic playback clock: each sleep wakes at deadline plus the next
// delay from the trace (cycled when the trace is shorter than the run).
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(std::vector<TimeNs> delays) : delays_(std::move(delays)) {}

    TimeNs now() override { return now_; }
    TimeNs sleep_until(TimeNs deadline) override {
        TimeNs delay;
        if (!delays_.empty()) {
            delay = delays_[index_ % delays_.size()];
            ++index_;
        }
        now_ = checked_add(deadline, delay);
        return now_;
    }

private:
    std::vector<TimeNs> delays_;
    std::size_t index_ = 0;
    TimeNs now_{0};
};

}  // namespace rtlat
