#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "rtlat/errors.hpp"

namespace rtlat {

// Non-negative time span or instant in integer nanoseconds.
// All internal time is ns; microseconds appear only when rendering.
struct TimeNs {
    std::uint64_t ns = 0;

    constexpr TimeNs() = default;
    constexpr explicit TimeNs(std::uint64_t v) : ns(v) {}

    static constexpr TimeNs from_us(std::uint64_t us) { return TimeNs(us * 1000ull); }
    static constexpr TimeNs from_ms(std::uint64_t ms) { return TimeNs(ms * 1000000ull); }
    static constexpr TimeNs from_s(std::uint64_t s) { return TimeNs(s * 1000000000ull); }

    constexpr auto operator<=>(const TimeNs&) const = default;
};

// Throws ArithmeticRangeError instead of wrapping.
TimeNs checked_add(TimeNs a, TimeNs b);
TimeNs checked_mul(TimeNs a, std::uint64_t k);

// Parses "500ns", "10us", "10µs", "1ms", "5s" or a bare ns count.
TimeNs parse_duration(const std::string& text);

// Integer µs, truncated toward zero (Table-style rendering).
std::uint64_t to_us_trunc(TimeNs t);

// Human rendering: picks ns/µs/ms/s with exact integer value where possible.
std::string format_duration(TimeNs t);

// The Eq.-style task tuple: period p, relative deadline d, runtime budget r.
struct TaskSpec {
    std::string name;
    TimeNs period;
    TimeNs deadline;
    TimeNs runtime_budget;

    // Throws ValidationError naming the violated inequality of
    // 0 < runtime_budget <= deadline <= period.
    void validate() const;

    // Implicit-deadline convention: d = p.
    static TaskSpec implicit_deadline(std::string name, TimeNs period, TimeNs runtime_budget);
};

struct LatencySample {
    std::uint64_t seq = 0;   // iteration index, strictly increasing in a series
    TimeNs latency;          // firing/wake-up latency

    constexpr bool operator==(const LatencySample&) const = default;
};

struct FeasibilityVerdict {
    TaskSpec task;
    TimeNs firing_latency_used;
    TimeNs completion_time;  // firing latency + runtime budget
    bool feasible = false;
    std::int64_t margin_ns = 0;  // deadline - completion, negative on a miss
};

// completion = f + r, exact integer ns. Throws ArithmeticRangeError on overflow.
TimeNs completion_time(TimeNs firing_latency, TimeNs runtime_budget);

// Verdict for one task against a measured firing latency.
// Throws ValidationError if the task is malformed.
FeasibilityVerdict check_deadline(const TaskSpec& task, TimeNs firing_latency);

// Maximum acceptable firing latency for a cycle: period / 10,
// integer division, rounded toward zero. Requires period > 0.
TimeNs deadline_threshold(TimeNs period);

}  // namespace rtlat
