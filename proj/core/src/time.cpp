#include "rtlat/time.hpp"

#include <cctype>
#include <cstdio>
#include <limits>

namespace rtlat {

TimeNs checked_add(TimeNs a, TimeNs b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a.ns, b.ns, &out)) {
        throw ArithmeticRangeError("time addition overflows 64-bit nanoseconds");
    }
    return TimeNs(out);
}

TimeNs checked_mul(TimeNs a, std::uint64_t k) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a.ns, k, &out)) {
        throw ArithmeticRangeError("time multiplication overflows 64-bit nanoseconds");
    }
    return TimeNs(out);
}

TimeNs parse_duration(const std::string& text) {
    if (text.empty()) throw ValidationError("empty duration");
    std::size_t pos = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw ValidationError("invalid duration: " + text);
    }
    std::string unit = text.substr(pos);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front()))) unit.erase(0, 1);
    if (unit.empty() || unit == "ns") return TimeNs(value);
    if (unit == "us" || unit == "µs" || unit == "μs") return checked_mul(TimeNs(value), 1000);
    if (unit == "ms") return checked_mul(TimeNs(value), 1000000);
    if (unit == "s") return checked_mul(TimeNs(value), 1000000000);
    if (unit == "m" || unit == "min") return checked_mul(TimeNs(value), 60ull * 1000000000);
    throw ValidationError("unknown duration unit '" + unit + "' in: " + text);
}

std::uint64_t to_us_trunc(TimeNs t) { return t.ns / 1000; }

std::string format_duration(TimeNs t) {
    char buf[48];
    if (t.ns % 1000000000ull == 0 && t.ns != 0) {
        std::snprintf(buf, sizeof buf, "%llus", static_cast<unsigned long long>(t.ns / 1000000000ull));
    } else if (t.ns % 1000000ull == 0 && t.ns != 0) {
        std::snprintf(buf, sizeof buf, "%llums", static_cast<unsigned long long>(t.ns / 1000000ull));
    } else if (t.ns % 1000ull == 0 && t.ns != 0) {
        std::snprintf(buf, sizeof buf, "%lluus", static_cast<unsigned long long>(t.ns / 1000ull));
    } else {
        std::snprintf(buf, sizeof buf, "%lluns", static_cast<unsigned long long>(t.ns));
    }
    return buf;
}

void TaskSpec::validate() const {
    if (runtime_budget.ns == 0) {
        throw ValidationError("task '" + name + "': runtime_budget must be > 0");
    }
    if (runtime_budget > deadline) {
        throw ValidationError("task '" + name + "': runtime_budget <= deadline violated");
    }
    if (deadline > period) {
        throw ValidationError("task '" + name + "': deadline <= period violated");
    }
}

TaskSpec TaskSpec::implicit_deadline(std::string name, TimeNs period, TimeNs runtime_budget) {
    TaskSpec t{std::move(name), period, period, runtime_budget};
    t.validate();
    return t;
}

TimeNs completion_time(TimeNs firing_latency, TimeNs runtime_budget) {
    return checked_add(firing_latency, runtime_budget);
}

FeasibilityVerdict check_deadline(const TaskSpec& task, TimeNs firing_latency) {
    task.validate();
    const TimeNs completion = completion_time(firing_latency, task.runtime_budget);
    constexpr std::uint64_t kSignedMax =
        static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (completion.ns > kSignedMax || task.deadline.ns > kSignedMax) {
        throw ArithmeticRangeError("deadline margin exceeds signed 64-bit range");
    }
    FeasibilityVerdict v;
    v.task = task;
    v.firing_latency_used = firing_latency;
    v.completion_time = completion;
    v.feasible = completion <= task.deadline;
    v.margin_ns = static_cast<std::int64_t>(task.deadline.ns) -
                  static_cast<std::int64_t>(completion.ns);
    return v;
}

TimeNs deadline_threshold(TimeNs period) {
    if (period.ns == 0) throw ValidationError("deadline_threshold: period must be > 0");
    return TimeNs(period.ns / 10);
}

}  // namespace rtlat
