#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlat/clock.hpp"
#include "rtlat/cpuset.hpp"
#include "rtlat/time.hpp"

namespace rtlat {

enum class ClockKind { Monotonic, Simulated };

struct BenchConfig {
    TimeNs interval = TimeNs::from_ms(1);
    std::uint64_t loops = 10'000'000;
    std::optional<int> workers;          // default: one per CPU in cpu_set (1 if empty)
    CpuSet cpu_set;                      // empty: no pinning
    int priority = 98;                   // SCHED_FIFO level for monotonic runs
    ClockKind clock = ClockKind::Monotonic;
    std::vector<TimeNs> simulated_delays;
    TimeNs distribute_offset{0};         // start stagger between workers
    std::uint64_t warmup = 0;            // samples discarded from the front
    bool strict = false;                 // refuse to run degraded

    int effective_workers() const;
    void validate() const;
};

struct SeriesMeta {
    int worker_id = 0;
    int cpu = -1;                        // -1: not pinned
    bool degraded = false;               // ran without RT priority
    TimeNs interval;
    std::uint64_t loops = 0;
    std::uint64_t warmup = 0;
    int priority = 0;
    std::string clock;                   // "monotonic" | "simulated"
    std::uint64_t base_ns = 0;           // reference instant of the schedule
    std::uint64_t last_scheduled_ns = 0; // schedule position after the final loop
    std::string started_at;              // wall clock, empty for simulated runs
    std::string ended_at;
    std::string plan_checksum;           // isolation plan active during capture
    std::string toolkit_version;
    nlohmann::json environment;          // EnvReport snapshot

    nlohmann::json to_json() const;
    static SeriesMeta from_json(const nlohmann::json& j);
    bool operator==(const SeriesMeta&) const;
};

struct SampleSeries {
    SeriesMeta meta;
    std::vector<LatencySample> samples;

    bool operator==(const SampleSeries&) const = default;
};

// Next absolute deadline; increments never accumulate drift.
inline TimeNs schedule_next(TimeNs prev_deadline, TimeNs interval) {
    return checked_add(prev_deadline, interval);
}

// Measurement loop body. Sleeps to each absolute deadline, records
// wake - deadline into the pre-sized buffer. Allocation-free.
// out.size() determines the loop count; returns the schedule position
// after the last iteration.
TimeNs worker_hot_loop(Clock& clock, TimeNs first_deadline, TimeNs interval,
                       std::span<LatencySample> out);

// Runs the configured workers and collects one series per worker.
// Throws PrivilegeError when RT setup fails in strict mode; in relaxed
// mode the series is tagged degraded=true instead.
std::vector<SampleSeries> run_cyclic(const BenchConfig& config);

// Trace file: one duration per line ("10us", "250", ...), '#' comments.
std::vector<TimeNs> load_delay_trace(const std::string& path);

}  // namespace rtlat
