#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlat/cpuset.hpp"
#include "rtlat/time.hpp"

namespace rtlat {

// stress-style background pressure: arithmetic spin, allocate/touch/free,
// sync() loops, write/fsync/unlink cycles.
struct LoadSpec {
    int cpu_workers = 0;
    int mem_workers = 0;
    int io_workers = 0;
    int disk_workers = 0;
    std::uint64_t mem_bytes = 256ull << 20;  // per allocation
    std::uint64_t disk_bytes = 1ull << 20;   // per file
    CpuSet cpu_set;                          // empty: unconstrained
    std::optional<TimeNs> duration;          // unset: run until stopped
    std::string scratch_dir = ".";

    void validate() const;
};

struct LoadReport {
    TimeNs duration;
    std::vector<std::uint64_t> cpu_iterations;
    std::vector<std::uint64_t> mem_iterations;
    std::vector<std::uint64_t> io_iterations;
    std::vector<std::uint64_t> disk_iterations;
    std::map<int, double> cpu_utilization;  // per target CPU, 0..1
};

// Per-CPU busy fraction source, reads /proc/stat deltas.
struct CpuTimes {
    std::uint64_t idle = 0;
    std::uint64_t total = 0;
};
std::map<int, CpuTimes> read_cpu_times(const std::string& proc_stat = "/proc/stat");

class LoadHandle {
public:
    LoadHandle(LoadHandle&&) noexcept;
    LoadHandle& operator=(LoadHandle&&) noexcept;
    ~LoadHandle();  // stops if still running

    // Joins all workers, removes scratch files, returns the report.
    // Idempotent: a second stop returns the cached report.
    LoadReport stop();

    bool active() const;

private:
    friend LoadHandle start_load(const LoadSpec&);
    LoadHandle();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

LoadHandle start_load(const LoadSpec& spec);

}  // namespace rtlat
