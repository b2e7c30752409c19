#include "rtlat/loadgen.hpp"

#include <pthread.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace rtlat {

void LoadSpec::validate() const {
    if (cpu_workers < 0 || mem_workers < 0 || io_workers < 0 || disk_workers < 0) {
        throw ValidationError("load: worker counts must be >= 0");
    }
    if (cpu_workers + mem_workers + io_workers + disk_workers == 0) {
        throw ValidationError("load: at least one worker kind must be > 0");
    }
    if (mem_workers > 0 && mem_bytes == 0) {
        throw ValidationError("load: mem_bytes must be > 0");
    }
    if (disk_workers > 0 && disk_bytes == 0) {
        throw ValidationError("load: disk_bytes must be > 0");
    }
    if (disk_workers > 0) {
        if (!fs::is_directory(scratch_dir)) {
            throw ValidationError("load: scratch dir does not exist: " + scratch_dir);
        }
        const std::string probe = scratch_dir + "/.rtlat-probe";
        std::ofstream out(probe);
        if (!out) throw ValidationError("load: scratch dir not writable: " + scratch_dir);
        out.close();
        fs::remove(probe);
    }
}

std::map<int, CpuTimes> read_cpu_times(const std::string& proc_stat) {
    std::map<int, CpuTimes> out;
    std::ifstream in(proc_stat);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("cpu", 0) != 0 || line.size() < 4 || !std::isdigit(line[3])) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        const int cpu = std::stoi(tag.substr(3));
        std::uint64_t v, total = 0, idle = 0;
        int field = 0;
        while (ls >> v) {
            total += v;
            if (field == 3 || field == 4) idle += v;  // idle + iowait
            ++field;
        }
        out[cpu] = CpuTimes{idle, total};
    }
    return out;
}

namespace {

void pin_to_set(const CpuSet& set) {
    if (set.empty()) return;
    cpu_set_t mask;
    CPU_ZERO(&mask);
    for (int c : set.cpus()) CPU_SET(c, &mask);
    pthread_setaffinity_np(pthread_self(), sizeof mask, &mask);
}

// xorshift64*; the loop must stay syscall-free
inline std::uint64_t next_rand(std::uint64_t& state) {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1Dull;
}

}  // namespace

struct LoadHandle::Impl {
    LoadSpec spec;
    std::atomic<bool> stop_flag{false};
    std::vector<std::thread> threads;
    std::vector<std::atomic<std::uint64_t>> cpu_iters, mem_iters, io_iters, disk_iters;
    std::vector<std::string> scratch_files;
    std::map<int, CpuTimes> times_before;
    std::chrono::steady_clock::time_point started;
    bool stopped = false;
    LoadReport cached;

    explicit Impl(const LoadSpec& s)
        : spec(s),
          cpu_iters(static_cast<std::size_t>(s.cpu_workers)),
          mem_iters(static_cast<std::size_t>(s.mem_workers)),
          io_iters(static_cast<std::size_t>(s.io_workers)),
          disk_iters(static_cast<std::size_t>(s.disk_workers)) {}

    bool should_run(std::chrono::steady_clock::time_point deadline) const {
        if (stop_flag.load(std::memory_order_relaxed)) return false;
        if (spec.duration && std::chrono::steady_clock::now() >= deadline) return false;
        return true;
    }

    void start() {
        times_before = read_cpu_times();
        started = std::chrono::steady_clock::now();
        auto deadline = started;
        if (spec.duration) {
            deadline += std::chrono::nanoseconds(spec.duration->ns);
        } else {
            deadline = std::chrono::steady_clock::time_point::max();
        }

        for (int i = 0; i < spec.cpu_workers; ++i) {
            threads.emplace_back([this, i, deadline] {
                pin_to_set(spec.cpu_set);
                std::uint64_t rng = 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(i);
                volatile double sink = 0;
                while (should_run(deadline)) {
                    for (int k = 0; k < 4096; ++k) {
                        sink = sink + std::sqrt(static_cast<double>(next_rand(rng) >> 11));
                    }
                    cpu_iters[static_cast<std::size_t>(i)].fetch_add(
                        1, std::memory_order_relaxed);
                }
            });
        }

        for (int i = 0; i < spec.mem_workers; ++i) {
            threads.emplace_back([this, i, deadline] {
                pin_to_set(spec.cpu_set);
                const std::size_t bytes = spec.mem_bytes;
                while (should_run(deadline)) {
                    // allocate, touch every page, free
                    char* block = static_cast<char*>(std::malloc(bytes));
                    if (block) {
                        for (std::size_t off = 0; off < bytes; off += 4096) block[off] = 1;
                        std::free(block);
                    }
                    mem_iters[static_cast<std::size_t>(i)].fetch_add(
                        1, std::memory_order_relaxed);
                }
            });
        }

        for (int i = 0; i < spec.io_workers; ++i) {
            threads.emplace_back([this, i, deadline] {
                pin_to_set(spec.cpu_set);
                while (should_run(deadline)) {
                    sync();
                    io_iters[static_cast<std::size_t>(i)].fetch_add(
                        1, std::memory_order_relaxed);
                }
            });
        }

        scratch_files.resize(static_cast<std::size_t>(spec.disk_workers));
        for (int i = 0; i < spec.disk_workers; ++i) {
            scratch_files[static_cast<std::size_t>(i)] =
                spec.scratch_dir + "/rtlat-load-" + std::to_string(getpid()) + "-" +
                std::to_string(i) + ".tmp";
            threads.emplace_back([this, i, deadline] {
                pin_to_set(spec.cpu_set);
                const std::string& path = scratch_files[static_cast<std::size_t>(i)];
                std::vector<char> buf(64 * 1024, static_cast<char>(i + 1));
                while (should_run(deadline)) {
                    std::FILE* f = std::fopen(path.c_str(), "wb");
                    if (f) {
                        std::uint64_t written = 0;
                        while (written < spec.disk_bytes) {
                            const std::size_t chunk = static_cast<std::size_t>(
                                std::min<std::uint64_t>(buf.size(), spec.disk_bytes - written));
                            if (std::fwrite(buf.data(), 1, chunk, f) != chunk) break;
                            written += chunk;
                        }
                        std::fflush(f);
                        fsync(fileno(f));
                        std::fclose(f);
                    }
                    std::error_code ec;
                    fs::remove(path, ec);
                    disk_iters[static_cast<std::size_t>(i)].fetch_add(
                        1, std::memory_order_relaxed);
                }
                std::error_code ec;
                fs::remove(path, ec);
            });
        }
    }

    LoadReport stop() {
        if (stopped) return cached;
        stop_flag.store(true);
        for (auto& t : threads) {
            if (t.joinable()) t.join();
        }
        const auto ended = std::chrono::steady_clock::now();
        const auto times_after = read_cpu_times();

        LoadReport r;
        r.duration = TimeNs(static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(ended - started).count()));
        for (auto& a : cpu_iters) r.cpu_iterations.push_back(a.load());
        for (auto& a : mem_iters) r.mem_iterations.push_back(a.load());
        for (auto& a : io_iters) r.io_iterations.push_back(a.load());
        for (auto& a : disk_iters) r.disk_iterations.push_back(a.load());

        const auto targets = spec.cpu_set.empty() ? [&] {
            CpuSet all;
            std::vector<int> v;
            for (const auto& [cpu, _] : times_after) v.push_back(cpu);
            return CpuSet(std::move(v));
        }() : spec.cpu_set;
        for (int cpu : targets.cpus()) {
            const auto before = times_before.find(cpu);
            const auto after = times_after.find(cpu);
            if (before == times_before.end() || after == times_after.end()) continue;
            const std::uint64_t dt = after->second.total - before->second.total;
            const std::uint64_t di = after->second.idle - before->second.idle;
            if (dt > 0) r.cpu_utilization[cpu] = 1.0 - static_cast<double>(di) / dt;
        }

        // cleanup catch-all, workers already remove their own file
        for (const auto& path : scratch_files) {
            std::error_code ec;
            fs::remove(path, ec);
        }
        cached = std::move(r);
        stopped = true;
        return cached;
    }
};

LoadHandle::LoadHandle() = default;
LoadHandle::LoadHandle(LoadHandle&&) noexcept = default;
LoadHandle& LoadHandle::operator=(LoadHandle&&) noexcept = default;

LoadHandle::~LoadHandle() {
    if (impl_ && !impl_->stopped) impl_->stop();
}

bool LoadHandle::active() const { return impl_ && !impl_->stopped; }

LoadReport LoadHandle::stop() {
    if (!impl_) throw std::logic_error("stop on empty LoadHandle");
    return impl_->stop();
}

LoadHandle start_load(const LoadSpec& spec) {
    spec.validate();
    LoadHandle h;
    h.impl_ = std::make_unique<LoadHandle::Impl>(spec);
    h.impl_->start();
    return h;
}

}  // namespace rtlat
