#include "rtlat/bench.hpp"

#include <pthread.h>
#include <sched.h>
#include <sys/mman.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <memory>
#include <thread>

#include "rtlat/sysconfig.hpp"
#include "rtlat/version.hpp"

namespace rtlat {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Returns false when RT setup was refused (degraded run).
bool setup_rt_thread(int cpu, int priority, bool strict) {
    bool ok = true;
    if (cpu >= 0) {
        cpu_set_t set;
        CPU_ZERO(&set);
        CPU_SET(cpu, &set);
        if (pthread_setaffinity_np(pthread_self(), sizeof set, &set) != 0) {
            if (strict) throw PrivilegeError("cannot pin worker to CPU " + std::to_string(cpu));
            ok = false;
        }
    }
    sched_param sp{};
    sp.sched_priority = priority;
    if (pthread_setschedparam(pthread_self(), SCHED_FIFO, &sp) != 0) {
        if (strict) {
            throw PrivilegeError("SCHED_FIFO priority " + std::to_string(priority) +
                                 " refused: " + std::strerror(errno));
        }
        ok = false;
    }
    return ok;
}

}  // namespace

int BenchConfig::effective_workers() const {
    if (workers) return *workers;
    return cpu_set.empty() ? 1 : static_cast<int>(cpu_set.size());
}

void BenchConfig::validate() const {
    if (interval.ns == 0) throw ValidationError("bench: interval must be > 0");
    if (effective_workers() < 1) throw ValidationError("bench: workers must be >= 1");
    if (priority < 1 || priority > 99) {
        throw ValidationError("bench: priority must be in [1,99]");
    }
    if (clock == ClockKind::Monotonic && !cpu_set.empty()) {
        const int hw = static_cast<int>(std::thread::hardware_concurrency());
        for (int c : cpu_set.cpus()) {
            if (c >= hw) {
                throw ValidationError("bench: CPU " + std::to_string(c) +
                                      " not present on this host");
            }
        }
    }
}

nlohmann::json SeriesMeta::to_json() const {
    return {{"worker_id", worker_id},
            {"cpu", cpu},
            {"degraded", degraded},
            {"interval_ns", interval.ns},
            {"loops", loops},
            {"warmup", warmup},
            {"priority", priority},
            {"clock", clock},
            {"base_ns", base_ns},
            {"last_scheduled_ns", last_scheduled_ns},
            {"started_at", started_at},
            {"ended_at", ended_at},
            {"plan_checksum", plan_checksum},
            {"toolkit_version", toolkit_version},
            {"environment", environment}};
}

SeriesMeta SeriesMeta::from_json(const nlohmann::json& j) {
    SeriesMeta m;
    m.worker_id = j.value("worker_id", 0);
    m.cpu = j.value("cpu", -1);
    m.degraded = j.value("degraded", false);
    m.interval = TimeNs(j.value("interval_ns", std::uint64_t{0}));
    m.loops = j.value("loops", std::uint64_t{0});
    m.warmup = j.value("warmup", std::uint64_t{0});
    m.priority = j.value("priority", 0);
    m.clock = j.value("clock", "");
    m.base_ns = j.value("base_ns", std::uint64_t{0});
    m.last_scheduled_ns = j.value("last_scheduled_ns", std::uint64_t{0});
    m.started_at = j.value("started_at", "");
    m.ended_at = j.value("ended_at", "");
    m.plan_checksum = j.value("plan_checksum", "");
    m.toolkit_version = j.value("toolkit_version", "");
    m.environment = j.value("environment", nlohmann::json::object());
    return m;
}

bool SeriesMeta::operator==(const SeriesMeta& o) const { return to_json() == o.to_json(); }

TimeNs worker_hot_loop(Clock& clock, TimeNs first_deadline, TimeNs interval,
                       std::span<LatencySample> out) {
    TimeNs deadline = first_deadline;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const TimeNs wake = clock.sleep_until(deadline);
        const std::uint64_t lat = wake.ns >= deadline.ns ? wake.ns - deadline.ns : 0;
        out[i].seq = i;
        out[i].latency = TimeNs(lat);
        deadline = schedule_next(deadline, interval);
    }
    return deadline;
}

std::vector<SampleSeries> run_cyclic(const BenchConfig& config) {
    config.validate();
    const int workers = config.effective_workers();
    const bool simulated = config.clock == ClockKind::Simulated;

    SysConfigurator sysconf;
    const nlohmann::json env = sysconf.capture_environment().to_json();
    const std::string plan_checksum = sysconf.active_plan_checksum();

    if (!simulated) {
        mlockall(MCL_CURRENT | MCL_FUTURE);  // best effort, pagefault avoidance
    }

    std::vector<SampleSeries> results(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> worker_errors(static_cast<std::size_t>(workers));
    const std::uint64_t total_loops = config.loops + config.warmup;

    auto worker_body = [&](int id) {
        SampleSeries& series = results[static_cast<std::size_t>(id)];
        SeriesMeta& meta = series.meta;
        meta.worker_id = id;
        meta.cpu = config.cpu_set.empty()
                       ? -1
                       : config.cpu_set.cpus()[static_cast<std::size_t>(id) %
                                               config.cpu_set.size()];
        meta.interval = config.interval;
        meta.loops = config.loops;
        meta.warmup = config.warmup;
        meta.priority = config.priority;
        meta.clock = simulated ? "simulated" : "monotonic";
        meta.plan_checksum = plan_checksum;
        meta.toolkit_version = kToolkitVersion;
        meta.environment = env;

        std::unique_ptr<Clock> owned;
        if (simulated) {
            owned = std::make_unique<SimulatedClock>(config.simulated_delays);
            meta.degraded = false;
        } else {
            owned = std::make_unique<MonotonicClock>();
            meta.degraded = !setup_rt_thread(meta.cpu, config.priority, config.strict);
            meta.started_at = utc_timestamp();
        }
        Clock& clock = *owned;

        // buffer sized up front: the hot loop never allocates
        series.samples.resize(total_loops);

        const TimeNs base = simulated ? TimeNs(0) : clock.now();
        meta.base_ns = base.ns;
        const TimeNs stagger =
            checked_mul(config.distribute_offset, static_cast<std::uint64_t>(id));
        const TimeNs first = checked_add(checked_add(base, config.interval), stagger);

        const TimeNs last = worker_hot_loop(clock, first, config.interval,
                                            std::span<LatencySample>(series.samples));
        meta.last_scheduled_ns = last.ns;

        if (!simulated) meta.ended_at = utc_timestamp();

        if (config.warmup > 0) {
            series.samples.erase(series.samples.begin(),
                                 series.samples.begin() +
                                     static_cast<std::ptrdiff_t>(config.warmup));
            for (std::uint64_t i = 0; i < series.samples.size(); ++i) {
                series.samples[i].seq = i;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int id = 0; id < workers; ++id) {
        threads.emplace_back([&, id] {
            try {
                worker_body(id);
            } catch (...) {
                worker_errors[static_cast<std::size_t>(id)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : worker_errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

std::vector<TimeNs> load_delay_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trace file: " + path);
    std::vector<TimeNs> delays;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        std::size_t i = 0;
        while (i < line.size() && line[i] == ' ') ++i;
        line.erase(0, i);
        if (line.empty()) continue;
        delays.push_back(parse_duration(line));
    }
    return delays;
}

}  // namespace rtlat
