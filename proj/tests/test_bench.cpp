#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <new>
#include <random>

#include "rtlat/bench.hpp"

using namespace rtlat;

// global allocation counter for the hot-loop instrumentation test
static std::atomic<std::uint64_t> g_allocs{0};

void* operator new(std::size_t size) {
    g_allocs.fetch_add(1, std::memory_order_relaxed);
    if (void* p = std::malloc(size)) return p;
    throw std::bad_alloc();
}

void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

BenchConfig sim_config(std::vector<TimeNs> delays, std::uint64_t loops) {
    BenchConfig cfg;
    cfg.clock = ClockKind::Simulated;
    cfg.simulated_delays = std::move(delays);
    cfg.loops = loops;
    return cfg;
}

}  // namespace

TEST_CASE("simulated clock plays back injected delays exactly") {
    const auto series = run_cyclic(sim_config(
        {TimeNs::from_us(10), TimeNs::from_us(20), TimeNs::from_us(30)}, 3));
    REQUIRE(series.size() == 1);
    REQUIRE(series[0].samples.size() == 3);
    CHECK(series[0].samples[0].latency.ns == 10000);
    CHECK(series[0].samples[1].latency.ns == 20000);
    CHECK(series[0].samples[2].latency.ns == 30000);
    CHECK(series[0].meta.clock == "simulated");
    CHECK_FALSE(series[0].meta.degraded);
}

TEST_CASE("zero loops yields empty series, success") {
    const auto series = run_cyclic(sim_config({}, 0));
    REQUIRE(series.size() == 1);
    CHECK(series[0].samples.empty());
}

TEST_CASE("schedule_next never drifts") {
    CHECK(schedule_next(TimeNs::from_ms(5), TimeNs::from_ms(1)) == TimeNs::from_ms(6));

    SUBCASE("ten million applications land exactly") {
        TimeNs t(0);
        const TimeNs interval = TimeNs::from_ms(1);
        for (std::uint64_t k = 0; k < 10'000'000; ++k) t = schedule_next(t, interval);
        CHECK(t == TimeNs::from_s(10'000));
    }

    SUBCASE("random walks match the wide-integer oracle") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 50; ++trial) {
            const std::uint64_t t0 = rng() % 1'000'000'000'000ull;
            const std::uint64_t interval = 1 + rng() % 10'000'000;
            const std::uint64_t k = rng() % 100'000;
            TimeNs t(t0);
            for (std::uint64_t i = 0; i < k; ++i) t = schedule_next(t, TimeNs(interval));
            const unsigned __int128 want =
                static_cast<unsigned __int128>(t0) +
                static_cast<unsigned __int128>(interval) * k;
            CHECK(t.ns == static_cast<std::uint64_t>(want));
        }
    }
}

TEST_CASE("hot loop with zero delay records zero latency") {
    SimulatedClock clock({});
    LatencySample buf[1];
    const TimeNs last = worker_hot_loop(clock, TimeNs::from_ms(1), TimeNs::from_ms(1),
                                        std::span<LatencySample>(buf, 1));
    CHECK(buf[0].latency.ns == 0);
    CHECK(buf[0].seq == 0);
    CHECK(last == TimeNs::from_ms(2));
}

TEST_CASE("hot loop performs no allocations") {
    SimulatedClock clock({TimeNs(5), TimeNs(10)});
    std::vector<LatencySample> buf(10000);
    const std::uint64_t before = g_allocs.load();
    worker_hot_loop(clock, TimeNs(1000), TimeNs(1000), std::span<LatencySample>(buf));
    CHECK(g_allocs.load() == before);
}

TEST_CASE("warmup discards leading samples and renumbers") {
    auto cfg = sim_config({TimeNs(1), TimeNs(2), TimeNs(3), TimeNs(4), TimeNs(5)}, 3);
    cfg.warmup = 2;
    const auto series = run_cyclic(cfg);
    REQUIRE(series[0].samples.size() == 3);
    CHECK(series[0].samples[0].latency.ns == 3);
    CHECK(series[0].samples[0].seq == 0);
    CHECK(series[0].samples[2].seq == 2);
}

TEST_CASE("identical simulated runs are identical, sample counts conserved") {
    auto cfg = sim_config({TimeNs(100), TimeNs(50), TimeNs(75)}, 1000);
    cfg.workers = 3;
    const auto a = run_cyclic(cfg);
    const auto b = run_cyclic(cfg);
    REQUIRE(a.size() == 3);
    CHECK(a == b);
    std::size_t total = 0;
    for (const auto& s : a) total += s.samples.size();
    CHECK(total == 3 * 1000);
    // every latency non-negative by construction, seq gap-free
    for (const auto& s : a) {
        for (std::size_t i = 0; i < s.samples.size(); ++i) {
            REQUIRE(s.samples[i].seq == i);
        }
    }
}

TEST_CASE("config validation") {
    BenchConfig cfg;
    cfg.interval = TimeNs(0);
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = BenchConfig{};
    cfg.priority = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = BenchConfig{};
    cfg.cpu_set = CpuSet({100000});
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("delay trace file parsing") {
    const std::string path = "trace_test.txt";
    {
        std::ofstream out(path);
        out << "# warmed-up trace\n10us\n 20us \n\n30000\n";
    }
    const auto delays = load_delay_trace(path);
    REQUIRE(delays.size() == 3);
    CHECK(delays[0].ns == 10000);
    CHECK(delays[1].ns == 20000);
    CHECK(delays[2].ns == 30000);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_delay_trace("does-not-exist.txt"), ValidationError);
}

TEST_CASE("short monotonic run produces plausible samples") {
    BenchConfig cfg;
    cfg.interval = TimeNs::from_us(200);
    cfg.loops = 50;
    const auto series = run_cyclic(cfg);  // degraded mode is fine here
    REQUIRE(series.size() == 1);
    CHECK(series[0].samples.size() == 50);
    CHECK(series[0].meta.clock == "monotonic");
    CHECK_FALSE(series[0].meta.started_at.empty());
    for (const auto& s : series[0].samples) CHECK(s.latency.ns >= 0);
}
