#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rtlat/analysis.hpp"
#include "rtlat/bench.hpp"
#include "rtlat/sample_file.hpp"

using namespace rtlat;

namespace {

std::vector<LatencySample> make_samples(std::size_t n) {
    std::mt19937_64 rng(99);
    std::vector<LatencySample> s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back({i, TimeNs(rng() % 10'000'000)});
    return s;
}

void bm_stats_accumulator(benchmark::State& state) {
    const auto samples = make_samples(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        StatsAccumulator acc;
        for (const auto& s : samples) acc.add(s.latency);
        benchmark::DoNotOptimize(acc.finish());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_stats_accumulator)->Arg(1000)->Arg(100000)->Arg(1000000);

void bm_overshoot(benchmark::State& state) {
    const auto samples = make_samples(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(overshoot(samples, TimeNs::from_ms(1)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_overshoot)->Arg(100000)->Arg(1000000);

void bm_crc64(benchmark::State& state) {
    std::vector<char> buf(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(3);
    for (auto& c : buf) c = static_cast<char>(rng());
    for (auto _ : state) {
        benchmark::DoNotOptimize(crc64(buf.data(), buf.size()));
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_crc64)->Arg(4096)->Arg(1 << 20);

// per-iteration overhead of the cyclic loop itself, simulated clock
void bm_hot_loop(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<LatencySample> out(n);
    std::vector<TimeNs> delays{TimeNs(100), TimeNs(200), TimeNs(50)};
    for (auto _ : state) {
        SimulatedClock clock(delays);
        benchmark::DoNotOptimize(
            worker_hot_loop(clock, TimeNs(1'000'000), TimeNs::from_ms(1), out));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_hot_loop)->Arg(100000)->Arg(1000000);

}  // namespace

BENCHMARK_MAIN();
