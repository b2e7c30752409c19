#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "rtlat/sample_file.hpp"

namespace fs = std::filesystem;
using namespace rtlat;

namespace {

SampleSeries make_series(std::uint64_t n, std::uint64_t seed) {
    SampleSeries s;
    s.meta.worker_id = 1;
    s.meta.cpu = 2;
    s.meta.interval = TimeNs::from_ms(1);
    s.meta.loops = n;
    s.meta.clock = "simulated";
    s.meta.toolkit_version = "test";
    s.meta.environment = {{"kernel_version", "fixture"}};
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) {
        s.samples.push_back({i, TimeNs(rng() % 1'000'000)});
    }
    return s;
}

struct TmpFile {
    std::string path;
    explicit TmpFile(std::string p) : path(std::move(p)) {}
    ~TmpFile() { fs::remove(path); }
};

}  // namespace

TEST_CASE("round trip is exact, including metadata") {
    TmpFile f("rtfs_roundtrip.rtfs");
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto series = make_series(rng() % 5000, rng());
        persist_samples(series, f.path);
        const auto loaded = load_samples(f.path);
        REQUIRE(loaded == series);
    }
}

TEST_CASE("empty series round trip") {
    TmpFile f("rtfs_empty.rtfs");
    const auto series = make_series(0, 1);
    persist_samples(series, f.path);
    const auto loaded = load_samples(f.path);
    CHECK(loaded.samples.empty());
    CHECK(loaded.meta == series.meta);
}

TEST_CASE("persisting twice yields byte-identical files") {
    TmpFile a("rtfs_det_a.rtfs"), b("rtfs_det_b.rtfs");
    const auto series = make_series(4096, 77);
    persist_samples(series, a.path);
    persist_samples(series, b.path);
    std::ifstream fa(a.path, std::ios::binary), fb(b.path, std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(fa)), {});
    const std::string bb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(ba == bb);
}

TEST_CASE("truncated file is a checksum error, not silent truncation") {
    TmpFile f("rtfs_trunc.rtfs");
    persist_samples(make_series(1000, 9), f.path);
    const auto size = fs::file_size(f.path);
    fs::resize_file(f.path, size - 24);
    CHECK_THROWS_AS(load_samples(f.path), CorruptFileError);
}

TEST_CASE("flipped byte fails the CRC") {
    TmpFile f("rtfs_corrupt.rtfs");
    persist_samples(make_series(1000, 9), f.path);
    {
        std::fstream io(f.path, std::ios::in | std::ios::out | std::ios::binary);
        io.seekp(static_cast<std::streamoff>(fs::file_size(f.path) / 2));
        char c;
        io.read(&c, 1);
        io.seekp(-1, std::ios::cur);
        c = static_cast<char>(c ^ 0x40);
        io.write(&c, 1);
    }
    CHECK_THROWS_AS(load_samples(f.path), CorruptFileError);
}

TEST_CASE("bad magic rejected") {
    TmpFile f("rtfs_magic.rtfs");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << "NOPE garbage";
    }
    CHECK_THROWS_AS(load_samples(f.path), CorruptFileError);
}

TEST_CASE("streaming reader iterates records without preloading") {
    TmpFile f("rtfs_stream.rtfs");
    const auto series = make_series(10000, 31);
    persist_samples(series, f.path);

    SampleFileReader reader(f.path);
    CHECK(reader.count() == 10000);
    CHECK(reader.meta().cpu == 2);
    LatencySample s;
    std::uint64_t n = 0, sum = 0;
    while (reader.next(s)) {
        CHECK(s.seq == n);
        sum += s.latency.ns;
        ++n;
    }
    CHECK(n == 10000);
    std::uint64_t want = 0;
    for (const auto& x : series.samples) want += x.latency.ns;
    CHECK(sum == want);
}

TEST_CASE("crc64 known vector") {
    // check value for "123456789" under ECMA-182 reflected (the xz CRC64)
    const char* s = "123456789";
    CHECK(crc64(s, 9) == 0x995DC9BBDF1939FAull);
}
