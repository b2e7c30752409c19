#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "rtlat/bench.hpp"

namespace rtlat {

// Sample file layout, little-endian throughout:
//   "RTFS" | u16 version | u32 meta_len | meta JSON | u64 n
//   n x { u64 seq, u64 latency_ns } | u64 crc64 over everything before it
// CRC64 is ECMA-182 (reflected, as in xz).

std::uint64_t crc64(const void* data, std::size_t len, std::uint64_t seed = 0);

void persist_samples(const SampleSeries& series, const std::string& path);
SampleSeries load_samples(const std::string& path);

// Streams records without holding the file in memory. The CRC is
// accumulated while reading and checked once the last record is consumed;
// a short or corrupt file throws CorruptFileError, never truncates silently.
class SampleFileReader {
public:
    explicit SampleFileReader(const std::string& path);

    const SeriesMeta& meta() const { return meta_; }
    std::uint64_t count() const { return count_; }

    // False once all records were read (after CRC verification).
    bool next(LatencySample& out);

private:
    void read_raw(void* buf, std::size_t len);

    std::ifstream in_;
    std::string path_;
    SeriesMeta meta_;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
    std::uint64_t crc_ = 0;
    bool verified_ = false;
};

}  // namespace rtlat
