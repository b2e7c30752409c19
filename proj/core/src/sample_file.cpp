#include "rtlat/sample_file.hpp"

#include <array>
#include <cstring>
#include <vector>

#include "rtlat/errors.hpp"
#include "rtlat/version.hpp"

namespace rtlat {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'F', 'S'};
constexpr std::uint64_t kCrcPoly = 0xC96C5795D7870F42ull;  // ECMA-182 reflected

const std::array<std::uint64_t, 256>& crc_table() {
    static const std::array<std::uint64_t, 256> table = [] {
        std::array<std::uint64_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint64_t crc = i;
            for (int b = 0; b < 8; ++b) {
                crc = (crc & 1) ? (crc >> 1) ^ kCrcPoly : crc >> 1;
            }
            t[i] = crc;
        }
        return t;
    }();
    return table;
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

std::uint64_t crc64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto& table = crc_table();
    std::uint64_t crc = ~seed;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        crc = table[(crc ^ p[i]) & 0xff] ^ (crc >> 8);
    }
    return ~crc;
}

void persist_samples(const SampleSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    std::string header;
    header.append(kMagic, 4);
    put_u16(header, static_cast<std::uint16_t>(kSampleFormatVersion));
    const std::string meta = series.meta.to_json().dump();
    put_u32(header, static_cast<std::uint32_t>(meta.size()));
    header += meta;
    put_u64(header, series.samples.size());

    std::uint64_t crc = crc64(header.data(), header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    // records written in chunks; crc folds over the raw bytes
    std::string chunk;
    chunk.reserve(16 * 4096);
    for (const auto& s : series.samples) {
        put_u64(chunk, s.seq);
        put_u64(chunk, s.latency.ns);
        if (chunk.size() >= 16 * 4096) {
            crc = crc64(chunk.data(), chunk.size(), crc);
            out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
            chunk.clear();
        }
    }
    if (!chunk.empty()) {
        crc = crc64(chunk.data(), chunk.size(), crc);
        out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    }

    std::string trailer;
    put_u64(trailer, crc);
    out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to " + path);
}

SampleFileReader::SampleFileReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot open sample file: " + path);

    char magic[4];
    read_raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw CorruptFileError(path + ": bad magic, not an RTFS sample file");
    }
    unsigned char v16[2];
    read_raw(v16, 2);
    const unsigned version = v16[0] | (static_cast<unsigned>(v16[1]) << 8);
    if (version != kSampleFormatVersion) {
        throw CorruptFileError(path + ": unsupported format version " +
                               std::to_string(version));
    }
    unsigned char len4[4];
    read_raw(len4, 4);
    std::uint32_t meta_len = 0;
    for (int i = 3; i >= 0; --i) meta_len = (meta_len << 8) | len4[i];
    std::string meta_json(meta_len, '\0');
    read_raw(meta_json.data(), meta_len);
    try {
        meta_ = SeriesMeta::from_json(nlohmann::json::parse(meta_json));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(path + ": bad metadata block: " + e.what());
    }
    unsigned char n8[8];
    read_raw(n8, 8);
    count_ = get_u64(n8);
}

void SampleFileReader::read_raw(void* buf, std::size_t len) {
    in_.read(static_cast<char*>(buf), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len) {
        throw CorruptFileError(path_ + ": truncated file");
    }
    crc_ = crc64(buf, len, crc_);
}

bool SampleFileReader::next(LatencySample& out) {
    if (read_ >= count_) {
        if (!verified_) {
            const std::uint64_t computed = crc_;
            unsigned char c8[8];
            in_.read(reinterpret_cast<char*>(c8), 8);
            if (in_.gcount() != 8) throw CorruptFileError(path_ + ": truncated file");
            if (get_u64(c8) != computed) {
                throw CorruptFileError(path_ + ": CRC mismatch, file is corrupt");
            }
            verified_ = true;
        }
        return false;
    }
    unsigned char rec[16];
    read_raw(rec, 16);
    out.seq = get_u64(rec);
    out.latency = TimeNs(get_u64(rec + 8));
    ++read_;
    return true;
}

SampleSeries load_samples(const std::string& path) {
    SampleFileReader reader(path);
    SampleSeries series;
    series.meta = reader.meta();
    series.samples.reserve(reader.count());
    LatencySample s;
    while (reader.next(s)) series.samples.push_back(s);
    return series;
}

}  // namespace rtlat
