#include "rtlat/cpuset.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace rtlat {

CpuSet::CpuSet(std::vector<int> cpus) : cpus_(std::move(cpus)) {
    for (int c : cpus_) {
        if (c < 0) throw ValidationError("negative CPU index");
    }
    std::sort(cpus_.begin(), cpus_.end());
    cpus_.erase(std::unique(cpus_.begin(), cpus_.end()), cpus_.end());
}

CpuSet CpuSet::parse(const std::string& text) {
    std::vector<int> cpus;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto dash = token.find('-');
        try {
            if (dash == std::string::npos) {
                cpus.push_back(std::stoi(token));
            } else {
                const int lo = std::stoi(token.substr(0, dash));
                const int hi = std::stoi(token.substr(dash + 1));
                if (hi < lo) throw ValidationError("descending CPU range: " + token);
                for (int c = lo; c <= hi; ++c) cpus.push_back(c);
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("invalid CPU list token: " + token);
        }
    }
    return CpuSet(std::move(cpus));
}

CpuSet CpuSet::from_hex_mask(const std::string& mask) {
    std::vector<int> cpus;
    int bit = 0;
    for (auto it = mask.rbegin(); it != mask.rend(); ++it) {
        const char c = *it;
        if (c == ',' || c == '\n' || c == ' ') continue;
        int nibble;
        if (c >= '0' && c <= '9') nibble = c - '0';
        else if (c >= 'a' && c <= 'f') nibble = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') nibble = c - 'A' + 10;
        else throw ValidationError("invalid hex mask: " + mask);
        for (int i = 0; i < 4; ++i) {
            if (nibble & (1 << i)) cpus.push_back(bit + i);
        }
        bit += 4;
    }
    return CpuSet(std::move(cpus));
}

bool CpuSet::contains(int cpu) const {
    return std::binary_search(cpus_.begin(), cpus_.end(), cpu);
}

CpuSet CpuSet::intersect(const CpuSet& other) const {
    std::vector<int> out;
    std::set_intersection(cpus_.begin(), cpus_.end(), other.cpus_.begin(), other.cpus_.end(),
                          std::back_inserter(out));
    return CpuSet(std::move(out));
}

std::string CpuSet::to_list_string() const {
    std::string out;
    std::size_t i = 0;
    while (i < cpus_.size()) {
        std::size_t j = i;
        while (j + 1 < cpus_.size() && cpus_[j + 1] == cpus_[j] + 1) ++j;
        if (!out.empty()) out += ',';
        out += std::to_string(cpus_[i]);
        if (j > i) {
            out += '-';
            out += std::to_string(cpus_[j]);
        }
        i = j + 1;
    }
    return out;
}

std::string CpuSet::to_hex_mask(int total_cpus) const {
    if (!cpus_.empty() && cpus_.back() >= total_cpus) total_cpus = cpus_.back() + 1;
    const int words = std::max(1, (total_cpus + 31) / 32);
    std::vector<std::uint32_t> bits(static_cast<std::size_t>(words), 0);
    for (int c : cpus_) bits[static_cast<std::size_t>(c) / 32] |= 1u << (c % 32);
    std::string out;
    char buf[16];
    for (int w = words - 1; w >= 0; --w) {
        if (out.empty()) {
            std::snprintf(buf, sizeof buf, "%x", bits[static_cast<std::size_t>(w)]);
        } else {
            std::snprintf(buf, sizeof buf, ",%08x", bits[static_cast<std::size_t>(w)]);
        }
        out += buf;
    }
    return out;
}

}  // namespace rtlat
