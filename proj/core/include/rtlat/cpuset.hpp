#pragma once

#include <string>
#include <vector>

#include "rtlat/errors.hpp"

namespace rtlat {

// Set of logical CPU indices. Kept sorted and duplicate-free.
class CpuSet {
public:
    CpuSet() = default;
    explicit CpuSet(std::vector<int> cpus);

    // Parses list syntax: "0-3,5,8-9".
    static CpuSet parse(const std::string& text);
    // Parses a /proc/irq/N/smp_affinity style hex mask ("ff", "3,00000000").
    static CpuSet from_hex_mask(const std::string& mask);

    bool empty() const { return cpus_.empty(); }
    std::size_t size() const { return cpus_.size(); }
    bool contains(int cpu) const;
    const std::vector<int>& cpus() const { return cpus_; }

    CpuSet intersect(const CpuSet& other) const;
    bool intersects(const CpuSet& other) const { return !intersect(other).empty(); }

    // "0-3,5" style list.
    std::string to_list_string() const;
    // smp_affinity hex mask, comma-grouped per 32 CPUs, bit-exact.
    std::string to_hex_mask(int total_cpus) const;

    bool operator==(const CpuSet&) const = default;

private:
    std::vector<int> cpus_;
};

}  // namespace rtlat
