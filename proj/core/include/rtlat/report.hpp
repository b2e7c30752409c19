#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtlat/analysis.hpp"

namespace rtlat {

struct SummaryRow {
    std::string test;   // configuration label
    std::string label;  // kernel/OS flavor or secondary tag
    SummaryStats stats;
    std::optional<OvershootReport> overshoot;
};

// Text table: Test | Label | Min | Avg | sigma | Max, values in integer
// microseconds (truncated), deterministic ordering and spacing.
std::string emit_table(const std::vector<SummaryRow>& rows);

// CSV per the documented schema:
// label,n,min_ns,mean_ns,stddev_ns,max_ns,threshold_ns,overshoot_count,overshoot_rate
std::string emit_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_csv(const std::string& csv);

std::string emit_json(const std::vector<SummaryRow>& rows);

// Static boxplot, log-scale value axis, one dashed line per reference
// value, mean marker in blue, outlier counts annotated.
std::string emit_boxplot_svg(const std::vector<BoxplotData>& boxes,
                             const std::vector<TimeNs>& reference_lines,
                             const std::string& title = "");

}  // namespace rtlat
