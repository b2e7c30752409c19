#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rtlat/bench.hpp"
#include "rtlat/time.hpp"

namespace rtlat {

// Min/avg/sigma/max row. Sigma is population standard deviation.
struct SummaryStats {
    std::uint64_t n = 0;
    TimeNs min;
    TimeNs max;
    double mean_ns = 0.0;
    double stddev_ns = 0.0;
};

// Single-pass Welford accumulator with exact integer min/max.
// Mergeable, so partial summaries over file chunks combine exactly.
class StatsAccumulator {
public:
    void add(TimeNs latency);
    void merge(const StatsAccumulator& other);
    std::uint64_t count() const { return n_; }

    // Throws EmptyInputError when nothing was added.
    SummaryStats finish() const;

private:
    std::uint64_t n_ = 0;
    std::uint64_t min_ = UINT64_MAX;
    std::uint64_t max_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

SummaryStats summarize(std::span<const LatencySample> samples);

struct OvershootReport {
    TimeNs threshold;
    std::uint64_t count = 0;
    std::uint64_t n = 0;
    TimeNs max_observed;

    double rate() const { return n == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(n); }
    // Percentage to 5 significant digits, e.g. "0.00096%".
    std::string rate_percent() const;
};

class OvershootAccumulator {
public:
    explicit OvershootAccumulator(TimeNs threshold) : threshold_(threshold) {}
    void add(TimeNs latency);
    OvershootReport finish() const;

private:
    TimeNs threshold_;
    std::uint64_t count_ = 0;
    std::uint64_t n_ = 0;
    TimeNs max_{0};
};

// Samples strictly above threshold count as overshoots.
OvershootReport overshoot(std::span<const LatencySample> samples, TimeNs threshold);

struct Histogram {
    TimeNs bucket_width;
    std::vector<std::uint64_t> counts;  // bucket i covers [i*w, (i+1)*w)
    TimeNs overflow_threshold;          // = bucket_width * counts.size()
    std::uint64_t overflow = 0;
    std::uint64_t n = 0;
};

Histogram histogram(std::span<const LatencySample> samples, TimeNs bucket_width,
                    std::size_t max_buckets = 10000);

struct BoxplotData {
    std::string label;
    std::uint64_t n = 0;
    double q1 = 0, median = 0, q3 = 0;
    double whisker_low = 0, whisker_high = 0;
    double mean = 0;
    std::uint64_t outliers = 0;  // samples beyond the whiskers
};

// Quartiles by linear interpolation on order statistics (R-7 rule);
// whiskers at 1.5*IQR, clamped to actual data points.
BoxplotData boxplot_data(const std::string& label, std::span<const LatencySample> samples);

struct LabeledSeries {
    std::string label;
    std::span<const LatencySample> samples;
};
std::vector<BoxplotData> boxplot_data(const std::vector<LabeledSeries>& series);

enum class StatisticKind { Max, Mean, Quantile };

struct Statistic {
    StatisticKind kind = StatisticKind::Max;
    double q = 0.0;  // quantile in [0,1], Quantile only

    static Statistic parse(const std::string& text);  // "max" | "mean" | "p99.999"
    std::string name() const;
};

// Picks f from the series per the statistic and runs the deadline check.
// Refuses degraded series unless allow_degraded.
FeasibilityVerdict feasibility_report(const SampleSeries& series, const TaskSpec& task,
                                      const Statistic& stat, bool allow_degraded = false);

// Same check when only the latency value is at hand.
FeasibilityVerdict feasibility_report(TimeNs firing_latency, const TaskSpec& task);

}  // namespace rtlat
