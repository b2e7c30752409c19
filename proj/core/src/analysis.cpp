#include "rtlat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rtlat/errors.hpp"

namespace rtlat {

void StatsAccumulator::add(TimeNs latency) {
    const std::uint64_t v = latency.ns;
    ++n_;
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
    const double x = static_cast<double>(v);
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    // Chan et al. parallel combination of mean and M2
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double total = na + nb;
    mean_ += delta * (nb / total);
    m2_ += other.m2_ + delta * delta * (na * nb / total);
    n_ += other.n_;
    min_ = std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
}

SummaryStats StatsAccumulator::finish() const {
    if (n_ == 0) throw EmptyInputError("summarize: empty series");
    SummaryStats s;
    s.n = n_;
    s.min = TimeNs(min_);
    s.max = TimeNs(max_);
    s.mean_ns = mean_;
    s.stddev_ns = n_ > 0 ? std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_))) : 0.0;
    return s;
}

SummaryStats summarize(std::span<const LatencySample> samples) {
    StatsAccumulator acc;
    for (const auto& s : samples) acc.add(s.latency);
    return acc.finish();
}

void OvershootAccumulator::add(TimeNs latency) {
    ++n_;
    if (latency > threshold_) ++count_;
    max_ = std::max(max_, latency);
}

OvershootReport OvershootAccumulator::finish() const {
    if (n_ == 0) throw EmptyInputError("overshoot: empty series");
    return OvershootReport{threshold_, count_, n_, max_};
}

std::string OvershootReport::rate_percent() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.5g%%", rate() * 100.0);
    return buf;
}

OvershootReport overshoot(std::span<const LatencySample> samples, TimeNs threshold) {
    OvershootAccumulator acc(threshold);
    for (const auto& s : samples) acc.add(s.latency);
    return acc.finish();
}

Histogram histogram(std::span<const LatencySample> samples, TimeNs bucket_width,
                    std::size_t max_buckets) {
    if (bucket_width.ns == 0) throw ValidationError("histogram: bucket_width must be > 0");
    if (max_buckets == 0) throw ValidationError("histogram: need at least one bucket");
    Histogram h;
    h.bucket_width = bucket_width;
    h.overflow_threshold = checked_mul(bucket_width, max_buckets);
    std::size_t hi = 0;  // grow lazily, trim trailing zeros at the end
    std::vector<std::uint64_t> counts(max_buckets, 0);
    for (const auto& s : samples) {
        ++h.n;
        if (s.latency >= h.overflow_threshold) {
            ++h.overflow;
        } else {
            const std::size_t bucket = static_cast<std::size_t>(s.latency.ns / bucket_width.ns);
            ++counts[bucket];
            hi = std::max(hi, bucket + 1);
        }
    }
    counts.resize(hi);
    h.counts = std::move(counts);
    return h;
}

namespace {

// R-7: h = (n-1)q, interpolate between floor(h) and floor(h)+1.
double quantile_r7(const std::vector<std::uint64_t>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return static_cast<double>(sorted[0]);
    const double h = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    const double a = static_cast<double>(sorted[lo]);
    if (lo + 1 >= n) return a;
    const double b = static_cast<double>(sorted[lo + 1]);
    return a + frac * (b - a);
}

}  // namespace

BoxplotData boxplot_data(const std::string& label, std::span<const LatencySample> samples) {
    if (samples.empty()) throw EmptyInputError("boxplot_data: empty series '" + label + "'");
    std::vector<std::uint64_t> v;
    v.reserve(samples.size());
    double sum = 0;
    for (const auto& s : samples) {
        v.push_back(s.latency.ns);
        sum += static_cast<double>(s.latency.ns);
    }
    std::sort(v.begin(), v.end());

    BoxplotData b;
    b.label = label;
    b.n = v.size();
    b.q1 = quantile_r7(v, 0.25);
    b.median = quantile_r7(v, 0.5);
    b.q3 = quantile_r7(v, 0.75);
    b.mean = sum / static_cast<double>(v.size());

    const double iqr = b.q3 - b.q1;
    const double fence_low = b.q1 - 1.5 * iqr;
    const double fence_high = b.q3 + 1.5 * iqr;
    // whiskers sit on the extreme data points inside the fences
    const auto lo = std::lower_bound(v.begin(), v.end(), fence_low);
    b.whisker_low = static_cast<double>(lo == v.end() ? v.front() : *lo);
    auto hi = std::upper_bound(v.begin(), v.end(), static_cast<std::uint64_t>(
                                                       std::floor(std::max(0.0, fence_high))));
    b.whisker_high = static_cast<double>(hi == v.begin() ? v.back() : *(hi - 1));
    // whiskers always bracket the box
    b.whisker_low = std::min(b.whisker_low, b.q1);
    b.whisker_high = std::max(b.whisker_high, b.q3);

    b.outliers = 0;
    for (std::uint64_t x : v) {
        const double d = static_cast<double>(x);
        if (d < b.whisker_low || d > b.whisker_high) ++b.outliers;
    }
    return b;
}

std::vector<BoxplotData> boxplot_data(const std::vector<LabeledSeries>& series) {
    std::vector<BoxplotData> out;
    out.reserve(series.size());
    for (const auto& s : series) out.push_back(boxplot_data(s.label, s.samples));
    return out;
}

Statistic Statistic::parse(const std::string& text) {
    if (text == "max") return {StatisticKind::Max, 0.0};
    if (text == "mean" || text == "avg") return {StatisticKind::Mean, 0.0};
    if (!text.empty() && text.front() == 'p') {
        try {
            const double pct = std::stod(text.substr(1));
            if (pct >= 0.0 && pct <= 100.0) return {StatisticKind::Quantile, pct / 100.0};
        } catch (const std::exception&) {
        }
    }
    throw ValidationError("unknown statistic '" + text + "' (want max|mean|p<q>)");
}

std::string Statistic::name() const {
    switch (kind) {
        case StatisticKind::Max: return "max";
        case StatisticKind::Mean: return "mean";
        case StatisticKind::Quantile: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "p%g", q * 100.0);
            return buf;
        }
    }
    return "?";
}

FeasibilityVerdict feasibility_report(TimeNs firing_latency, const TaskSpec& task) {
    return check_deadline(task, firing_latency);
}

FeasibilityVerdict feasibility_report(const SampleSeries& series, const TaskSpec& task,
                                      const Statistic& stat, bool allow_degraded) {
    if (series.meta.degraded && !allow_degraded) {
        throw ValidationError(
            "series was captured without RT privileges (degraded); "
            "a feasibility verdict would be meaningless. Pass --allow-degraded to override.");
    }
    if (series.samples.empty()) throw EmptyInputError("feasibility_report: empty series");

    TimeNs f;
    switch (stat.kind) {
        case StatisticKind::Max: {
            std::uint64_t m = 0;
            for (const auto& s : series.samples) m = std::max(m, s.latency.ns);
            f = TimeNs(m);
            break;
        }
        case StatisticKind::Mean: {
            const SummaryStats st = summarize(series.samples);
            f = TimeNs(static_cast<std::uint64_t>(std::llround(st.mean_ns)));
            break;
        }
        case StatisticKind::Quantile: {
            std::vector<std::uint64_t> v;
            v.reserve(series.samples.size());
            for (const auto& s : series.samples) v.push_back(s.latency.ns);
            std::sort(v.begin(), v.end());
            f = TimeNs(static_cast<std::uint64_t>(std::llround(quantile_r7(v, stat.q))));
            break;
        }
    }
    return check_deadline(task, f);
}

}  // namespace rtlat
