#include "rtlat/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rtlat/errors.hpp"

namespace rtlat {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string us_cell(std::uint64_t ns) { return std::to_string(ns / 1000); }

std::string us_cell(double ns) {
    return std::to_string(static_cast<std::uint64_t>(ns) / 1000);
}

}  // namespace

std::string emit_table(const std::vector<SummaryRow>& rows) {
    if (rows.empty()) throw EmptyInputError("emit_table: no rows");
    const std::vector<std::string> heads = {"Test", "Label", "Min", "Avg", "Sigma", "Max"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(heads);
    for (const auto& r : rows) {
        cells.push_back({r.test, r.label, us_cell(r.stats.min.ns), us_cell(r.stats.mean_ns),
                         us_cell(r.stats.stddev_ns), us_cell(r.stats.max.ns)});
    }
    std::vector<std::size_t> widths(heads.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }
    std::ostringstream out;
    out << "# latencies in us, sigma is population stddev\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            if (i) out << "  ";
            // left-align text columns, right-align numbers
            const bool left = i < 2;
            const auto& c = cells[r][i];
            if (left) {
                out << c << std::string(widths[i] - c.size(), ' ');
            } else {
                out << std::string(widths[i] - c.size(), ' ') << c;
            }
        }
        out << "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] + (i ? 2 : 0);
            out << std::string(total, '-') << "\n";
        }
    }
    return out.str();
}

std::string emit_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "label,n,min_ns,mean_ns,stddev_ns,max_ns,threshold_ns,overshoot_count,"
           "overshoot_rate\n";
    for (const auto& r : rows) {
        std::string label = r.test;
        if (!r.label.empty()) label += "/" + r.label;
        out << label << ',' << r.stats.n << ',' << r.stats.min.ns << ','
            << fmt("%.17g", r.stats.mean_ns) << ',' << fmt("%.17g", r.stats.stddev_ns) << ','
            << r.stats.max.ns << ',';
        if (r.overshoot) {
            out << r.overshoot->threshold.ns << ',' << r.overshoot->count << ','
                << fmt("%.17g", r.overshoot->rate());
        } else {
            out << ",,";
        }
        out << "\n";
    }
    return out.str();
}

std::vector<SummaryRow> parse_csv(const std::string& csv) {
    std::vector<SummaryRow> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 9) fields.emplace_back();
        SummaryRow r;
        const auto slash = fields[0].find('/');
        if (slash == std::string::npos) {
            r.test = fields[0];
        } else {
            r.test = fields[0].substr(0, slash);
            r.label = fields[0].substr(slash + 1);
        }
        r.stats.n = std::stoull(fields[1]);
        r.stats.min = TimeNs(std::stoull(fields[2]));
        r.stats.mean_ns = std::stod(fields[3]);
        r.stats.stddev_ns = std::stod(fields[4]);
        r.stats.max = TimeNs(std::stoull(fields[5]));
        if (!fields[6].empty()) {
            OvershootReport o;
            o.threshold = TimeNs(std::stoull(fields[6]));
            o.count = std::stoull(fields[7]);
            o.n = r.stats.n;
            o.max_observed = r.stats.max;
            r.overshoot = o;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string emit_json(const std::vector<SummaryRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j{{"test", r.test},
                         {"label", r.label},
                         {"n", r.stats.n},
                         {"min_ns", r.stats.min.ns},
                         {"mean_ns", r.stats.mean_ns},
                         {"stddev_ns", r.stats.stddev_ns},
                         {"max_ns", r.stats.max.ns}};
        if (r.overshoot) {
            j["threshold_ns"] = r.overshoot->threshold.ns;
            j["overshoot_count"] = r.overshoot->count;
            j["overshoot_rate"] = r.overshoot->rate();
            j["overshoot_rate_percent"] = r.overshoot->rate_percent();
        }
        out.push_back(j);
    }
    return out.dump(2) + "\n";
}

std::string emit_boxplot_svg(const std::vector<BoxplotData>& boxes,
                             const std::vector<TimeNs>& reference_lines,
                             const std::string& title) {
    if (boxes.empty()) throw EmptyInputError("emit_boxplot_svg: no series");
    for (TimeNs r : reference_lines) {
        if (r.ns == 0) throw ValidationError("reference line must be > 0");
    }

    constexpr double kBoxSlot = 120.0, kLeft = 90.0, kTop = 50.0;
    constexpr double kPlotH = 400.0, kBottom = 60.0;
    const double plot_w = kBoxSlot * static_cast<double>(boxes.size());
    const double width = kLeft + plot_w + 40.0;
    const double height = kTop + kPlotH + kBottom;

    // log scale spanning data and reference lines, padded one decade step
    double lo = 1e18, hi = 0;
    for (const auto& b : boxes) {
        lo = std::min(lo, std::max(1.0, b.whisker_low));
        hi = std::max(hi, b.whisker_high);
        hi = std::max(hi, b.mean);
    }
    for (TimeNs r : reference_lines) {
        lo = std::min(lo, static_cast<double>(r.ns));
        hi = std::max(hi, static_cast<double>(r.ns));
    }
    if (hi <= lo) hi = lo * 10.0;
    const double llo = std::floor(std::log10(lo));
    const double lhi = std::ceil(std::log10(hi));
    auto y_of = [&](double v) {
        const double lv = std::log10(std::max(v, 1.0));
        return kTop + kPlotH * (1.0 - (lv - llo) / (lhi - llo));
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << fmt("%.0f", width) << "\" height=\"" << fmt("%.0f", height) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt("%.0f", width) << "\" height=\""
        << fmt("%.0f", height) << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg << "<text x=\"" << fmt("%.1f", width / 2)
            << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">"
            << title << "</text>\n";
    }

    // decade grid and axis labels
    for (double d = llo; d <= lhi; d += 1.0) {
        const double v = std::pow(10.0, d);
        const double y = y_of(v);
        svg << "<line x1=\"" << fmt("%.1f", kLeft) << "\" y1=\"" << fmt("%.2f", y)
            << "\" x2=\"" << fmt("%.1f", kLeft + plot_w) << "\" y2=\"" << fmt("%.2f", y)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt("%.1f", kLeft - 8) << "\" y=\"" << fmt("%.2f", y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_duration(TimeNs(static_cast<std::uint64_t>(v))) << "</text>\n";
    }

    // dashed threshold reference lines
    for (TimeNs r : reference_lines) {
        const double y = y_of(static_cast<double>(r.ns));
        svg << "<line x1=\"" << fmt("%.1f", kLeft) << "\" y1=\"" << fmt("%.2f", y)
            << "\" x2=\"" << fmt("%.1f", kLeft + plot_w) << "\" y2=\"" << fmt("%.2f", y)
            << "\" stroke=\"#cc0000\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
        svg << "<text x=\"" << fmt("%.1f", kLeft + plot_w + 4) << "\" y=\""
            << fmt("%.2f", y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#cc0000\">"
            << format_duration(r) << "</text>\n";
    }

    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double cx = kLeft + kBoxSlot * (static_cast<double>(i) + 0.5);
        const double half = 32.0;
        const double yq1 = y_of(b.q1), ymed = y_of(b.median), yq3 = y_of(b.q3);
        const double ywl = y_of(b.whisker_low), ywh = y_of(b.whisker_high);

        svg << "<line x1=\"" << fmt("%.2f", cx) << "\" y1=\"" << fmt("%.2f", ywl)
            << "\" x2=\"" << fmt("%.2f", cx) << "\" y2=\"" << fmt("%.2f", yq1)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<line x1=\"" << fmt("%.2f", cx) << "\" y1=\"" << fmt("%.2f", yq3)
            << "\" x2=\"" << fmt("%.2f", cx) << "\" y2=\"" << fmt("%.2f", ywh)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        for (double yw : {ywl, ywh}) {
            svg << "<line x1=\"" << fmt("%.2f", cx - half / 2) << "\" y1=\""
                << fmt("%.2f", yw) << "\" x2=\"" << fmt("%.2f", cx + half / 2)
                << "\" y2=\"" << fmt("%.2f", yw) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        }
        svg << "<rect x=\"" << fmt("%.2f", cx - half) << "\" y=\"" << fmt("%.2f", yq3)
            << "\" width=\"" << fmt("%.1f", 2 * half) << "\" height=\""
            << fmt("%.2f", std::max(0.5, yq1 - yq3))
            << "\" fill=\"#e8eef7\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<line x1=\"" << fmt("%.2f", cx - half) << "\" y1=\"" << fmt("%.2f", ymed)
            << "\" x2=\"" << fmt("%.2f", cx + half) << "\" y2=\"" << fmt("%.2f", ymed)
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        // mean marker in blue
        svg << "<circle cx=\"" << fmt("%.2f", cx) << "\" cy=\"" << fmt("%.2f", y_of(b.mean))
            << "\" r=\"4\" fill=\"#1f4fd8\"/>\n";
        if (b.outliers > 0) {
            svg << "<text x=\"" << fmt("%.2f", cx) << "\" y=\"" << fmt("%.2f", ywh - 8)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                << b.outliers << " outliers</text>\n";
        }
        svg << "<text x=\"" << fmt("%.2f", cx) << "\" y=\"" << fmt("%.1f", kTop + kPlotH + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << b.label << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace rtlat
