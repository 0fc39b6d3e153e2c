#include "signgate/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace signgate {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_report_csv(std::ostream& out, std::span<const ScenarioReport> reports) {
    out << "scenario_id,procedure,mean_sep,se_sep,mean_signs,se_signs,replicates\n";
    for (const auto& r : reports) {
        for (const auto& p : r.procedures) {
            out << r.scenario_id << ',' << procedure_name(p.procedure) << ',' << format_real(p.mean_sep) << ','
                << format_real(p.se_sep) << ',' << format_real(p.mean_signs) << ',' << format_real(p.se_signs)
                << ',' << p.replicates << '\n';
        }
    }
}

namespace {

constexpr double kPanelWidth = 420.0;
constexpr double kPanelHeight = 300.0;
constexpr double kMargin = 50.0;

const char* colour(Procedure p) {
    switch (p) {
    case Procedure::by:
        return "#1b9e77";
    case Procedure::lc:
        return "#d95f02";
    case Procedure::nlc:
        return "#7570b3";
    case Procedure::tco:
        return "#e7298a";
    case Procedure::tcea:
        return "#333333";
    }
    return "#000000";
}

struct Series {
    std::vector<double> mean;
    std::vector<double> se;
};

void panel(std::ostream& out, double x0, const std::string& title, const std::map<Procedure, Series>& series,
           std::size_t points, double target) {
    double lo = target > 0.0 ? target : 1e300;
    double hi = target > 0.0 ? target : -1e300;
    for (const auto& [_, s] : series) {
        for (std::size_t i = 0; i < s.mean.size(); ++i) {
            lo = std::min(lo, s.mean[i] - 1.96 * s.se[i]);
            hi = std::max(hi, s.mean[i] + 1.96 * s.se[i]);
        }
    }
    lo = std::min(lo, 0.0);
    if (hi <= lo) {
        hi = lo + 1.0;
    }
    const double plot_w = kPanelWidth - 2 * kMargin;
    const double plot_h = kPanelHeight - 2 * kMargin;
    auto px = [&](double i, std::size_t k, std::size_t nk) {
        const double slot = plot_w / static_cast<double>(std::max<std::size_t>(points, 1));
        return x0 + kMargin + slot * (i + 0.5) + (static_cast<double>(k) - 0.5 * (nk - 1)) * 6.0;
    };
    auto py = [&](double v) { return kMargin + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    out << "<g>\n<text x=\"" << x0 + kPanelWidth / 2 << "\" y=\"25\" text-anchor=\"middle\">" << title
        << "</text>\n";
    out << "<rect x=\"" << x0 + kMargin << "\" y=\"" << kMargin << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<text x=\"" << x0 + 5 << "\" y=\"" << py(hi) + 4 << "\" font-size=\"10\">" << format_real(hi).substr(0, 6)
        << "</text>\n";
    out << "<text x=\"" << x0 + 5 << "\" y=\"" << py(lo) + 4 << "\" font-size=\"10\">" << format_real(lo).substr(0, 6)
        << "</text>\n";
    if (target > 0.0) {
        out << "<line x1=\"" << x0 + kMargin << "\" x2=\"" << x0 + kMargin + plot_w << "\" y1=\"" << py(target)
            << "\" y2=\"" << py(target) << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    }
    std::size_t k = 0;
    for (const auto& [proc, s] : series) {
        for (std::size_t i = 0; i < s.mean.size(); ++i) {
            const double x = px(static_cast<double>(i), k, series.size());
            out << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << py(s.mean[i] - 1.96 * s.se[i])
                << "\" y2=\"" << py(s.mean[i] + 1.96 * s.se[i]) << "\" stroke=\"" << colour(proc) << "\"/>\n";
            out << "<circle cx=\"" << x << "\" cy=\"" << py(s.mean[i]) << "\" r=\"3\" fill=\"" << colour(proc)
                << "\"/>\n";
        }
        ++k;
    }
    out << "</g>\n";
}

} // namespace

void write_report_svg(std::ostream& out, std::span<const ScenarioReport> reports, double target) {
    std::map<Procedure, Series> sep;
    std::map<Procedure, Series> signs;
    for (const auto& r : reports) {
        for (const auto& p : r.procedures) {
            sep[p.procedure].mean.push_back(p.mean_sep);
            sep[p.procedure].se.push_back(p.se_sep);
            signs[p.procedure].mean.push_back(p.mean_signs);
            signs[p.procedure].se.push_back(p.se_signs);
        }
    }
    const double height = kPanelHeight + 20.0 * static_cast<double>(sep.size()) + 20.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanelWidth << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    panel(out, 0.0, "mean SEP (+/- 1.96 MC SE)", sep, reports.size(), target);
    panel(out, kPanelWidth, "mean signs inferred (+/- 1.96 MC SE)", signs, reports.size(), 0.0);
    double y = kPanelHeight + 10.0;
    for (const auto& [proc, _] : sep) {
        out << "<circle cx=\"60\" cy=\"" << y << "\" r=\"4\" fill=\"" << colour(proc) << "\"/><text x=\"70\" y=\""
            << y + 4 << "\">" << procedure_name(proc) << "</text>\n";
        y += 20.0;
    }
    std::size_t i = 0;
    for (const auto& r : reports) {
        out << "<!-- point " << i++ << ": " << r.scenario_id << " -->\n";
    }
    out << "</svg>\n";
}

} // namespace signgate
