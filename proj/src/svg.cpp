#include "rotquant/svg.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rotquant::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

// Round a span up to 1/2/5 x 10^k for tick spacing.
double nice_step(double span, int target_ticks) {
    double raw = span / std::max(target_ticks, 1);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double r = raw / mag;
    double step = r <= 1.0 ? 1.0 : r <= 2.0 ? 2.0 : r <= 5.0 ? 5.0 : 10.0;
    return step * mag;
}

struct Frame {
    double x0, y0, w, h;    // pixel rectangle of the plotting area
    double xmin, xmax;      // data range (already log2 if requested)
    double ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void y_axis(std::string& out, const Frame& f) {
    double step = nice_step(f.ymax - f.ymin, 5);
    double first = std::ceil(f.ymin / step) * step;
    for (double v = first; v <= f.ymax + step * 1e-9; v += step) {
        double y = f.py(v);
        out += "<line x1='" + fmt(f.x0) + "' y1='" + fmt(y) + "' x2='" +
               fmt(f.x0 + f.w) + "' y2='" + fmt(y) +
               "' stroke='#dddddd' stroke-width='1'/>\n";
        out += "<text x='" + fmt(f.x0 - 6) + "' y='" + fmt(y + 4) +
               "' font-size='11' text-anchor='end'>" + fmt(v) + "</text>\n";
    }
}

void frame_border(std::string& out, const Frame& f) {
    out += "<rect x='" + fmt(f.x0) + "' y='" + fmt(f.y0) + "' width='" +
           fmt(f.w) + "' height='" + fmt(f.h) +
           "' fill='none' stroke='#333333' stroke-width='1'/>\n";
}

std::string header(double width, double height) {
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      fmt(width) + "' height='" + fmt(height) +
                      "' viewBox='0 0 " + fmt(width) + " " + fmt(height) +
                      "' font-family='sans-serif'>\n";
    out += "<!-- rotquant " ROTQUANT_VERSION " -->\n";
    out += "<rect width='100%' height='100%' fill='white'/>\n";
    return out;
}

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, bool log2_x) {
    if (series.empty()) throw InvalidConfig("line_chart: no series");
    const double width = 720, height = 480;
    Frame f{70, 50, width - 100, height - 120, 0, 1, 0, 1};

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    std::vector<double> xticks;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() ||
            (!s.yerr.empty() && s.yerr.size() != s.y.size())) {
            throw InvalidConfig("line_chart: ragged series");
        }
        for (size_t i = 0; i < s.x.size(); ++i) {
            double x = log2_x ? std::log2(s.x[i]) : s.x[i];
            double e = s.yerr.empty() ? 0.0 : s.yerr[i];
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, s.y[i] - e);
            ymax = std::max(ymax, s.y[i] + e);
            if (std::find(xticks.begin(), xticks.end(), s.x[i]) == xticks.end()) {
                xticks.push_back(s.x[i]);
            }
        }
    }
    std::sort(xticks.begin(), xticks.end());
    if (xmin == xmax) { xmin -= 1; xmax += 1; }
    if (ymin == ymax) { ymin -= 1; ymax += 1; }
    double pad = (ymax - ymin) * 0.08;
    f.xmin = xmin; f.xmax = xmax;
    f.ymin = ymin - pad; f.ymax = ymax + pad;

    std::string out = header(width, height);
    out += "<text x='" + fmt(width / 2) + "' y='26' font-size='15' "
           "text-anchor='middle'>" + esc(title) + "</text>\n";
    y_axis(out, f);
    for (double t : xticks) {
        double x = f.px(log2_x ? std::log2(t) : t);
        out += "<line x1='" + fmt(x) + "' y1='" + fmt(f.y0 + f.h) + "' x2='" +
               fmt(x) + "' y2='" + fmt(f.y0 + f.h + 4) +
               "' stroke='#333333'/>\n";
        out += "<text x='" + fmt(x) + "' y='" + fmt(f.y0 + f.h + 18) +
               "' font-size='11' text-anchor='middle'>" + fmt(t) + "</text>\n";
    }
    out += "<text x='" + fmt(f.x0 + f.w / 2) + "' y='" + fmt(height - 12) +
           "' font-size='12' text-anchor='middle'>" + esc(x_label) + "</text>\n";
    out += "<text x='18' y='" + fmt(f.y0 + f.h / 2) +
           "' font-size='12' text-anchor='middle' transform='rotate(-90 18 " +
           fmt(f.y0 + f.h / 2) + ")'>" + esc(y_label) + "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        std::string pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            double x = f.px(log2_x ? std::log2(s.x[i]) : s.x[i]);
            double y = f.py(s.y[i]);
            pts += fmt(x) + "," + fmt(y) + " ";
            if (!s.yerr.empty() && s.yerr[i] > 0) {
                double ylo = f.py(s.y[i] - s.yerr[i]);
                double yhi = f.py(s.y[i] + s.yerr[i]);
                out += "<line x1='" + fmt(x) + "' y1='" + fmt(ylo) + "' x2='" +
                       fmt(x) + "' y2='" + fmt(yhi) + "' stroke='" + color +
                       "' stroke-width='1'/>\n";
                for (double ye : {ylo, yhi}) {
                    out += "<line x1='" + fmt(x - 3) + "' y1='" + fmt(ye) +
                           "' x2='" + fmt(x + 3) + "' y2='" + fmt(ye) +
                           "' stroke='" + color + "' stroke-width='1'/>\n";
                }
            }
            out += "<circle cx='" + fmt(x) + "' cy='" + fmt(y) +
                   "' r='2.5' fill='" + color + "'/>\n";
        }
        out += "<polyline points='" + pts + "' fill='none' stroke='" + color +
               "' stroke-width='1.5'/>\n";
        double ly = 56.0 + 16.0 * static_cast<double>(si);
        out += "<line x1='" + fmt(f.x0 + f.w - 130) + "' y1='" + fmt(ly) +
               "' x2='" + fmt(f.x0 + f.w - 110) + "' y2='" + fmt(ly) +
               "' stroke='" + color + "' stroke-width='2'/>\n";
        out += "<text x='" + fmt(f.x0 + f.w - 104) + "' y='" + fmt(ly + 4) +
               "' font-size='11'>" + esc(s.name) + "</text>\n";
    }
    frame_border(out, f);
    out += "</svg>\n";
    return out;
}

std::vector<double> bin_counts(const std::vector<double>& values, double lo,
                               double hi, int nbins) {
    if (nbins < 1) throw InvalidConfig("bin_counts: need at least one bin");
    if (!(lo < hi)) throw InvalidConfig("bin_counts: empty range");
    std::vector<double> counts(static_cast<size_t>(nbins), 0.0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * nbins);
        b = std::clamp(b, 0, nbins - 1);
        counts[static_cast<size_t>(b)] += 1.0;
    }
    return counts;
}

std::string histogram_grid(const std::string& title,
                           const std::vector<HistPanel>& panels, int cols) {
    if (panels.empty()) throw InvalidConfig("histogram_grid: no panels");
    if (cols < 1) throw InvalidConfig("histogram_grid: cols must be >= 1");
    int rows = (static_cast<int>(panels.size()) + cols - 1) / cols;
    const double pw = 250, ph = 200, margin = 40, top = 46;
    double width = margin + cols * pw + 20;
    double height = top + rows * ph + 20;

    std::string out = header(width, height);
    out += "<text x='" + fmt(width / 2) + "' y='26' font-size='15' "
           "text-anchor='middle'>" + esc(title) + "</text>\n";

    for (size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        int r = static_cast<int>(p) / cols, c = static_cast<int>(p) % cols;
        Frame f{margin + c * pw + 20, top + r * ph + 18, pw - 50, ph - 56,
                panel.lo, panel.hi, 0, 1};
        double peak = 1.0;
        for (const auto& t : panel.traces) {
            for (double v : t.counts) peak = std::max(peak, v);
        }
        f.ymax = peak * 1.08;

        out += "<text x='" + fmt(f.x0 + f.w / 2) + "' y='" + fmt(f.y0 - 5) +
               "' font-size='12' text-anchor='middle'>" + esc(panel.title) +
               "</text>\n";
        for (size_t ti = 0; ti < panel.traces.size(); ++ti) {
            const auto& t = panel.traces[ti];
            const char* color = kPalette[ti % kPaletteSize];
            size_t nb = t.counts.size();
            if (nb == 0) continue;
            double bw = (panel.hi - panel.lo) / static_cast<double>(nb);
            std::string pts = fmt(f.px(panel.lo)) + "," + fmt(f.py(0)) + " ";
            for (size_t b = 0; b < nb; ++b) {
                double xl = panel.lo + bw * static_cast<double>(b);
                double y = f.py(t.counts[b]);
                pts += fmt(f.px(xl)) + "," + fmt(y) + " ";
                pts += fmt(f.px(xl + bw)) + "," + fmt(y) + " ";
            }
            pts += fmt(f.px(panel.hi)) + "," + fmt(f.py(0));
            out += "<polyline points='" + pts + "' fill='none' stroke='" +
                   color + "' stroke-width='1.3'/>\n";
            double ly = f.y0 + 12 + 13 * static_cast<double>(ti);
            out += "<text x='" + fmt(f.x0 + f.w - 4) + "' y='" + fmt(ly) +
                   "' font-size='10' text-anchor='end' fill='" + color + "'>" +
                   esc(t.name) + "</text>\n";
        }
        for (double t : {panel.lo, (panel.lo + panel.hi) / 2, panel.hi}) {
            double x = f.px(t);
            out += "<text x='" + fmt(x) + "' y='" + fmt(f.y0 + f.h + 14) +
                   "' font-size='10' text-anchor='middle'>" + fmt(t) +
                   "</text>\n";
        }
        frame_border(out, f);
    }
    out += "</svg>\n";
    return out;
}

} // namespace rotquant::svg
