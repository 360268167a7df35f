#pragma once

#include <string>
#include <vector>

namespace rotquant::svg {

/// One line-chart series: points with optional symmetric error bars.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr; // empty or same length as y
};

/// Static line chart; x drawn on a log2 scale when log2_x is set (ticks at
/// the data's x values). Output is deterministic for identical inputs.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, bool log2_x);

/// One histogram trace inside a panel (shared bin edges within the panel).
struct HistTrace {
    std::string name;
    std::vector<double> counts;
};

struct HistPanel {
    std::string title;
    double lo = 0.0;
    double hi = 1.0; // shared bin range; counts.size() bins per trace
    std::vector<HistTrace> traces;
};

/// Grid of step-histogram panels, `cols` panels per row.
std::string histogram_grid(const std::string& title,
                           const std::vector<HistPanel>& panels, int cols);

/// Equal-width bin counts of `values` over [lo, hi]; values outside the
/// range land in the edge bins.
std::vector<double> bin_counts(const std::vector<double>& values, double lo,
                               double hi, int nbins);

} // namespace rotquant::svg
