#pragma once

// Minimal standalone SVG charts. Output depends only on the inputs, so plot
// files are byte-identical across reruns.

#include <optional>
#include <string>
#include <vector>

namespace itrack::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Shaded region between lower and upper, drawn under the series.
struct Band {
    std::string label;
    std::vector<double> x;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// When set, x values are day offsets rendered with these tick labels.
    std::vector<std::pair<double, std::string>> x_ticks;
};

std::string line_chart(const Axes& axes, const std::vector<Series>& series,
                       const std::optional<Band>& band = std::nullopt);

/// One bar per entry; bars sharing a group id share a colour.
std::string bar_chart(const Axes& axes, const std::vector<double>& values, const std::vector<int>& groups);

/// Stacked panels sharing a width, e.g. equity curves above a PE trace.
std::string stack(const std::vector<std::string>& panels);

}  // namespace itrack::plot
