#pragma once

// Log-log convergence plots written as plain SVG.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nozzle {

struct PlotSeries {
    std::string name;
    std::vector<double> y;
    std::optional<double> slope;  ///< fitted rate, printed next to the legend entry
};

/// Metric against 1/gamma on log-log axes with decade ticks, 800x600 viewBox,
/// one polyline per series. Nonpositive samples are skipped.
std::string convergence_svg(const std::string& title, const std::vector<double>& gammas,
                            const std::vector<PlotSeries>& series);

void write_convergence_svg(const std::filesystem::path& path, const std::string& title,
                           const std::vector<double>& gammas, const std::vector<PlotSeries>& series);

}  // namespace nozzle
