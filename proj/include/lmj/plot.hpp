#pragma once

#include <string>

#include "lmj/amjpf.hpp"

namespace lmj {

/// Static SVG with two stacked panels: the anomaly signal normalized by the
/// threshold (dashed line at 1), and a green/red strip of the final flags.
std::string anomaly_plot_svg(const AnomalyReport& report, const std::string& title);

}  // namespace lmj
