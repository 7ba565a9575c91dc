// rfaug/report.hpp
//
// Static SVG line plots and a plain-text summary built from sweep CSVs.
#pragma once

#include "rfaug/sweep.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rfaug::report {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points; // sorted by x
};

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

struct Figure {
    std::string file_name;
    std::string svg;
};

// Per method: mean accuracy against |K| (supervised rows) or |A| (blind
// rows), one series per arm. A non-empty delta table adds the delta sweep.
std::vector<Figure> sweep_figures(const std::vector<sweep::Row>& rows, const std::vector<sweep::DeltaRow>& deltas);

// Fixed-width table of mean accuracies per method and size.
std::string summary_table(const std::vector<sweep::Row>& rows);

} // namespace rfaug::report
