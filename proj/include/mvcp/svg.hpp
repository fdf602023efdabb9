#pragma once

#include <string>
#include <vector>

#include "mvcp/matrix.hpp"

namespace mvcp::svg {

/// Static heatmap: one cell per matrix entry, shaded by value in [0, 1],
/// with the value printed to two decimals. Rows and columns carry labels.
std::string heatmap(const Matrix& m, const std::vector<std::string>& labels, const std::string& title,
                    const std::string& row_axis, const std::string& col_axis);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Scatter plot with one colour per series and a legend.
std::string scatter(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                    const std::string& y_label);

std::string escape(const std::string& text);

}  // namespace mvcp::svg
