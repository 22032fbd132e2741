#pragma once

#include <string>
#include <vector>

namespace rffi::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Static line plot (markers + legend). Axis ranges always cover the data.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series);

} // namespace rffi::cli
