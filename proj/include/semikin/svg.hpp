#pragma once

#include <string>
#include <vector>

namespace semikin {

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

/// Minimal line chart (pure presentation; nothing downstream reads these).
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, bool log_y = false);

}  // namespace semikin
