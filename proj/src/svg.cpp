#include "semikin/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace semikin {

namespace {
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
}

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, bool log_y) {
    const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (!(y > 0.0)) continue;
                y = std::log10(y);
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) {
        if (log_y) y = std::log10(std::max(y, 1e-300));
        return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
    };

    std::string out;
    char buf[256];
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    out += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"24\" font-size=\"16\" font-family=\"sans-serif\">%s</text>\n",
                  ml, title.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#444\"/>\n",
                  ml, mt, W - ml - mr, H - mt - mb);
    out += buf;
    // axis labels
    for (int k = 0; k <= 4; ++k) {
        double xv = xmin + k * (xmax - xmin) / 4.0;
        double yv = ymin + k * (ymax - ymin) / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" font-family=\"sans-serif\" "
                      "text-anchor=\"middle\">%.3g</text>\n",
                      px(xv), H - mb + 18, xv);
        out += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" font-family=\"sans-serif\" "
                      "text-anchor=\"end\">%.3g</text>\n",
                      ml - 6, H - mb - k * (H - mt - mb) / 4.0 + 4, log_y ? std::pow(10.0, yv) : yv);
        out += buf;
    }
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % 7];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
            out += buf;
        }
        out += "\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"12\" font-family=\"sans-serif\" "
                      "fill=\"%s\">%s</text>\n",
                      W - mr - 160.0, mt + 16.0 + 16.0 * si, color, s.label.c_str());
        out += buf;
    }
    out += "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_svg_lines: cannot open " + path);
    f << out;
}

}  // namespace semikin
