#include "mvcp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mvcp::svg {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string heatmap(const Matrix& m, const std::vector<std::string>& labels, const std::string& title,
                    const std::string& row_axis, const std::string& col_axis) {
    const std::size_t k = m.rows();
    const int cell = 48;
    std::size_t longest = 0;
    for (const auto& l : labels) longest = std::max(longest, l.size());
    const int margin = 40 + static_cast<int>(longest) * 7;
    const int width = margin + static_cast<int>(k) * cell + 20;
    const int height = margin + static_cast<int>(k) * cell + 40;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<text x=\"" << margin + static_cast<int>(k) * cell / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\">" << escape(col_axis) << "</text>\n";
    out << "<text x=\"12\" y=\"" << margin + static_cast<int>(k) * cell / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 " << margin + static_cast<int>(k) * cell / 2 << ")\">"
        << escape(row_axis) << "</text>\n";
    for (std::size_t i = 0; i < k; ++i) {
        const int y = margin + static_cast<int>(i) * cell;
        out << "<text x=\"" << margin - 4 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"end\">"
            << escape(labels.at(i)) << "</text>\n";
        const int x = margin + static_cast<int>(i) * cell + cell / 2;
        out << "<text x=\"" << x << "\" y=\"" << margin - 6 << "\" text-anchor=\"start\" transform=\"rotate(-45 " << x
            << ' ' << margin - 6 << ")\">" << escape(labels.at(i)) << "</text>\n";
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = std::clamp(m(i, j), 0.0, 1.0);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            const int x = margin + static_cast<int>(j) * cell;
            const int y = margin + static_cast<int>(i) * cell;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
                << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#cccccc\"/>";
            out << "<text class=\"value\" data-row=\"" << i << "\" data-col=\"" << j << "\" data-value=\""
                << fixed(m(i, j), 6) << "\" x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
                << "\" text-anchor=\"middle\" fill=\"" << (v > 0.5 ? "#ffffff" : "#000000") << "\">"
                << fixed(m(i, j), 2) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string scatter(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                    const std::string& y_label) {
    const int width = 640, height = 440;
    const int left = 60, right = 170, top = 36, bottom = 50;
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    auto pad = [](double& lo, double& hi) {
        const double span = hi - lo;
        const double p = span > 0 ? 0.05 * span : 0.05 * std::max(1.0, std::abs(lo));
        lo -= p;
        hi += p;
    };
    pad(x_lo, x_hi);
    pad(y_lo, y_hi);
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
        out << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << fixed(xv, 2) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(yv) + 4, 1) << "\" text-anchor=\"end\">"
            << fixed(yv, 2) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"14\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << top + plot_h / 2 << ")\">" << escape(y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = kPalette[s % std::size(kPalette)];
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out << "<circle cx=\"" << fixed(px(series[s].x[i]), 2) << "\" cy=\"" << fixed(py(series[s].y[i]), 2)
                << "\" r=\"4\" fill=\"" << colour << "\" fill-opacity=\"0.75\"/>\n";
        const int ly = top + 10 + static_cast<int>(s) * 18;
        out << "<circle cx=\"" << width - right + 16 << "\" cy=\"" << ly << "\" r=\"5\" fill=\"" << colour << "\"/>";
        out << "<text x=\"" << width - right + 26 << "\" y=\"" << ly + 4 << "\">" << escape(series[s].name)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace mvcp::svg
