#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace ietlab {

// Minimal self-contained SVG plots; no external dependencies.
namespace svg {

inline std::string header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
           std::to_string(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string fnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline void write_histogram(const std::string& path, const std::vector<double>& values,
                            int bins = 48, const std::string& title = "") {
    if (values.empty()) return;
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1.0;
    std::vector<int> count(bins, 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        ++count[b];
    }
    int cmax = 1;
    for (int c : count) cmax = std::max(cmax, c);
    const int W = 640, H = 400, M = 44;
    std::ofstream out(path);
    out << header(W, H);
    out << "<text x=\"12\" y=\"20\" font-size=\"13\" font-family=\"monospace\">" << title
        << "</text>\n";
    double bw = static_cast<double>(W - 2 * M) / bins;
    for (int b = 0; b < bins; ++b) {
        double bh = static_cast<double>(count[b]) / cmax * (H - 2 * M);
        out << "<rect x=\"" << fnum(M + b * bw) << "\" y=\"" << fnum(H - M - bh) << "\" width=\""
            << fnum(bw * 0.92) << "\" height=\"" << fnum(bh)
            << "\" fill=\"#41689c\"/>\n";
    }
    out << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << M << "\" y=\"" << H - M + 16 << "\" font-size=\"11\">" << fnum(lo)
        << "</text>\n<text x=\"" << W - M - 30 << "\" y=\"" << H - M + 16
        << "\" font-size=\"11\">" << fnum(hi) << "</text>\n";
    out << "</svg>\n";
}

// Empirical log-survival of |samples| with the fitted line log C - b t.
inline void write_log_survival(const std::string& path, std::vector<double> abs_values,
                               double c_hat, double b_hat, const std::string& title = "") {
    if (abs_values.size() < 4) return;
    std::sort(abs_values.begin(), abs_values.end());
    const std::size_t n = abs_values.size();
    const int W = 640, H = 400, M = 48;
    double tmax = abs_values.back();
    if (tmax <= 0) return;
    double ymin = std::log(1.0 / static_cast<double>(n)) - 0.5;
    std::ofstream out(path);
    out << header(W, H);
    out << "<text x=\"12\" y=\"20\" font-size=\"13\" font-family=\"monospace\">" << title
        << "</text>\n";
    auto X = [&](double t) { return M + t / tmax * (W - 2 * M); };
    auto Y = [&](double ls) { return M + (0.0 - ls) / (0.0 - ymin) * (H - 2 * M); };
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t exceed = n - 1 - i;
        if (exceed == 0) continue;
        double ls = std::log(static_cast<double>(exceed) / static_cast<double>(n));
        if (ls < ymin) continue;
        out << "<circle cx=\"" << fnum(X(abs_values[i])) << "\" cy=\"" << fnum(Y(ls))
            << "\" r=\"1.6\" fill=\"#b44\"/>\n";
    }
    if (b_hat > 0 && c_hat > 0) {
        double t1 = std::min(tmax, (std::log(c_hat) - ymin) / b_hat);
        out << "<line x1=\"" << fnum(X(0)) << "\" y1=\"" << fnum(Y(std::log(c_hat)))
            << "\" x2=\"" << fnum(X(t1)) << "\" y2=\"" << fnum(Y(std::log(c_hat) - b_hat * t1))
            << "\" stroke=\"#274\" stroke-width=\"1.5\"/>\n";
    }
    out << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
}

} // namespace svg
} // namespace ietlab
