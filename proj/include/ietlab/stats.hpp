#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ietlab {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    f.n = x.size();
    if (f.n < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < f.n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(f.n);
    my /= static_cast<double>(f.n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

// Order-statistic quantile on a sorted vector, index ceil(p*n)-1.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    double k = std::ceil(p * static_cast<double>(sorted.size())) - 1.0;
    std::size_t i = k <= 0 ? 0 : static_cast<std::size_t>(k);
    if (i >= sorted.size()) i = sorted.size() - 1;
    return sorted[i];
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, p);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Survival-function fit: log S(t) ~ log C - b t on the tail range [q_lo, q_hi]
// of the absolute values.
struct SurvivalFit {
    double c_hat = 0.0;
    double b_hat = 0.0;
    double r_squared = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
    std::size_t points = 0;
};

inline SurvivalFit fit_exponential_tail(std::vector<double> abs_values,
                                        double p_lo = 0.5, double p_hi = 0.99) {
    SurvivalFit out;
    std::sort(abs_values.begin(), abs_values.end());
    const std::size_t n = abs_values.size();
    if (n < 4) return out;
    out.q50 = quantile_sorted(abs_values, 0.5);
    out.q90 = quantile_sorted(abs_values, 0.9);
    out.q99 = quantile_sorted(abs_values, 0.99);
    double tlo = quantile_sorted(abs_values, p_lo);
    double thi = quantile_sorted(abs_values, p_hi);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
        double t = abs_values[i];
        std::size_t exceed = n - 1 - i; // strictly above t
        if (t < tlo || t > thi || exceed == 0) continue;
        xs.push_back(t);
        ys.push_back(std::log(static_cast<double>(exceed) / static_cast<double>(n)));
    }
    LinearFit f = linear_fit(xs, ys);
    out.b_hat = -f.slope;
    out.c_hat = std::exp(f.intercept);
    out.r_squared = f.r_squared;
    out.points = f.n;
    return out;
}

// Kahan-compensated accumulator for long sums checked against tight bounds.
struct Kahan {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

} // namespace ietlab
