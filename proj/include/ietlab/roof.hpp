#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ietlab/errors.hpp"
#include "ietlab/iet.hpp"

namespace ietlab {

// Piecewise-smooth part of a roof; one affine piece per exchanged interval.
struct PiecewiseLinear {
    std::vector<double> slopes;
    std::vector<double> intercepts;

    double eval(const std::vector<double>& endpoints, double x) const {
        std::size_t i = 0;
        while (i + 1 < slopes.size() && x >= endpoints[i + 1]) ++i;
        return slopes[i] * x + intercepts[i];
    }

    static PiecewiseLinear constant(std::size_t d, double c) {
        return PiecewiseLinear{std::vector<double>(d, 0.0), std::vector<double>(d, c)};
    }

    double integral(const std::vector<double>& endpoints) const {
        double s = 0.0;
        for (std::size_t i = 0; i < slopes.size(); ++i) {
            double a = endpoints[i], b = endpoints[i + 1];
            s += slopes[i] * 0.5 * (b * b - a * a) + intercepts[i] * (b - a);
        }
        return s;
    }

    // Total variation on [0,1]: in-piece variation plus interior jumps.
    double variation(const std::vector<double>& endpoints) const {
        double v = 0.0;
        for (std::size_t i = 0; i < slopes.size(); ++i)
            v += std::fabs(slopes[i]) * (endpoints[i + 1] - endpoints[i]);
        for (std::size_t i = 1; i < slopes.size(); ++i) {
            double left = slopes[i - 1] * endpoints[i] + intercepts[i - 1];
            double right = slopes[i] * endpoints[i] + intercepts[i];
            v += std::fabs(right - left);
        }
        return v;
    }

    double sup_abs_slope() const {
        double m = 0.0;
        for (double s : slopes) m = std::max(m, std::fabs(s));
        return m;
    }

    double sup_abs(const std::vector<double>& endpoints) const {
        double m = 0.0;
        for (std::size_t i = 0; i < slopes.size(); ++i) {
            m = std::max(m, std::fabs(slopes[i] * endpoints[i] + intercepts[i]));
            m = std::max(m, std::fabs(slopes[i] * endpoints[i + 1] + intercepts[i]));
        }
        return m;
    }
};

// Roof with logarithmic singularities at the endpoints beta_i of the host
// IET: f(x) = sum C_i^+ Log(x - beta_i) + sum C_i^- Log(beta_i - x) + g(x),
// with Log(y) = -log(y) for 0 < y <= 1 and 0 otherwise.
class SymLogRoof {
public:
    SymLogRoof() = default;

    SymLogRoof(std::vector<double> endpoints, std::vector<double> c_plus,
               std::vector<double> c_minus, PiecewiseLinear g, bool symmetric,
               long positivity_grid = 10'000)
        : endpoints_(std::move(endpoints)), c_plus_(std::move(c_plus)),
          c_minus_(std::move(c_minus)), g_(std::move(g)), symmetric_(symmetric) {
        const std::size_t d = endpoints_.size() - 1;
        if (c_plus_.size() != d || c_minus_.size() != d)
            throw Error("coefficient vectors must have length d");
        if (g_.slopes.size() != d || g_.intercepts.size() != d)
            throw Error("piecewise part must have one piece per interval");
        double sp = 0.0, sm = 0.0;
        bool any = false;
        for (double c : c_plus_) {
            if (c < 0) throw Error("negative log coefficient");
            sp += c;
            any = any || c > 0;
        }
        for (double c : c_minus_) {
            if (c < 0) throw Error("negative log coefficient");
            sm += c;
            any = any || c > 0;
        }
        if (!any) throw Error("all log coefficients vanish");
        if (symmetric && std::fabs(sp - sm) > 1e-12 * std::max(1.0, sp + sm))
            throw AsymmetricCoefficients();
        compute_mean();
        if (positivity_grid > 0) certify_positive(positivity_grid);
    }

    const std::vector<double>& endpoints() const { return endpoints_; }
    const std::vector<double>& c_plus() const { return c_plus_; }   // C_i^+, i = 0..d-1
    const std::vector<double>& c_minus() const { return c_minus_; } // C_i^-, i = 1..d
    const PiecewiseLinear& g() const { return g_; }
    bool symmetric() const { return symmetric_; }
    std::size_t intervals() const { return endpoints_.size() - 1; }

    // Endpoint-indexed coefficients, zero where a side does not exist.
    double cplus_at(std::size_t i) const { return i < c_plus_.size() ? c_plus_[i] : 0.0; }
    double cminus_at(std::size_t i) const { return i == 0 ? 0.0 : c_minus_[i - 1]; }

    double coefficient_sum() const {
        double s = 0.0;
        for (double c : c_plus_) s += c;
        for (double c : c_minus_) s += c;
        return s;
    }

    double mean() const { return mean_; }

    double eval(double x, int order = 0, double tol = 1e-12) const {
        const std::size_t d = intervals();
        for (std::size_t i = 0; i <= d; ++i)
            if (std::fabs(x - endpoints_[i]) < tol) throw AtSingularity(i);
        double acc = 0.0;
        for (std::size_t i = 0; i <= d; ++i) {
            double dist = x - endpoints_[i];
            bool right = dist > 0.0;
            double a = right ? dist : -dist;
            double cp = cplus_at(i), cm = cminus_at(i);
            if (order == 0) {
                double w = right ? cp : cm;
                if (w != 0.0) acc -= w * std::log(a);
            } else if (order == 1) {
                double w = right ? -cp : cm;
                if (w != 0.0) acc += w / a;
            } else {
                double w = right ? cp : cm;
                if (w != 0.0) acc += w / (a * a);
            }
        }
        std::size_t j = 0;
        while (j + 1 < d && x >= endpoints_[j + 1]) ++j;
        if (order == 0) acc += g_.slopes[j] * x + g_.intercepts[j];
        else if (order == 1) acc += g_.slopes[j];
        return acc;
    }

    // Roof scaled so that the mean becomes `target` (log coefficients and g).
    SymLogRoof rescaled_to_mean(double target = 1.0) const {
        double s = target / mean_;
        std::vector<double> cp = c_plus_, cm = c_minus_;
        for (auto& c : cp) c *= s;
        for (auto& c : cm) c *= s;
        PiecewiseLinear g2 = g_;
        for (auto& v : g2.slopes) v *= s;
        for (auto& v : g2.intercepts) v *= s;
        return SymLogRoof(endpoints_, cp, cm, g2, symmetric_, 0);
    }

private:
    void compute_mean() {
        // closed forms: int_0^L -log u du = L (1 - log L)
        double m = g_.integral(endpoints_);
        const std::size_t d = intervals();
        double total = endpoints_.back();
        for (std::size_t i = 0; i < d; ++i) {
            double len = total - endpoints_[i]; // support of Log(x - beta_i)
            if (c_plus_[i] > 0) m += c_plus_[i] * len * (1.0 - std::log(len));
        }
        for (std::size_t i = 1; i <= d; ++i) {
            double len = endpoints_[i];
            if (c_minus_[i - 1] > 0) m += c_minus_[i - 1] * len * (1.0 - std::log(len));
        }
        mean_ = m;
    }

    void certify_positive(long grid) const {
        const std::size_t d = intervals();
        for (std::size_t i = 0; i < d; ++i) {
            double a = endpoints_[i], b = endpoints_[i + 1];
            for (long k = 0; k < grid; ++k) {
                double x = a + (b - a) * (static_cast<double>(k) + 0.5) /
                                   static_cast<double>(grid);
                if (!(eval(x) > 0)) throw NonPositiveRoof(x);
            }
        }
    }

    std::vector<double> endpoints_;
    std::vector<double> c_plus_;
    std::vector<double> c_minus_;
    PiecewiseLinear g_;
    bool symmetric_ = false;
    double mean_ = 0.0;
};

inline SymLogRoof make_roof(const std::vector<double>& endpoints, std::vector<double> c_plus,
                            std::vector<double> c_minus, PiecewiseLinear g, bool symmetric) {
    return SymLogRoof(endpoints, std::move(c_plus), std::move(c_minus), std::move(g), symmetric);
}

// The standard test roof over a given IET: unit coefficients at every
// singularity side plus a constant, symmetric by construction.
inline SymLogRoof symmetric_unit_roof(const Iet& t, double constant = 1.0, double coeff = 1.0) {
    const std::size_t d = t.size();
    std::vector<double> cp(d, coeff), cm(d, coeff);
    return SymLogRoof(t.endpoints(), cp, cm, PiecewiseLinear::constant(d, constant), true);
}

} // namespace ietlab
