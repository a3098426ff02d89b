#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ietlab/iet.hpp"
#include "ietlab/kernels/kernels.hpp"
#include "ietlab/rng.hpp"
#include "ietlab/roof.hpp"
#include "ietlab/stats.hpp"

namespace ietlab {

struct ClosestVisitRecord {
    std::vector<double> m_plus;  // (d+1) entries; m_plus[i] = m_i^+(x,r), +inf if unseen
    std::vector<double> m_minus; // m_minus[i] = m_i^-(x,r)
    std::vector<long> arg_plus;  // orbit step realizing each minimum, -1 if unseen
    std::vector<long> arg_minus;
    double m_global = kernels::kInf;

    double x_plus(std::size_t i, const std::vector<double>& beta) const {
        return beta[i] + m_plus[i];
    }
    double x_minus(std::size_t i, const std::vector<double>& beta) const {
        return beta[i] - m_minus[i];
    }
};

// One-sided minima of orbit distances to every endpoint over O(x, r).
inline ClosestVisitRecord closest_visits(const Iet& t, double x, long r) {
    if (r < 1) throw Error("orbit length must be positive");
    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::ClosestTrack track;
    track.init(it.d, 1, /*args=*/true);
    // roof tables with zero coefficients: only the distance tracking is used
    kernels::RoofTables rt;
    rt.d = it.d;
    for (int i = 0; i <= it.d; ++i) rt.beta[i] = it.beta[i];
    double acc = 0.0;
    kernels::scalar_funcs().birkhoff(it, rt, 0, &x, &acc, 1, r, nullptr, &track);
    ClosestVisitRecord rec;
    rec.m_plus = track.m_plus;
    rec.m_minus = track.m_minus;
    rec.arg_plus = track.arg_plus;
    rec.arg_minus = track.arg_minus;
    for (double v : rec.m_plus) rec.m_global = std::min(rec.m_global, v);
    for (double v : rec.m_minus) rec.m_global = std::min(rec.m_global, v);
    if (rec.m_global == 0.0) throw EndpointHit(0, 0);
    return rec;
}

// Two-sided Birkhoff sum of f^(order); negative n sums over the backward
// orbit with the matching sign convention.
inline double birkhoff_sum(const Iet& t, const SymLogRoof& f, double x, long n, int order = 0,
                           double tol = 1e-12) {
    if (n == 0) return 0.0;
    double sum = 0.0;
    if (n > 0) {
        double v = x;
        for (long k = 0; k < n; ++k) {
            std::size_t which = 0;
            if (t.near_endpoint(v, tol, &which)) throw EndpointHit(k, which);
            sum += f.eval(v, order, tol);
            v = t.apply(v);
        }
        return sum;
    }
    Iet inv = t.inverse();
    double v = x;
    for (long k = 0; k < -n; ++k) {
        v = inv.apply(v);
        std::size_t which = 0;
        if (t.near_endpoint(v, tol, &which)) throw EndpointHit(-k - 1, which);
        sum += f.eval(v, order, tol);
    }
    return -sum;
}

// Compensated Birkhoff sum of a plain piecewise-linear observable; used where
// 1e-9 absolute slack must survive 1e7-step sums.
inline double birkhoff_sum_plain(const Iet& t, const PiecewiseLinear& g, double x, long n,
                                 std::vector<long> checkpoints = {},
                                 std::vector<double>* checkpoint_values = nullptr) {
    Kahan acc;
    double v = x;
    std::size_t ci = 0;
    for (long k = 0; k < n; ++k) {
        if (checkpoint_values && ci < checkpoints.size() && k == checkpoints[ci]) {
            checkpoint_values->push_back(acc.sum);
            ++ci;
        }
        acc.add(g.eval(t.endpoints(), v));
        v = t.apply(v);
    }
    if (checkpoint_values && ci < checkpoints.size() && n == checkpoints[ci])
        checkpoint_values->push_back(acc.sum);
    return acc.sum;
}

// Trimmed sum: the plain sum minus, per singularity side, the single closest
// visit's contribution; the piecewise part is never trimmed. Orders 0 and 1.
inline double trimmed_birkhoff_sum(const Iet& t, const SymLogRoof& f, double x, long r,
                                   int order = 0, double tol = 1e-12) {
    if (r < 1) throw Error("trimmed sums need r >= 1");
    if (order != 0 && order != 1) throw Error("trimmed sums are defined for orders 0 and 1");
    double full = birkhoff_sum(t, f, x, r, order, tol);
    ClosestVisitRecord rec = closest_visits(t, x, r);
    const std::size_t d = f.intervals();
    double trim = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
        double cp = f.cplus_at(i), cm = f.cminus_at(i);
        if (cp > 0 && std::isfinite(rec.m_plus[i])) {
            if (order == 0) trim += cp * (-std::log(rec.m_plus[i]));
            else trim += cp * (-1.0 / rec.m_plus[i]);
        }
        if (cm > 0 && std::isfinite(rec.m_minus[i])) {
            if (order == 0) trim += cm * (-std::log(rec.m_minus[i]));
            else trim += cm * (1.0 / rec.m_minus[i]);
        }
    }
    return full - trim;
}

struct FlowPoint {
    double x = 0.0;
    double s = 0.0;
};

struct FlowResult {
    FlowPoint point;
    long long crossings = 0; // N with S_N f(x) <= s+t < S_{N+1} f(x)
};

inline FlowResult flow_evaluate(const Iet& t, const SymLogRoof& f, FlowPoint p, double time,
                                long long step_budget = 10'000'000, double tol = 1e-12) {
    FlowResult out;
    double v = p.x;
    double fiber = p.s + time;
    long long n = 0;
    long long budget = step_budget;
    auto guard = [&](double y) {
        std::size_t which = 0;
        if (t.near_endpoint(y, tol, &which)) throw EndpointHit(static_cast<long>(n), which);
    };
    guard(v);
    if (fiber >= 0) {
        while (true) {
            double fv = f.eval(v, 0, tol);
            if (fiber < fv) break;
            fiber -= fv;
            v = t.apply(v);
            ++n;
            guard(v);
            if (--budget < 0) throw StepBudgetExceeded(step_budget);
        }
    } else {
        Iet inv = t.inverse();
        while (fiber < 0) {
            v = inv.apply(v);
            guard(v);
            fiber += f.eval(v, 0, tol);
            --n;
            if (--budget < 0) throw StepBudgetExceeded(step_budget);
        }
    }
    out.point = {v, fiber};
    out.crossings = n;
    return out;
}

// ---- batched drivers over the runtime-selected kernels ----

struct BatchBirkhoff {
    std::vector<double> sums;
    std::vector<double> end_points;
    std::vector<double> min_dist; // smallest endpoint distance seen per lane
};

inline BatchBirkhoff birkhoff_batch(const Iet& t, const SymLogRoof& f, int order,
                                    std::vector<double> xs, long steps,
                                    kernels::ClosestTrack* track = nullptr) {
    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::RoofTables rt = kernels::make_roof_tables(f);
    BatchBirkhoff out;
    out.sums.assign(xs.size(), 0.0);
    out.min_dist.assign(xs.size(), kernels::kInf);
    kernels::active().birkhoff(it, rt, order, xs.data(), out.sums.data(), xs.size(), steps,
                               out.min_dist.data(), track);
    out.end_points = std::move(xs);
    return out;
}

struct BatchFlow {
    std::vector<double> x, s;
    std::vector<long long> crossings;
    std::vector<std::uint8_t> flagged;
    bool budget_ok = true;
};

inline BatchFlow flow_batch(const Iet& t, const SymLogRoof& f, std::vector<double> xs,
                            std::vector<double> ss, double time, long long step_budget,
                            double tol = 1e-12) {
    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::RoofTables rt = kernels::make_roof_tables(f);
    BatchFlow out;
    out.x = std::move(xs);
    out.s = std::move(ss);
    out.crossings.assign(out.x.size(), 0);
    out.flagged.assign(out.x.size(), 0);
    out.budget_ok = kernels::active().flow(it, rt, out.x.data(), out.s.data(),
                                           out.crossings.data(), out.x.size(), time,
                                           step_budget, tol, out.flagged.data());
    return out;
}

struct CrossingDeviationRow {
    double t = 0.0;
    double fraction_within = 0.0; // |N(x,t) - t| <= t^gamma
    double median_abs_dev = 0.0;
    std::size_t valid_samples = 0;
};

struct CrossingDeviationReport {
    std::vector<CrossingDeviationRow> rows;
    double regression_exponent = 0.0; // slope of log median|N-t| against log t
    double gamma = 0.0;
};

// Requires mean(f) = 1 up to 1e-6 so that N(x,t) tracks t.
inline CrossingDeviationReport crossing_deviation(const Iet& t, const SymLogRoof& f,
                                                  const std::vector<double>& t_grid,
                                                  std::size_t samples, std::uint64_t seed,
                                                  double gamma,
                                                  long long step_budget = 100'000'000) {
    if (std::fabs(f.mean() - 1.0) > 1e-6) throw Error("roof must be normalized to mean 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0,1)");
    CrossingDeviationReport rep;
    rep.gamma = gamma;
    Rng rng(seed);
    std::vector<double> log_t, log_dev;
    for (double tt : t_grid) {
        std::vector<double> xs(samples), ss(samples, 0.0);
        for (auto& v : xs) v = rng.uniform();
        BatchFlow bf = flow_batch(t, f, xs, ss, tt, step_budget);
        CrossingDeviationRow row;
        row.t = tt;
        std::vector<double> devs;
        std::size_t within = 0;
        double band = std::pow(tt, gamma);
        for (std::size_t i = 0; i < samples; ++i) {
            if (bf.flagged[i]) continue;
            double dev = std::fabs(static_cast<double>(bf.crossings[i]) - tt);
            devs.push_back(dev);
            if (dev <= band) ++within;
        }
        row.valid_samples = devs.size();
        if (!devs.empty()) {
            row.fraction_within = static_cast<double>(within) / static_cast<double>(devs.size());
            row.median_abs_dev = quantile(devs, 0.5);
        }
        rep.rows.push_back(row);
        if (row.valid_samples > 0) {
            log_t.push_back(std::log(tt));
            log_dev.push_back(std::log(std::max(row.median_abs_dev, 0.5)));
        }
    }
    rep.regression_exponent = linear_fit(log_t, log_dev).slope;
    return rep;
}

// Separated-sum bound helper: for delta-separated positive points,
// sum 1/x_i <= 1/min + (1 + log N)/delta.
inline double separated_sum_bound(std::size_t count, double min_value, double delta) {
    if (count == 0) return 0.0;
    return 1.0 / min_value +
           (1.0 + std::log(static_cast<double>(count))) / delta;
}

} // namespace ietlab
