#include <cmath>

#include "ietlab/kernels/kernels.hpp"

namespace ietlab::kernels {

namespace {

inline int interval_of(const IetTables& t, double x) {
    int i = 0;
    while (i + 1 < t.d && x >= t.beta[i + 1]) ++i;
    return i;
}

inline int interval_of(const RoofTables& t, double x) {
    int i = 0;
    while (i + 1 < t.d && x >= t.beta[i + 1]) ++i;
    return i;
}

// f, f' or f'' at x; signed distances to every endpoint drive the log terms.
inline double roof_point(const RoofTables& r, int order, double x, double* min_dist) {
    double acc = 0.0;
    double mind = kInf;
    for (int i = 0; i <= r.d; ++i) {
        double dist = x - r.beta[i];
        bool right = dist > 0.0; // x to the right of beta_i
        double d = right ? dist : -dist;
        if (d < mind) mind = d;
        if (order == 0) {
            double w = right ? r.cplus[i] : r.cminus[i];
            if (w != 0.0) acc -= w * std::log(d);
        } else if (order == 1) {
            double w = right ? -r.cplus[i] : r.cminus[i];
            if (w != 0.0) acc += w / d;
        } else {
            double w = right ? r.cplus[i] : r.cminus[i];
            if (w != 0.0) acc += w / (d * d);
        }
    }
    int j = interval_of(r, x);
    if (order == 0) acc += r.gslope[j] * x + r.gicept[j];
    else if (order == 1) acc += r.gslope[j];
    if (min_dist && mind < *min_dist) *min_dist = mind;
    return acc;
}

void orbit_impl(const IetTables& t, double* x, std::size_t lanes, long steps,
                double* min_dist) {
    for (std::size_t l = 0; l < lanes; ++l) {
        double v = x[l];
        double mind = min_dist ? min_dist[l] : kInf;
        for (long k = 0; k < steps; ++k) {
            int i = interval_of(t, v);
            double dl = v - t.beta[i];
            double dr = t.beta[i + 1] - v;
            double d = dl < dr ? dl : dr;
            if (d < mind) mind = d;
            v += t.delta[i];
        }
        x[l] = v;
        if (min_dist) min_dist[l] = mind;
    }
}

void birkhoff_impl(const IetTables& t, const RoofTables& r, int order, double* x, double* acc,
                   std::size_t lanes, long steps, double* min_dist, ClosestTrack* track) {
    for (std::size_t l = 0; l < lanes; ++l) {
        double v = x[l];
        double sum = 0.0;
        double mind = min_dist ? min_dist[l] : kInf;
        for (long k = 0; k < steps; ++k) {
            if (track) {
                for (int i = 0; i <= r.d; ++i) {
                    double dist = v - r.beta[i];
                    std::size_t idx = static_cast<std::size_t>(i) * track->lanes + l;
                    if (dist > 0.0) {
                        if (dist < track->m_plus[idx]) {
                            track->m_plus[idx] = dist;
                            if (track->with_args) track->arg_plus[idx] = k;
                        }
                    } else if (dist < 0.0) {
                        if (-dist < track->m_minus[idx]) {
                            track->m_minus[idx] = -dist;
                            if (track->with_args) track->arg_minus[idx] = k;
                        }
                    } else {
                        // exact endpoint hit: record as zero approach on both sides
                        track->m_plus[idx] = 0.0;
                        track->m_minus[idx] = 0.0;
                        if (track->with_args) {
                            track->arg_plus[idx] = k;
                            track->arg_minus[idx] = k;
                        }
                    }
                }
            }
            sum += roof_point(r, order, v, &mind);
            int i = interval_of(t, v);
            v += t.delta[i];
        }
        x[l] = v;
        acc[l] += sum;
        if (min_dist) min_dist[l] = mind;
    }
}

void roof_eval_impl(const RoofTables& r, int order, const double* x, double* out,
                    std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = roof_point(r, order, x[i], nullptr);
}

bool flow_impl(const IetTables& t, const RoofTables& r, double* x, double* s, long long* ncross,
               std::size_t lanes, double tt, long long step_budget, double tol,
               std::uint8_t* flagged) {
    bool all_ok = true;
    for (std::size_t l = 0; l < lanes; ++l) {
        if (flagged[l]) continue;
        double v = x[l];
        double fiber = s[l] + tt;
        long long n = 0;
        long long budget = step_budget;
        while (true) {
            double mind = kInf;
            double fv = roof_point(r, 0, v, &mind);
            if (mind < tol) {
                flagged[l] = 1;
                break;
            }
            if (fiber < fv) break;
            fiber -= fv;
            int i = interval_of(t, v);
            v += t.delta[i];
            ++n;
            if (--budget < 0) {
                all_ok = false;
                break;
            }
        }
        x[l] = v;
        s[l] = fiber;
        ncross[l] += n;
        if (!all_ok) return false;
    }
    return true;
}

} // namespace

const Funcs& scalar_funcs() {
    static const Funcs f = {"scalar", orbit_impl, birkhoff_impl, roof_eval_impl, flow_impl};
    return f;
}

} // namespace ietlab::kernels
