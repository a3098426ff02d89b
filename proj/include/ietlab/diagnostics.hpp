#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "ietlab/birkhoff.hpp"
#include "ietlab/rigidity.hpp"
#include "ietlab/stats.hpp"
#include "ietlab/thread_pool.hpp"

namespace ietlab {

// ---- centered Birkhoff samples and exponential tails ----

struct CenteredSampleSet {
    BigInt rigidity_time;        // tower height h
    double centering = 0.0;      // S_h f at the tower-base midpoint
    std::vector<double> samples; // S_h f(x) - centering over the almost cylinder
    std::size_t dropped = 0;     // lanes that strayed too close to an endpoint
    std::uint64_t seed = 0;
};

struct TailReport {
    double c_hat = 0.0;
    double b_hat = 0.0;
    double r_squared = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
    bool pass = false;
};

struct TailThresholds {
    double min_r_squared = 0.9;
    double fit_lo = 0.5, fit_hi = 0.99;
};

inline TailReport tail_report_from_samples(const std::vector<double>& centered,
                                           const TailThresholds& thr = {}) {
    std::vector<double> abs_vals(centered.size());
    for (std::size_t i = 0; i < centered.size(); ++i) abs_vals[i] = std::fabs(centered[i]);
    {
        std::vector<double> sorted = abs_vals;
        std::sort(sorted.begin(), sorted.end());
        double q50 = quantile_sorted(sorted, 0.5);
        std::size_t above = 0;
        for (double v : sorted)
            if (v > q50) ++above;
        if (above < 50) throw InsufficientTail();
    }
    SurvivalFit fit = fit_exponential_tail(abs_vals, thr.fit_lo, thr.fit_hi);
    TailReport rep;
    rep.c_hat = fit.c_hat;
    rep.b_hat = fit.b_hat;
    rep.r_squared = fit.r_squared;
    rep.q50 = fit.q50;
    rep.q90 = fit.q90;
    rep.q99 = fit.q99;
    rep.pass = fit.b_hat > 0 && fit.r_squared >= thr.min_r_squared;
    return rep;
}

// Samples S_h f uniformly over the almost cylinder of each certificate,
// centers at the tower-base midpoint value and fits the survival tail.
inline std::vector<std::pair<CenteredSampleSet, TailReport>> centered_tail_analysis(
    const Iet& t, const SymLogRoof& f, const std::vector<RigidityCertificate>& certs,
    std::size_t samples_per_cert, std::uint64_t seed, const TailThresholds& thr = {},
    double tol = 1e-12) {
    std::vector<std::pair<CenteredSampleSet, TailReport>> out;
    Rng master(seed);
    for (std::size_t ci = 0; ci < certs.size(); ++ci) {
        const RigidityCertificate& cert = certs[ci];
        TowerDescriptor cyl = almost_cylinder(cert);
        long h = static_cast<long>(cert.tower.height.get_d());
        Rng rng = master.child(ci);

        // floor indices and offsets; x = T^k(cyl.lo) + u by rigidity of floors
        std::vector<long> ks(samples_per_cert);
        std::vector<double> us(samples_per_cert);
        for (std::size_t i = 0; i < samples_per_cert; ++i) {
            ks[i] = static_cast<long>(rng.index(static_cast<std::size_t>(h)));
            us[i] = rng.uniform() * (cyl.hi - cyl.lo);
        }
        std::vector<std::size_t> order(samples_per_cert);
        for (std::size_t i = 0; i < samples_per_cert; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return ks[a] < ks[b]; });
        std::vector<double> xs(samples_per_cert);
        {
            double v = cyl.lo;
            long k = 0;
            for (std::size_t oi : order) {
                while (k < ks[oi]) {
                    v = t.apply(v);
                    ++k;
                }
                xs[oi] = v + us[oi];
            }
        }
        // membership re-check: offsets stay inside the shrunk base width
        for (std::size_t i = 0; i < samples_per_cert; ++i)
            if (!(us[i] >= 0 && us[i] < cyl.hi - cyl.lo)) throw Error("cylinder sampling bug");

        double z = 0.5 * (cert.tower.lo + cert.tower.hi);
        xs.push_back(z);

        const unsigned threads = worker_count();
        const std::size_t lanes = xs.size();
        std::vector<double> sums(lanes, 0.0), mind(lanes, kernels::kInf);
        std::vector<double> pts = xs;
        kernels::IetTables it = kernels::make_iet_tables(t);
        kernels::RoofTables rt = kernels::make_roof_tables(f);
        const std::size_t chunk = 256;
        std::size_t nchunks = (lanes + chunk - 1) / chunk;
        parallel_chunks(nchunks, [&](std::size_t c) {
            std::size_t lo = c * chunk;
            std::size_t n = std::min(chunk, lanes - lo);
            kernels::active().birkhoff(it, rt, 0, pts.data() + lo, sums.data() + lo, n, h,
                                       mind.data() + lo, nullptr);
        }, threads);

        CenteredSampleSet set;
        set.rigidity_time = cert.tower.height;
        set.seed = rng.seed();
        set.centering = sums.back(); // midpoint lane
        for (std::size_t i = 0; i < samples_per_cert; ++i) {
            if (mind[i] < tol) {
                ++set.dropped;
                continue;
            }
            set.samples.push_back(sums[i] - set.centering);
        }
        TailReport rep = tail_report_from_samples(set.samples, thr);
        out.emplace_back(std::move(set), rep);
    }
    return out;
}

// ---- tightness across a sequence of sample sets ----

struct TightnessReport {
    std::vector<double> q50, q90, q99; // per sample set
    double worst_growth = 0.0;         // max over levels of max q / min q
    double trend = 0.0;                // mean sign of successive q99 increments
    bool pass = false;
};

inline TightnessReport tightness_report(const std::vector<CenteredSampleSet>& sets,
                                        double max_growth_factor = 2.0) {
    if (sets.size() < 3) throw Error("tightness report needs at least 3 sample sets");
    TightnessReport rep;
    for (const auto& s : sets) {
        std::vector<double> a(s.samples.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(s.samples[i]);
        std::sort(a.begin(), a.end());
        rep.q50.push_back(quantile_sorted(a, 0.5));
        rep.q90.push_back(quantile_sorted(a, 0.9));
        rep.q99.push_back(quantile_sorted(a, 0.99));
    }
    auto growth = [](const std::vector<double>& q) {
        double lo = q[0], hi = q[0];
        for (double v : q) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return lo > 0 ? hi / lo : kernels::kInf;
    };
    rep.worst_growth = std::max({growth(rep.q50), growth(rep.q90), growth(rep.q99)});
    double trend = 0.0;
    for (std::size_t i = 1; i < rep.q99.size(); ++i)
        trend += rep.q99[i] > rep.q99[i - 1] ? 1.0 : (rep.q99[i] < rep.q99[i - 1] ? -1.0 : 0.0);
    rep.trend = trend / static_cast<double>(rep.q99.size() - 1);
    rep.pass = rep.worst_growth <= max_growth_factor;
    return rep;
}

// ---- correlations under the flow ----

struct Rect {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = kernels::kInf; // full column by default
};

struct RectSet {
    std::vector<Rect> rects;

    bool contains(double x, double s) const {
        for (const auto& r : rects)
            if (x >= r.x0 && x < r.x1 && s >= r.y0 && s < r.y1) return true;
        return false;
    }
};

// Normalized mass of a rectangle set under the roof graph, by quadrature.
inline double rect_mass(const RectSet& a, const SymLogRoof& f, std::size_t grid = 8192) {
    double mass = 0.0;
    for (const auto& r : a.rects) {
        double acc = 0.0;
        for (std::size_t k = 0; k < grid; ++k) {
            double x = r.x0 + (r.x1 - r.x0) * (static_cast<double>(k) + 0.5) /
                                  static_cast<double>(grid);
            double fx;
            try {
                fx = f.eval(x);
            } catch (const AtSingularity&) {
                continue;
            }
            double hi = std::min(r.y1, fx);
            double lo = std::min(r.y0, fx);
            if (hi > lo) acc += hi - lo;
        }
        mass += acc * (r.x1 - r.x0) / static_cast<double>(grid);
    }
    return mass / f.mean();
}

struct CorrelationEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t used_samples = 0;
    std::size_t dropped = 0;
    double roof_cap = 0.0;
};

// Monte-Carlo estimate of Leb^f(A cap T^f_{-t} B) / Leb^f(I^f). Points are
// drawn uniformly under the roof via rejection below a cap; the mass above
// the cap is below d * exp(-(cap - sup g)/C_sum), echoed in the report.
inline CorrelationEstimate correlation_estimate(const Iet& t, const SymLogRoof& f,
                                                const RectSet& a, const RectSet& b, double time,
                                                std::size_t samples, std::uint64_t seed,
                                                long long step_budget = 100'000'000) {
    if (time < 0) return correlation_estimate(t, f, b, a, -time, samples, seed, step_budget);
    double cap = f.g().sup_abs(f.endpoints()) + 40.0 * std::max(1.0, f.coefficient_sum());
    CorrelationEstimate out;
    out.roof_cap = cap;

    const unsigned threads = worker_count();
    const std::size_t nchunks = std::max<std::size_t>(1, threads * 4);
    std::size_t per_chunk = (samples + nchunks - 1) / nchunks;
    std::vector<std::size_t> hits(nchunks, 0), used(nchunks, 0), dropped(nchunks, 0);
    Rng master(seed);
    std::vector<Rng> chunk_rngs;
    for (std::size_t c = 0; c < nchunks; ++c) chunk_rngs.push_back(master.child(c));

    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::RoofTables rt = kernels::make_roof_tables(f);

    parallel_chunks(nchunks, [&](std::size_t c) {
        Rng rng = chunk_rngs[c];
        std::size_t todo = std::min(per_chunk, samples - std::min(samples, c * per_chunk));
        if (todo == 0) return;
        std::vector<double> xs, ss;
        xs.reserve(todo);
        ss.reserve(todo);
        std::size_t guard = 0;
        while (xs.size() < todo && guard < todo * 10000) {
            ++guard;
            double x = rng.uniform();
            double s = rng.uniform() * cap;
            double fx;
            try {
                fx = f.eval(x);
            } catch (const AtSingularity&) {
                continue;
            }
            if (s < fx) {
                xs.push_back(x);
                ss.push_back(s);
            }
        }
        std::vector<double> x2 = xs, s2 = ss;
        std::vector<long long> cross(xs.size(), 0);
        std::vector<std::uint8_t> flags(xs.size(), 0);
        kernels::active().flow(it, rt, x2.data(), s2.data(), cross.data(), xs.size(), time,
                               step_budget, 1e-12, flags.data());
        std::size_t h = 0, u = 0, dr = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (flags[i]) {
                ++dr;
                continue;
            }
            ++u;
            if (a.contains(xs[i], ss[i]) && b.contains(x2[i], s2[i])) ++h;
        }
        hits[c] = h;
        used[c] = u;
        dropped[c] = dr;
    }, threads);

    std::size_t h = 0, u = 0, dr = 0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        h += hits[c];
        u += used[c];
        dr += dropped[c];
    }
    out.used_samples = u;
    out.dropped = dr;
    if (u > 0) {
        double p = static_cast<double>(h) / static_cast<double>(u);
        out.value = p;
        out.std_error = std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(u));
    }
    return out;
}

struct MixingScanRow {
    long k = 0;
    long q = 0;
    long r = 0;
    std::string time_kind; // "r", "r_centered", "1.5r"
    double time = 0.0;
    double corr = 0.0;
    double std_error = 0.0;
    double product = 0.0;
    double distance = 0.0; // |corr - product|
};

// Correlations against resonance certificates at t = r, at the centered flow
// time S_r f(midpoint), and at 1.5 r.
inline std::vector<MixingScanRow> resonant_mixing_scan(
    const Iet& t, const SymLogRoof& f, const std::vector<ResonanceCertificate>& resonances,
    const std::vector<std::pair<RectSet, RectSet>>& pairs, std::size_t samples,
    std::uint64_t seed) {
    std::vector<MixingScanRow> out;
    std::vector<ResonanceCertificate> sorted = resonances;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.r < b.r; });
    std::size_t pair_index = 0;
    for (const auto& rc : sorted) {
        double z = 0.5 * (rc.tower.tower.lo + rc.tower.tower.hi);
        double centered = birkhoff_sum(t, f, z, rc.r, 0);
        const auto& [A, B] = pairs[pair_index % pairs.size()];
        double massA = rect_mass(A, f), massB = rect_mass(B, f);
        struct TimePoint {
            const char* kind;
            double value;
        } times[3] = {{"r", static_cast<double>(rc.r)},
                      {"r_centered", centered},
                      {"1.5r", 1.5 * static_cast<double>(rc.r)}};
        for (const auto& tp : times) {
            CorrelationEstimate ce =
                correlation_estimate(t, f, A, B, tp.value, samples, seed ^ (rc.r * 1315423911ull));
            MixingScanRow row;
            row.k = rc.k;
            row.q = rc.q;
            row.r = rc.r;
            row.time_kind = tp.kind;
            row.time = tp.value;
            row.corr = ce.value;
            row.std_error = ce.std_error;
            row.product = massA * massB;
            row.distance = std::fabs(ce.value - row.product);
            out.push_back(row);
        }
        ++pair_index;
    }
    return out;
}

// ---- mixing-via-shearing report ----

struct ShearingIntervalRecord {
    double lo = 0.0, hi = 0.0;
    long floor_index = 0;
    bool discontinuity_free = false;  // condition (D) up to Nbar
    long long n_lo = 0, n_hi = 0;     // widened crossing range
    double s1 = 0.0;                  // min_r min_x |S_r f'(x)| * |I|
    double s2_ratio = 0.0;            // max_r<=2t max_x |S_r f''| * |I| / min...
    bool excised = false;             // Case-II neighborhood removed
    double excision_radius = 0.0;
};

struct ShearingReport {
    double t = 0.0;
    double delta = 0.0;
    long q = 0;
    long k = 1;
    double partition_mass = 0.0;      // condition (M): kept mass estimate
    double sampled_fraction_d = 0.0;  // fraction of sampled intervals passing (D)
    double s1_min = 0.0;              // over kept sampled intervals
    double s1_q10 = 0.0;
    double s2_max = 0.0;
    std::vector<ShearingIntervalRecord> records;
};

inline ShearingReport shearing_report(const Iet& t, const SymLogRoof& f,
                                      const RigidityCertificate& tower_cert, long k,
                                      double time, double delta, std::size_t samples,
                                      std::uint64_t seed, double gamma = 0.55,
                                      long long step_budget = 200'000'000) {
    if (!(time > 0)) throw Error("shearing report needs t > 0");
    if (!(tower_cert.area > 0.5)) throw NoDominantTower();
    long q = static_cast<long>(tower_cert.tower.height.get_d());
    double a0 = tower_cert.tower.lo, b0 = tower_cert.tower.hi;
    double shrink = delta * (b0 - a0); // delta/q of the construction, width-relative
    double lo = a0 + shrink, hi = b0 - shrink;
    if (!(hi > lo)) throw NoDominantTower();

    ShearingReport rep;
    rep.t = time;
    rep.delta = delta;
    rep.q = q;
    rep.k = k;

    // partition: floors of the shrunk tower, subdivided at scale delta^4
    // relative to the base width (the absolute delta^4/q of the construction,
    // rescaled so towers of moderate area stay non-degenerate)
    double width = hi - lo;
    double target = delta * delta * delta * delta * width;
    long nsub = std::max<long>(1, static_cast<long>(std::ceil(1.0 / (2.0 * delta * delta *
                                                                     delta * delta))));
    double sub_w = width / static_cast<double>(nsub);
    (void)target;
    double total_mass = width * static_cast<double>(q);

    // floor offsets for the sampled floors
    Rng rng(seed);
    std::vector<std::pair<long, long>> chosen; // (floor, subindex)
    for (std::size_t i = 0; i < samples; ++i)
        chosen.emplace_back(static_cast<long>(rng.index(static_cast<std::size_t>(q))),
                            static_cast<long>(rng.index(static_cast<std::size_t>(nsub))));
    std::sort(chosen.begin(), chosen.end());

    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::RoofTables rt = kernels::make_roof_tables(f);
    // empirical stand-ins for the construction's scale constants: the shear
    // threshold grows like delta * k * q and the excision removes one
    // partition cell around the minimizer
    const double cs = f.coefficient_sum();
    const double s1_threshold = cs * delta * static_cast<double>(k) * static_cast<double>(q);
    const double excise_radius = sub_w / 8.0;

    double kept_mass_sampled = 0.0, sampled_mass = 0.0;
    std::size_t d_pass = 0;
    std::vector<double> s1_values;
    double floor_lo = lo;
    long cur_floor = 0;
    double excised_mass = 0.0;

    for (const auto& [floor_idx, sub_idx] : chosen) {
        while (cur_floor < floor_idx) {
            floor_lo = t.apply(floor_lo);
            ++cur_floor;
        }
        ShearingIntervalRecord rec;
        rec.floor_index = floor_idx;
        rec.lo = floor_lo + sub_w * static_cast<double>(sub_idx);
        rec.hi = rec.lo + sub_w;
        sampled_mass += sub_w;

        // 35 probe points: endpoints nudged inside plus 33 interior
        const std::size_t npts = 35;
        std::vector<double> pts(npts);
        for (std::size_t j = 0; j < npts; ++j)
            pts[j] = rec.lo + sub_w * (static_cast<double>(j) + 0.5) / static_cast<double>(npts);

        // crossing counts N(x, t) at the probes
        std::vector<double> px = pts, ps(npts, 0.0);
        std::vector<long long> cross(npts, 0);
        std::vector<std::uint8_t> flags(npts, 0);
        kernels::active().flow(it, rt, px.data(), ps.data(), cross.data(), npts, time,
                               step_budget, 1e-13, flags.data());
        long long nmin = 0, nmax = 0;
        bool have = false;
        for (std::size_t j = 0; j < npts; ++j) {
            if (flags[j]) continue;
            if (!have) {
                nmin = nmax = cross[j];
                have = true;
            } else {
                nmin = std::min(nmin, cross[j]);
                nmax = std::max(nmax, cross[j]);
            }
        }
        if (!have) {
            rec.discontinuity_free = false;
            rep.records.push_back(rec);
            continue;
        }
        double margin = 2.0 * std::pow(time, gamma);
        rec.n_lo = std::max<long long>(1, nmin - static_cast<long long>(margin));
        rec.n_hi = nmax + static_cast<long long>(margin);

        // (D): the interval stays unbroken for 0 <= j <= n_hi
        {
            double u = rec.lo, v = rec.hi - 1e-15;
            bool free_run = true;
            for (long long j = 0; j < rec.n_hi; ++j) {
                if (t.interval_index(u) != t.interval_index(v)) {
                    free_run = false;
                    break;
                }
                double dlt = t.displacements()[t.interval_index(u) - 1];
                u += dlt;
                v += dlt;
            }
            rec.discontinuity_free = free_run;
        }
        if (rec.discontinuity_free) ++d_pass;

        // (S1): min over the widened crossing range, stepping the batch one
        // move at a time; (S2) numerator is S_{2t} f'' (monotone in r).
        {
            std::vector<double> xs = pts, acc(npts, 0.0);
            std::vector<double> best(npts, kernels::kInf);
            long long rmax = rec.n_hi;
            for (long long r = 1; r <= rmax; ++r) {
                kernels::active().birkhoff(it, rt, 1, xs.data(), acc.data(), npts, 1, nullptr,
                                           nullptr);
                if (r >= rec.n_lo)
                    for (std::size_t j = 0; j < npts; ++j)
                        best[j] = std::min(best[j], std::fabs(acc[j]));
            }
            double s1min = kernels::kInf;
            std::size_t argmin = 0;
            for (std::size_t j = 0; j < npts; ++j)
                if (best[j] < s1min) {
                    s1min = best[j];
                    argmin = j;
                }
            rec.s1 = s1min * sub_w;
            if (s1min < s1_threshold) {
                rec.excised = true;
                rec.excision_radius = excise_radius;
                double cx = pts[argmin];
                double s1kept = kernels::kInf;
                bool any = false;
                for (std::size_t j = 0; j < npts; ++j)
                    if (std::fabs(pts[j] - cx) > excise_radius) {
                        s1kept = std::min(s1kept, best[j]);
                        any = true;
                    }
                double lost = std::min(sub_w, 2.0 * excise_radius);
                excised_mass += lost;
                kept_mass_sampled += sub_w - lost;
                if (any) {
                    rec.s1 = s1kept * sub_w;
                    s1_values.push_back(rec.s1);
                }
            } else {
                kept_mass_sampled += sub_w;
                s1_values.push_back(rec.s1);
            }

            std::vector<double> xs2 = pts, acc2(npts, 0.0);
            long long r2 = static_cast<long long>(2.0 * time);
            kernels::active().birkhoff(it, rt, 2, xs2.data(), acc2.data(), npts, r2, nullptr,
                                       nullptr);
            double s2num = 0.0;
            for (std::size_t j = 0; j < npts; ++j) s2num = std::max(s2num, acc2[j]);
            double denom = kernels::kInf;
            for (std::size_t j = 0; j < npts; ++j) denom = std::min(denom, best[j]);
            rec.s2_ratio = denom > 0 ? s2num * sub_w / denom : kernels::kInf;
            rep.s2_max = std::max(rep.s2_max, rec.s2_ratio);
        }
        rep.records.push_back(rec);
    }

    rep.sampled_fraction_d =
        rep.records.empty() ? 0.0
                            : static_cast<double>(d_pass) / static_cast<double>(rep.records.size());
    double keep_frac = sampled_mass > 0 ? kept_mass_sampled / sampled_mass : 0.0;
    rep.partition_mass = total_mass * keep_frac;
    if (!s1_values.empty()) {
        std::sort(s1_values.begin(), s1_values.end());
        rep.s1_min = s1_values.front();
        rep.s1_q10 = quantile_sorted(s1_values, 0.1);
    }
    return rep;
}

} // namespace ietlab
