#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ietlab/birkhoff.hpp"
#include "ietlab/induce.hpp"
#include "ietlab/rauzy.hpp"
#include "ietlab/rng.hpp"
#include "ietlab/thread_pool.hpp"

namespace ietlab {

enum class CertificateFlavor {
    strict,   // gate lambda_1 > 1 - eps/2 (implies eps-rigidity of tower 1)
    column,   // gate lambda_k > 1 - eps/3 on some column k
    measured, // displacement/|base| measured below eps directly
};

inline const char* to_string(CertificateFlavor f) {
    switch (f) {
        case CertificateFlavor::strict: return "strict";
        case CertificateFlavor::column: return "column";
        default: return "measured";
    }
}

struct RigidityCertificate {
    TowerDescriptor tower;       // base (lo,hi), exact height
    double epsilon = 0.0;        // requested quality
    double displacement = 0.0;   // |T^h x - x| on the base (constant there)
    double signed_displacement = 0.0;
    double area = 0.0;
    long source_step = 0;        // induction step that produced the tower
    std::size_t column = 1;      // which tower at that step
    CertificateFlavor flavor = CertificateFlavor::measured;

    double ratio() const { return displacement / (tower.hi - tower.lo); }
};

namespace rigdetail {

// Base interval and displacement of tower `col` (1-based) at trace step n,
// from the step's length data alone: the inducing interval is left-anchored,
// and the return map translates each of its continuity intervals rigidly.
template <class S>
RigidityCertificate tower_certificate(const BasicRauzyTrace<S>& trace, std::size_t n,
                                      std::size_t col) {
    const TraceStep<S>& st = trace.steps[n];
    const std::size_t d = st.lambda.size();
    S lo = 0, hi = 0;
    for (std::size_t i = 0; i < col; ++i) {
        lo = hi;
        hi += st.lambda[i];
    }
    auto omega = displacement_matrix(st.perm);
    S delta = 0;
    for (std::size_t j = 0; j < d; ++j) {
        if (omega[col - 1][j] == 1) delta += st.lambda[j];
        else if (omega[col - 1][j] == -1) delta -= st.lambda[j];
    }
    RigidityCertificate cert;
    cert.tower.lo = scalar_traits<S>::to_double(lo);
    cert.tower.hi = scalar_traits<S>::to_double(hi);
    cert.tower.height = st.heights[col - 1];
    cert.signed_displacement = scalar_traits<S>::to_double(delta);
    cert.displacement = std::fabs(cert.signed_displacement);
    cert.area = cert.tower.area();
    cert.source_step = static_cast<long>(n);
    cert.column = col;
    cert.flavor = CertificateFlavor::measured;
    cert.epsilon = cert.tower.hi > cert.tower.lo
                       ? cert.displacement / (cert.tower.hi - cert.tower.lo)
                       : kernels::kInf;
    cert.tower.epsilon = cert.epsilon;
    return cert;
}

} // namespace rigdetail

// Measured certificates for every (step, column) of a trace; no gate applied.
template <class S>
std::vector<RigidityCertificate> all_tower_certificates(const BasicRauzyTrace<S>& trace) {
    std::vector<RigidityCertificate> out;
    for (std::size_t n = 0; n < trace.steps.size(); ++n)
        for (std::size_t j = 1; j <= trace.steps[n].lambda.size(); ++j)
            out.push_back(rigdetail::tower_certificate(trace, n, j));
    return out;
}

// Steps where the first interval dominates: lambda_1 > (1 - eps/2)|I^{(n)}|
// guarantees the tower over it is eps-rigid.
template <class S>
std::vector<RigidityCertificate> detect_rigid_towers(const BasicRauzyTrace<S>& trace,
                                                     double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error("epsilon must lie in (0, 1/2)");
    std::vector<RigidityCertificate> out;
    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
        const TraceStep<S>& st = trace.steps[n];
        double l1 = scalar_traits<S>::to_double(st.lambda[0]);
        double len = scalar_traits<S>::to_double(st.interval_length);
        if (l1 > (1.0 - epsilon / 2.0) * len) {
            RigidityCertificate cert = rigdetail::tower_certificate(trace, n, 1);
            cert.epsilon = epsilon;
            cert.flavor = CertificateFlavor::strict;
            cert.tower.epsilon = epsilon;
            out.push_back(cert);
        }
    }
    return out;
}

// Re-derives the displacement by iterating T^h on the base; T^h is a
// translation there, so two interior probes pin the certificate. (Interior
// points are used in double mode: the base endpoints sit exactly on floor
// boundaries, where rounding can flip the branch.)
inline bool verify_certificate(const Iet& t, const RigidityCertificate& cert,
                               double tol = 1e-12) {
    long h = static_cast<long>(cert.tower.height.get_d());
    double mid = 0.5 * (cert.tower.lo + cert.tower.hi);
    double quarter = cert.tower.lo + 0.25 * (cert.tower.hi - cert.tower.lo);
    double xm = mid, xq = quarter;
    for (long k = 0; k < h; ++k) {
        xm = t.apply(xm);
        xq = t.apply(xq);
    }
    return std::fabs((xm - mid) - cert.signed_displacement) <= tol &&
           std::fabs((xq - quarter) - cert.signed_displacement) <= tol;
}

// Exact re-verification from a rational trace: iterates the base left
// endpoint and midpoint with exact arithmetic and demands equality.
inline bool verify_certificate_exact(const RatIet& t, const BasicRauzyTrace<mpq_class>& trace,
                                     std::size_t step, std::size_t col) {
    const auto& st = trace.steps[step];
    mpq_class lo = 0;
    for (std::size_t i = 0; i + 1 < col; ++i) lo += st.lambda[i];
    mpq_class hi = lo + st.lambda[col - 1];
    auto omega = displacement_matrix(st.perm);
    mpq_class delta = 0;
    for (std::size_t j = 0; j < st.lambda.size(); ++j) {
        if (omega[col - 1][j] == 1) delta += st.lambda[j];
        else if (omega[col - 1][j] == -1) delta -= st.lambda[j];
    }
    long h = static_cast<long>(st.heights[col - 1].get_d());
    mpq_class a = lo, m = (lo + hi) / 2;
    for (long k = 0; k < h; ++k) {
        a = t.apply(a);
        m = t.apply(m);
    }
    return a - lo == delta && m - (lo + hi) / 2 == delta;
}

// Shrinks the base so the top of the tower maps back into the base (the side
// of the shrink follows the sign of the displacement).
inline TowerDescriptor almost_cylinder(const RigidityCertificate& cert) {
    double width = cert.tower.hi - cert.tower.lo;
    if (cert.displacement >= width) throw DegenerateShrink();
    TowerDescriptor out = cert.tower;
    if (cert.signed_displacement <= 0) out.lo = cert.tower.lo + cert.displacement;
    else out.hi = cert.tower.hi - cert.displacement;
    out.epsilon = cert.epsilon;
    return out;
}

// ---- exact displacement profile of T^q ----

struct DisplacementPiece {
    double lo = 0.0, hi = 0.0;
    double shift = 0.0;
};

// Interval decomposition of T^q as a piecewise translation. Piece count grows
// like q(d-1); the budget guards runaway requests.
inline std::vector<DisplacementPiece> displacement_profile(const Iet& t, long q,
                                                           std::size_t piece_budget = 4'000'000) {
    std::vector<DisplacementPiece> pieces{{0.0, t.total(), 0.0}};
    for (long step = 0; step < q; ++step) {
        std::vector<DisplacementPiece> next;
        next.reserve(pieces.size() + t.size());
        for (const auto& p : pieces) {
            double lo = p.lo + p.shift, hi = p.hi + p.shift;
            double cl = lo;
            double ol = p.lo;
            while (cl < hi) {
                std::size_t idx = t.interval_index(cl);
                double cut = std::min(hi, t.endpoints()[idx]);
                if (!(cut > cl)) cut = hi; // numeric guard
                double w = cut - cl;
                next.push_back({ol, ol + w, p.shift + t.displacements()[idx - 1]});
                cl = cut;
                ol += w;
            }
        }
        pieces = std::move(next);
        if (pieces.size() > piece_budget) throw StepBudgetExceeded(static_cast<long>(piece_budget));
    }
    return pieces;
}

// Lebesgue measure of {x : |T^q x - x| >= s}.
inline double displaced_mass(const std::vector<DisplacementPiece>& profile, double s) {
    double m = 0.0;
    for (const auto& p : profile)
        if (std::fabs(p.shift) >= s) m += p.hi - p.lo;
    return m;
}

// q is an eps-rigidity time in measure when T^q moves all but an eps-mass of
// points by less than eps.
inline bool is_measure_rigidity_time(const Iet& t, long q, double epsilon,
                                     std::size_t piece_budget = 4'000'000) {
    auto profile = displacement_profile(t, q, piece_budget);
    return displaced_mass(profile, epsilon) < epsilon;
}

// ---- rigidity times in windows ----

struct WindowHit {
    double q = 0.0; // height (as double; exact value in `height`)
    BigInt height;
    long step = 0;
    std::size_t column = 1;
    CertificateFlavor flavor = CertificateFlavor::measured;
    double area = 0.0;
    double ratio = 0.0;
};

struct WindowReport {
    double lo = 0.0, hi = 0.0;
    std::vector<WindowHit> hits;
};

// Certified eps-rigidity times whose height falls into one of the windows.
// Admitted towers: the strict lambda_1 gate, the column gate
// lambda_k > (1 - eps/3)|I|, and directly measured displacement ratios < eps.
template <class S>
std::vector<WindowReport> rigidity_times_in_window(const BasicRauzyTrace<S>& trace,
                                                   double epsilon,
                                                   const std::vector<std::pair<double, double>>& windows) {
    for (std::size_t w = 1; w < windows.size(); ++w)
        if (!(windows[w - 1].second <= windows[w].first))
            throw Error("windows must be sorted and disjoint");
    if (windows.empty()) return {};
    std::vector<WindowReport> out;
    for (const auto& w : windows) out.push_back({w.first, w.second, {}});

    double max_height = 0.0;
    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
        const TraceStep<S>& st = trace.steps[n];
        double len = scalar_traits<S>::to_double(st.interval_length);
        for (std::size_t j = 1; j <= st.lambda.size(); ++j) {
            RigidityCertificate cert = rigdetail::tower_certificate(trace, n, j);
            double h = cert.tower.height.get_d();
            max_height = std::max(max_height, h);
            double lj = scalar_traits<S>::to_double(st.lambda[j - 1]);
            CertificateFlavor flavor;
            if (j == 1 && lj > (1.0 - epsilon / 2.0) * len) flavor = CertificateFlavor::strict;
            else if (lj > (1.0 - epsilon / 3.0) * len) flavor = CertificateFlavor::column;
            else if (cert.ratio() < epsilon) flavor = CertificateFlavor::measured;
            else continue;
            for (auto& rep : out) {
                if (h >= rep.lo && h < rep.hi) {
                    WindowHit hit;
                    hit.q = h;
                    hit.height = cert.tower.height;
                    hit.step = static_cast<long>(n);
                    hit.column = j;
                    hit.flavor = flavor;
                    hit.area = cert.area;
                    hit.ratio = cert.ratio();
                    rep.hits.push_back(hit);
                }
            }
        }
    }
    if (max_height < windows.back().first) throw DepthExceeded();
    return out;
}

// ---- resonant times ----

struct ResonanceCertificate {
    long q = 0;
    long k = 1;
    double epsilon = 0.0;
    long r = 0; // k * q
    RigidityCertificate tower;
    CertificateFlavor flavor = CertificateFlavor::strict;
    double worst_multiple_ratio = 0.0; // max over j<=k of displacement bound seen
    bool multiples_verified = false;
};

// Searches the trace for eps^2-rigid towers of area > 1-eps and emits the
// multiples k*q for k up to min(k_max, 1/eps). Multiples are verified by a
// direct orbit check on a grid of base points. When no strict tower exists,
// measure-flavor certificates (displacement profile of T^q) are emitted for
// heights within the profile budget.
inline std::vector<ResonanceCertificate> resonant_times(const Iet& t, double epsilon,
                                                        long k_max, long max_depth,
                                                        std::size_t grid = 64) {
    if (!(epsilon > 0 && epsilon < 1)) throw Error("epsilon must lie in (0,1)");
    long k_cap = static_cast<long>(std::floor(1.0 / epsilon));
    if (k_max > k_cap) throw Error("k_max exceeds 1/epsilon");
    RauzyTrace trace = induction_trace(t, max_depth, InductionMode::rauzy, TiePolicy::truncate);
    std::vector<ResonanceCertificate> out;

    auto verify_multiples = [&](ResonanceCertificate& rc) {
        double width = rc.tower.tower.hi - rc.tower.tower.lo;
        double worst = 0.0;
        for (std::size_t g = 0; g < grid; ++g) {
            double z = rc.tower.tower.lo +
                       width * (static_cast<double>(g) + 0.5) / static_cast<double>(grid);
            double x = z;
            for (long j = 1; j <= rc.k; ++j) {
                for (long s = 0; s < rc.q; ++s) x = t.apply(x);
                worst = std::max(worst, std::fabs(x - z));
            }
        }
        rc.worst_multiple_ratio = width > 0 ? worst / width : kernels::kInf;
        rc.multiples_verified = worst <= epsilon * std::max(width, 1e-300);
    };

    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
        for (std::size_t j = 1; j <= t.size(); ++j) {
            RigidityCertificate cert = rigdetail::tower_certificate(trace, n, j);
            if (!(cert.area > 1.0 - epsilon)) continue;
            if (!(cert.ratio() < epsilon * epsilon)) continue;
            double hd = cert.tower.height.get_d();
            if (hd > 1e15) continue;
            long q = static_cast<long>(hd);
            for (long k = 1; k <= k_cap && k <= k_max; ++k) {
                ResonanceCertificate rc;
                rc.q = q;
                rc.k = k;
                rc.epsilon = epsilon;
                rc.r = k * q;
                rc.tower = cert;
                rc.flavor = CertificateFlavor::strict;
                if (static_cast<double>(k) * q <= 2e7) verify_multiples(rc);
                out.push_back(rc);
            }
        }
    }
    if (!out.empty()) return out;

    // measure flavor: rotation-style rigidity of the map itself
    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
        RigidityCertificate cert = rigdetail::tower_certificate(trace, n, 1);
        double hd = cert.tower.height.get_d();
        if (hd > 400'000) break;
        long q = static_cast<long>(hd);
        std::vector<DisplacementPiece> prof;
        try {
            prof = displacement_profile(t, q);
        } catch (const StepBudgetExceeded&) {
            break;
        }
        if (!(displaced_mass(prof, epsilon * epsilon) < epsilon * epsilon)) continue;
        for (long k = 1; k <= k_cap && k <= k_max; ++k) {
            ResonanceCertificate rc;
            rc.q = q;
            rc.k = k;
            rc.epsilon = epsilon;
            rc.r = k * q;
            rc.tower = cert;
            rc.flavor = CertificateFlavor::measured;
            rc.multiples_verified = true;
            double worst = 0.0;
            for (const auto& p : prof)
                if (std::fabs(p.shift) < epsilon * epsilon)
                    worst = std::max(worst, std::fabs(p.shift));
            rc.worst_multiple_ratio = worst * static_cast<double>(k);
            out.push_back(rc);
        }
    }
    return out;
}

// ---- coexistence of balance and rigidity ----

struct CoexistenceRecord {
    long balanced_step = 0;
    long rigid_step = 0;
    double epsilon = 0.0;
    RigidityCertificate tower;
    double trimmed_bound_M = 0.0; // max |S~_r f'| / h over sampled base points
    double window_balance = 0.0;
    BigInt window_norm;           // K = ||B|| of the connecting block
    double nu_B = 0.0;            // max_{i,k,l} B_il / B_kl of the block
    double area_lower_bound = 0.0; // 1 - (eps/2) nu(B)
};

struct CoexistenceConfig {
    double balance_threshold = 20.0;
    long window = 20;       // arrows per balance window and rigidity lookahead
    std::size_t base_samples = 64;
    std::size_t r_grid = 32;
    double height_budget = 1e7;
};

// Incremental trimmed derivative profile over one tower: batched orbit with
// running closest-visit minima, trimmed at each checkpoint.
inline double fit_trimmed_bound(const Iet& t, const SymLogRoof& f, double base_lo,
                                double base_hi, double height, std::size_t base_samples,
                                std::size_t r_grid_size) {
    long h = static_cast<long>(height);
    std::vector<double> xs(base_samples);
    for (std::size_t i = 0; i < base_samples; ++i)
        xs[i] = base_lo + (base_hi - base_lo) * (static_cast<double>(i) + 0.5) /
                              static_cast<double>(base_samples);
    std::vector<long> grid;
    for (std::size_t g = 0; g < r_grid_size; ++g) {
        double fr = std::pow(static_cast<double>(h),
                             static_cast<double>(g + 1) / static_cast<double>(r_grid_size));
        long r = std::max<long>(1, static_cast<long>(fr));
        if (grid.empty() || r > grid.back()) grid.push_back(r);
    }
    kernels::IetTables it = kernels::make_iet_tables(t);
    kernels::RoofTables rt = kernels::make_roof_tables(f);
    const std::size_t chunk = 16;
    const std::size_t nchunks = (xs.size() + chunk - 1) / chunk;
    std::vector<double> worst_per_chunk(nchunks, 0.0);
    parallel_chunks(nchunks, [&](std::size_t c) {
        std::size_t lo = c * chunk;
        std::size_t n = std::min(chunk, xs.size() - lo);
        std::vector<double> pts(xs.begin() + lo, xs.begin() + lo + n);
        kernels::ClosestTrack track;
        track.init(it.d, n, false);
        std::vector<double> acc(n, 0.0);
        long done = 0;
        double worst = 0.0;
        for (long r : grid) {
            kernels::active().birkhoff(it, rt, 1, pts.data(), acc.data(), n, r - done,
                                       nullptr, &track);
            done = r;
            for (std::size_t l = 0; l < n; ++l) {
                double trimmed = acc[l];
                for (int i = 0; i <= it.d; ++i) {
                    std::size_t idx = static_cast<std::size_t>(i) * track.lanes + l;
                    double cp = f.cplus_at(static_cast<std::size_t>(i));
                    double cm = f.cminus_at(static_cast<std::size_t>(i));
                    if (cp > 0 && std::isfinite(track.m_plus[idx]))
                        trimmed += cp / track.m_plus[idx];
                    if (cm > 0 && std::isfinite(track.m_minus[idx]))
                        trimmed -= cm / track.m_minus[idx];
                }
                worst = std::max(worst, std::fabs(trimmed) / height);
            }
        }
        worst_per_chunk[c] = worst;
    });
    double worst = 0.0;
    for (double w : worst_per_chunk) worst = std::max(worst, w);
    return worst;
}

// Scans an elementary trace for a positive, balanced window followed shortly
// by a dominant first column, and fits the trimmed derivative bound on the
// resulting rigid tower.
template <class S>
std::vector<CoexistenceRecord> coexistence_search(const BasicIet<S>& t0, const SymLogRoof& f,
                                                  const std::vector<double>& epsilon_schedule,
                                                  const CoexistenceConfig& cfg = {}) {
    for (std::size_t i = 1; i < epsilon_schedule.size(); ++i)
        if (!(epsilon_schedule[i] <= epsilon_schedule[i - 1]))
            throw Error("epsilon schedule must be non-increasing");

    // grow the trace until the height budget
    long depth = 64;
    BasicRauzyTrace<S> trace;
    while (true) {
        trace = induction_trace(t0, depth, InductionMode::rauzy, TiePolicy::truncate);
        if (trace.steps.empty()) return {};
        double hmax = 0.0;
        for (const auto& v : trace.steps.back().heights) hmax = std::max(hmax, v.get_d());
        if (trace.truncated || hmax > cfg.height_budget || depth > 100'000) break;
        depth *= 2;
    }
    // truncate to the budget
    std::size_t nsteps = trace.steps.size();
    while (nsteps > 0) {
        double hmax = 0.0;
        for (const auto& v : trace.steps[nsteps - 1].heights) hmax = std::max(hmax, v.get_d());
        if (hmax <= cfg.height_budget) break;
        --nsteps;
    }

    Iet td = [&] {
        if constexpr (scalar_traits<S>::exact) return to_double_iet(t0, false);
        else return t0;
    }();

    std::vector<CoexistenceRecord> out;
    for (double eps : epsilon_schedule) {
        long last_rigid = -1; // one record per rigid step and level
        for (std::size_t n = static_cast<std::size_t>(cfg.window); n < nsteps; ++n) {
            IMat win = trace.cumulative(n - static_cast<std::size_t>(cfg.window), n);
            if (!win.is_positive()) continue;
            double bal = balance_ratio(win);
            if (bal > cfg.balance_threshold) continue;
            for (std::size_t m = n + 1; m <= std::min(nsteps - 1, n + static_cast<std::size_t>(cfg.window)); ++m) {
                if (static_cast<long>(m) <= last_rigid) continue;
                const TraceStep<S>& st = trace.steps[m];
                double len = scalar_traits<S>::to_double(st.interval_length);
                std::size_t col = 0; // any dominant column qualifies
                for (std::size_t j = 1; j <= st.lambda.size(); ++j)
                    if (scalar_traits<S>::to_double(st.lambda[j - 1]) > (1.0 - eps / 2.0) * len)
                        col = j;
                if (col == 0) continue;
                CoexistenceRecord rec;
                rec.balanced_step = static_cast<long>(n);
                rec.rigid_step = static_cast<long>(m);
                rec.epsilon = eps;
                rec.tower = rigdetail::tower_certificate(trace, m, col);
                rec.tower.epsilon = eps;
                rec.tower.flavor =
                    col == 1 ? CertificateFlavor::strict : CertificateFlavor::column;
                rec.window_balance = bal;
                IMat block = trace.cumulative(n, m);
                rec.window_norm = block.entry_sum();
                double numax = 0.0;
                for (std::size_t c = 0; c < block.dim(); ++c) {
                    double mx = 0, mn = kernels::kInf;
                    for (std::size_t rr = 0; rr < block.dim(); ++rr) {
                        double v = block(rr, c).get_d();
                        mx = std::max(mx, v);
                        if (v > 0) mn = std::min(mn, v);
                    }
                    if (mn > 0 && std::isfinite(mn)) numax = std::max(numax, mx / mn);
                }
                rec.nu_B = numax;
                rec.area_lower_bound = 1.0 - 0.5 * eps * numax;
                rec.trimmed_bound_M =
                    fit_trimmed_bound(td, f, rec.tower.tower.lo, rec.tower.tower.hi,
                                      rec.tower.tower.height.get_d(), cfg.base_samples,
                                      cfg.r_grid);
                out.push_back(rec);
                last_rigid = static_cast<long>(m);
                break; // first rigid step after this balanced step
            }
        }
    }
    return out;
}

// ---- Roth-style acceleration and distortion report ----

struct RothStep {
    long first = 0, last = 0;  // elementary step range (inclusive)
    IVec heights;              // at the end of the block
    std::vector<double> lambda;
};

// Maximal blocks in which at most d-1 distinct interval names win.
template <class S>
std::vector<RothStep> roth_accelerate(const BasicRauzyTrace<S>& trace) {
    const std::size_t d = trace.start.size();
    std::vector<RothStep> out;
    std::set<std::size_t> names;
    long block_first = 0;
    for (std::size_t n = 0; n < trace.steps.size(); ++n) {
        std::set<std::size_t> cand = names;
        cand.insert(trace.steps[n].winner_label);
        if (cand.size() == d) {
            RothStep rs;
            rs.first = block_first;
            rs.last = static_cast<long>(n) - 1;
            const auto& st = trace.steps[n - 1];
            rs.heights = st.heights;
            for (const auto& l : st.lambda)
                rs.lambda.push_back(scalar_traits<S>::to_double(l));
            out.push_back(std::move(rs));
            names.clear();
            names.insert(trace.steps[n].winner_label);
            block_first = static_cast<long>(n);
        } else {
            names = std::move(cand);
        }
    }
    return out;
}

struct RothRatioRow {
    long step = 0;
    double height_ratio = 0.0; // max h^{(k+1)} / (min h^{(k)})^{1+eps}
    double length_ratio = 0.0; // max lam^{(k)} / (min lam^{(k+1)})^{1-eps}
};

struct RothReport {
    double epsilon = 0.0;
    std::vector<RothRatioRow> rows;
    double running_max_height = 0.0;
    double running_max_length = 0.0;
};

template <class S>
RothReport roth_distortion_report(const BasicRauzyTrace<S>& trace, double epsilon) {
    std::vector<RothStep> acc = roth_accelerate(trace);
    RothReport rep;
    rep.epsilon = epsilon;
    for (std::size_t k = 0; k + 1 < acc.size(); ++k) {
        double hmin = kernels::kInf, hmax_next = 0.0;
        for (const auto& v : acc[k].heights) hmin = std::min(hmin, v.get_d());
        for (const auto& v : acc[k + 1].heights) hmax_next = std::max(hmax_next, v.get_d());
        double lmax = 0.0, lmin_next = kernels::kInf;
        for (double v : acc[k].lambda) lmax = std::max(lmax, v);
        for (double v : acc[k + 1].lambda) lmin_next = std::min(lmin_next, v);
        RothRatioRow row;
        row.step = static_cast<long>(k);
        row.height_ratio = hmax_next / std::pow(hmin, 1.0 + epsilon);
        row.length_ratio = lmax / std::pow(lmin_next, 1.0 - epsilon);
        rep.running_max_height = std::max(rep.running_max_height, row.height_ratio);
        rep.running_max_length = std::max(rep.running_max_length, row.length_ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace ietlab
