#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ietlab/rauzy.hpp"
#include "ietlab/rng.hpp"

namespace ietlab {

struct LyapunovEstimate {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double ratio = 0.0; // lambda2 / lambda1, clamped at 0
    long sample_steps = 0;
    std::size_t ensemble_size = 0;
    std::size_t resampled_orbits = 0;
};

namespace lydetail {

// Height-transport of one elementary move applied to a frame column.
inline void push_column(const std::vector<std::size_t>& p, ArrowKind k, std::vector<double>& v) {
    const std::size_t d = p.size();
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    if (k == ArrowKind::top) {
        v[jd] += v[d - 1];
    } else {
        double vd = v[d - 1];
        double vj = v[jd];
        std::vector<double> w(d);
        for (std::size_t i = 0; i <= jd; ++i) w[i] = v[i];
        w[jd + 1] = vj + vd;
        for (std::size_t i = jd + 2; i < d; ++i) w[i] = v[i - 1];
        v = std::move(w);
    }
}

struct OrbitResult {
    double log1 = 0.0, log2 = 0.0;
    bool ok = false;
};

inline OrbitResult run_orbit(const Permutation& seed_perm, long zorich_steps, Rng rng,
                             long reorth_every, bool want_second) {
    const std::size_t d = seed_perm.size();
    Permutation perm = seed_perm;
    std::vector<double> lambda = rng.simplex(d);
    std::vector<double> v1(d, 1.0); // positive vector for the top exponent
    std::vector<double> v2(d);
    for (std::size_t i = 0; i < d; ++i) v2[i] = rng.uniform(-1.0, 1.0);

    OrbitResult res;
    double acc1 = 0.0, acc2 = 0.0;
    bool positive_seen = false;
    IMat posmat = IMat::identity(d);
    long since_reorth = 0;

    auto reorth = [&]() {
        double n1 = 0.0;
        for (double x : v1) n1 += x * x;
        n1 = std::sqrt(n1);
        if (!(n1 > 0) || !std::isfinite(n1)) return false;
        acc1 += std::log(n1);
        for (auto& x : v1) x /= n1;
        if (want_second) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += v1[i] * v2[i];
            for (std::size_t i = 0; i < d; ++i) v2[i] -= dot * v1[i];
            double n2 = 0.0;
            for (double x : v2) n2 += x * x;
            n2 = std::sqrt(n2);
            if (!(n2 > 0) || !std::isfinite(n2)) return false;
            acc2 += std::log(n2);
            for (auto& x : v2) x /= n2;
        }
        return true;
    };

    try {
        for (long step = 0; step < zorich_steps; ++step) {
            // one Zorich step = maximal same-kind run
            auto kind = rvdetail::peek_kind(perm, lambda);
            if (!kind) return res;
            while (true) {
                std::vector<std::size_t> imgs = perm.images();
                rv_step_inplace(perm, lambda);
                push_column(imgs, *kind, v1);
                if (want_second) push_column(imgs, *kind, v2);
                if (!positive_seen && step < 600) {
                    posmat = posmat * rvdetail::lambda_matrix(imgs, *kind);
                    if (posmat.is_positive()) positive_seen = true;
                }
                double norm = 0.0;
                for (double l : lambda) norm += l;
                for (auto& l : lambda) l /= norm;
                double mx = 0.0;
                for (double x : v1) mx = std::max(mx, std::fabs(x));
                if (mx > 1e250 && !reorth()) return res; // long runs overflow otherwise
                auto next = rvdetail::peek_kind(perm, lambda);
                if (!next) return res;
                if (*next != *kind) break;
            }
            if (++since_reorth == reorth_every) {
                since_reorth = 0;
                if (!reorth()) return res;
            }
        }
        if (!reorth()) return res;
    } catch (const UndefinedStep&) {
        return res;
    }
    if (!positive_seen) return res;
    res.log1 = acc1;
    res.log2 = acc2;
    res.ok = true;
    return res;
}

} // namespace lydetail

// Two top exponents of the accelerated length cocycle, from orthogonalized
// growth rates of a pushed 2-frame along random-length orbits.
inline LyapunovEstimate lyapunov_estimate(const Permutation& seed_perm, std::size_t ensemble,
                                          long zorich_steps, std::uint64_t seed,
                                          long reorth_every = 10) {
    seed_perm.require_irreducible();
    const bool want_second = seed_perm.size() > 2;
    LyapunovEstimate est;
    est.sample_steps = zorich_steps;
    est.ensemble_size = ensemble;
    Rng master(seed);
    double sum1 = 0.0, sum2 = 0.0;
    std::size_t done = 0, attempts = 0;
    const std::size_t max_attempts = ensemble * 4 + 16;
    while (done < ensemble && attempts < max_attempts) {
        lydetail::OrbitResult r =
            lydetail::run_orbit(seed_perm, zorich_steps, master.child(attempts), reorth_every,
                                want_second);
        ++attempts;
        if (!r.ok) {
            ++est.resampled_orbits;
            continue;
        }
        sum1 += r.log1 / static_cast<double>(zorich_steps);
        sum2 += r.log2 / static_cast<double>(zorich_steps);
        ++done;
    }
    if (done == 0) throw DegenerateProduct();
    est.lambda1 = sum1 / static_cast<double>(done);
    est.lambda2 = want_second ? sum2 / static_cast<double>(done) : 0.0;
    est.ratio = est.lambda1 > 0 ? std::max(0.0, est.lambda2 / est.lambda1) : 0.0;
    return est;
}

} // namespace ietlab
