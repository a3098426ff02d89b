#pragma once

#include <cmath>
#include <vector>

#include "ietlab/cylinder.hpp"
#include "ietlab/rauzy.hpp"
#include "ietlab/rng.hpp"

namespace ietlab {

// Invertible renormalization coordinates (perm, lambda, tau): lambda drives
// forward moves, tau remembers the past.
struct NaturalExtensionTriple {
    Permutation perm;
    std::vector<double> lambda; // in the open simplex
    std::vector<double> tau;    // in the cone Theta_perm
};

inline bool in_theta_cone(const Permutation& p, const std::vector<double>& tau) {
    const std::size_t d = tau.size();
    double s = 0.0;
    for (std::size_t k = 1; k <= d - 1; ++k) {
        s += tau[k - 1];
        if (!(s > 0)) return false;
    }
    s = 0.0;
    Permutation inv = p.inverse();
    for (std::size_t k = 1; k <= d - 1; ++k) {
        s += tau[inv(k) - 1];
        if (!(s < 0)) return false;
    }
    return true;
}

// Zippered-rectangle area: sum_k lambda_k (sum_{i<k} tau_i - sum_{i<pi(k)} tau_{pi^-1 i}).
inline double area_of(const NaturalExtensionTriple& t) {
    const std::size_t d = t.lambda.size();
    Permutation inv = t.perm.inverse();
    std::vector<double> pre(d + 1, 0.0), pre_img(d + 1, 0.0);
    for (std::size_t k = 1; k <= d; ++k) pre[k] = pre[k - 1] + t.tau[k - 1];
    for (std::size_t k = 1; k <= d; ++k) pre_img[k] = pre_img[k - 1] + t.tau[inv(k) - 1];
    double area = 0.0;
    for (std::size_t k = 1; k <= d; ++k)
        area += t.lambda[k - 1] * (pre[k - 1] - pre_img[t.perm(k) - 1]);
    return area;
}

namespace rvdetail {

// Applies the inverse lambda-transport of a move at perm p (i.e. M^{-1}).
inline std::vector<double> forward_transport(const std::vector<std::size_t>& p, ArrowKind k,
                                             const std::vector<double>& v) {
    const std::size_t d = p.size();
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    std::vector<double> w(d);
    if (k == ArrowKind::top) {
        w = v;
        w[d - 1] = v[d - 1] - v[jd];
    } else {
        for (std::size_t i = 0; i < jd; ++i) w[i] = v[i];
        w[jd] = v[jd] - v[d - 1];
        w[jd + 1] = v[d - 1];
        for (std::size_t i = jd + 2; i < d; ++i) w[i] = v[i - 1];
    }
    return w;
}

// Applies the lambda-transport M of a move at (predecessor) perm p.
inline std::vector<double> backward_transport(const std::vector<std::size_t>& p, ArrowKind k,
                                              const std::vector<double>& v) {
    const std::size_t d = p.size();
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    std::vector<double> w(d);
    if (k == ArrowKind::top) {
        w = v;
        w[d - 1] = v[d - 1] + v[jd];
    } else {
        for (std::size_t i = 0; i < jd; ++i) w[i] = v[i];
        w[jd] = v[jd] + v[jd + 1];
        for (std::size_t i = jd + 1; i + 1 < d; ++i) w[i] = v[i + 1];
        w[d - 1] = v[jd + 1];
    }
    return w;
}

} // namespace rvdetail

inline NaturalExtensionTriple natural_extension_step(const NaturalExtensionTriple& t,
                                                     Direction dir) {
    if (!in_theta_cone(t.perm, t.tau)) throw ConeViolation();
    NaturalExtensionTriple out;
    if (dir == Direction::forward) {
        auto kind = rvdetail::peek_kind(t.perm, t.lambda);
        if (!kind) throw UndefinedStep();
        out.perm = rauzy_move(t.perm, *kind);
        out.lambda = rvdetail::forward_transport(t.perm.images(), *kind, t.lambda);
        out.tau = rvdetail::forward_transport(t.perm.images(), *kind, t.tau);
    } else {
        double s = 0.0;
        for (double v : t.tau) s += v;
        if (s == 0.0) throw UndefinedStep();
        // negative total tau: the move that produced this triple was top
        ArrowKind kind = s < 0 ? ArrowKind::top : ArrowKind::bottom;
        out.perm = rauzy_move_inverse(t.perm, kind);
        out.lambda = rvdetail::backward_transport(out.perm.images(), kind, t.lambda);
        out.tau = rvdetail::backward_transport(out.perm.images(), kind, t.tau);
    }
    // lambda renormalizes to the unit simplex; tau carries the inverse factor
    // so the bilinear area form is preserved.
    double norm = 0.0;
    for (double v : out.lambda) norm += v;
    for (auto& v : out.lambda) v /= norm;
    for (auto& v : out.tau) v *= norm;
    if (!in_theta_cone(out.perm, out.tau)) throw ConeViolation();
    return out;
}

// Rejection sampling of tau from [-1,1]^d into the cone, rescaled to area 1.
inline NaturalExtensionTriple sample_triple(const Permutation& p, Rng& rng,
                                            std::size_t max_tries = 1'000'000) {
    NaturalExtensionTriple t;
    t.perm = p;
    t.lambda = rng.simplex(p.size());
    for (std::size_t tries = 0; tries < max_tries; ++tries) {
        std::vector<double> tau(p.size());
        for (auto& v : tau) v = rng.uniform(-1.0, 1.0);
        if (!in_theta_cone(p, tau)) continue;
        t.tau = tau;
        double a = area_of(t);
        if (a <= 0) continue;
        for (auto& v : t.tau) v /= a;
        return t;
    }
    throw Error("cone sampling failed");
}

struct MarkovCheckReport {
    std::size_t samples = 0;
    std::size_t failures = 0;      // image outside the expected bi-sided cylinder
    std::size_t perm_mismatch = 0; // end permutation differed from the path's
};

// Samples (pi, lambda, tau) with lambda in the path cylinder and tau anywhere
// in the cone, pushes them |path| moves forward and verifies the image lies
// in {pi'} x Delta_d x Theta_{B_gamma}.
inline MarkovCheckReport markov_cylinder_check(const Permutation& start,
                                               const std::vector<RauzyArrow>& path,
                                               std::size_t samples, std::uint64_t seed,
                                               bool sample_inside = true) {
    require_composable(path);
    if (!path.empty() && !(path.front().from == start)) throw NonComposablePath();
    IMat transport = IMat::identity(start.size());
    for (const auto& a : path) transport = transport * a.lambda_mat;
    Permutation end = path.empty() ? start : path.back().to;

    MarkovCheckReport rep;
    rep.samples = samples;
    Rng rng(seed);
    const std::size_t d = start.size();
    for (std::size_t s = 0; s < samples; ++s) {
        NaturalExtensionTriple t = sample_triple(start, rng);
        if (sample_inside) {
            // lambda = M u / |M u| lies in the cylinder simplex
            std::vector<double> u = rng.simplex(d);
            std::vector<double> lam(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    lam[i] += to_double(transport(i, j)) * u[j];
            double n = 0;
            for (double v : lam) n += v;
            for (auto& v : lam) v /= n;
            t.lambda = lam;
        }
        NaturalExtensionTriple cur = t;
        bool ok = true;
        try {
            for (std::size_t k = 0; k < path.size(); ++k)
                cur = natural_extension_step(cur, Direction::forward);
        } catch (const Error&) {
            ok = false;
        }
        if (ok && !(cur.perm == end)) {
            ++rep.perm_mismatch;
            ok = false;
        }
        if (ok) {
            // tau' in Theta_{B_gamma}  <=>  M tau' in Theta_{start}
            std::vector<double> back(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    back[i] += to_double(transport(i, j)) * cur.tau[j];
            ok = in_theta_cone(start, back);
        }
        if (!ok) ++rep.failures;
    }
    return rep;
}

} // namespace ietlab
