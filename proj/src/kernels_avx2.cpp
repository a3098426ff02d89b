#include "ietlab/kernels/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <cmath>
#include <immintrin.h>

namespace ietlab::kernels {

namespace {

const __m256d kOne = _mm256_set1_pd(1.0);
const __m256d kHalf = _mm256_set1_pd(0.5);
const __m256d kSqrt2 = _mm256_set1_pd(1.4142135623730951);
const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
const __m256d kVInf = _mm256_set1_pd(kInf);
const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);

// log(x) for positive normal doubles: exponent split plus atanh series, about
// 1 ulp worst case on the inputs the kernels produce (distances in (0,1]).
inline __m256d vlog(__m256d x) {
    __m256i xi = _mm256_castpd_si256(x);
    __m256i e64 = _mm256_srli_epi64(xi, 52);
    __m128i e32 = _mm256_castsi256_si128(
        _mm256_permutevar8x32_epi32(e64, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0)));
    __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(e32), _mm256_set1_pd(1023.0));
    const __m256i mant = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i bias = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(xi, mant), bias));
    __m256d gt = _mm256_cmp_pd(m, kSqrt2, _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, kHalf), gt);
    e = _mm256_add_pd(e, _mm256_and_pd(gt, kOne));
    __m256d s = _mm256_div_pd(_mm256_sub_pd(m, kOne), _mm256_add_pd(m, kOne));
    __m256d z = _mm256_mul_pd(s, s);
    __m256d p = _mm256_set1_pd(1.0 / 17.0);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_fmadd_pd(p, z, kOne);
    __m256d lm = _mm256_mul_pd(_mm256_add_pd(s, s), p);
    return _mm256_fmadd_pd(e, kLn2Hi, _mm256_fmadd_pd(e, kLn2Lo, lm));
}

// Count of interior endpoints <= x, i.e. the 0-based interval index.
inline __m256i interval_index(const double* beta, int d, __m256d x) {
    __m256i idx = _mm256_setzero_si256();
    for (int j = 1; j < d; ++j) {
        __m256d ge = _mm256_cmp_pd(x, _mm256_set1_pd(beta[j]), _CMP_GE_OQ);
        idx = _mm256_add_epi64(idx, _mm256_srli_epi64(_mm256_castpd_si256(ge), 63));
    }
    return idx;
}

struct RoofAccum {
    __m256d acc = _mm256_setzero_pd();
    __m256d mind = _mm256_set1_pd(kInf);
};

// One roof evaluation fused with distance bookkeeping; idx is the interval
// index, already computed by the caller (shared with the orbit step).
inline void roof_step(const RoofTables& r, int order, __m256d x, __m256i idx, RoofAccum& ra,
                      ClosestTrack* track, std::size_t lane0, long step) {
    for (int i = 0; i <= r.d; ++i) {
        __m256d dist = _mm256_sub_pd(x, _mm256_set1_pd(r.beta[i]));
        __m256d right = _mm256_cmp_pd(dist, _mm256_setzero_pd(), _CMP_GT_OQ);
        __m256d dabs = _mm256_and_pd(dist, kAbsMask);
        ra.mind = _mm256_min_pd(ra.mind, dabs);
        if (track) {
            std::size_t base = static_cast<std::size_t>(i) * track->lanes + lane0;
            __m256d candp = _mm256_blendv_pd(kVInf, dabs, right);
            __m256d candm = _mm256_blendv_pd(dabs, kVInf, right);
            __m256d mp = _mm256_loadu_pd(&track->m_plus[base]);
            __m256d mm = _mm256_loadu_pd(&track->m_minus[base]);
            _mm256_storeu_pd(&track->m_plus[base], _mm256_min_pd(mp, candp));
            _mm256_storeu_pd(&track->m_minus[base], _mm256_min_pd(mm, candm));
        }
        double cp = r.cplus[i], cm = r.cminus[i];
        if (cp == 0.0 && cm == 0.0) continue;
        if (order == 0) {
            __m256d w = _mm256_blendv_pd(_mm256_set1_pd(cm), _mm256_set1_pd(cp), right);
            ra.acc = _mm256_fnmadd_pd(w, vlog(dabs), ra.acc);
        } else if (order == 1) {
            __m256d w = _mm256_blendv_pd(_mm256_set1_pd(cm), _mm256_set1_pd(-cp), right);
            ra.acc = _mm256_fmadd_pd(w, _mm256_div_pd(kOne, dabs), ra.acc);
        } else {
            __m256d w = _mm256_blendv_pd(_mm256_set1_pd(cm), _mm256_set1_pd(cp), right);
            ra.acc = _mm256_fmadd_pd(w, _mm256_div_pd(kOne, _mm256_mul_pd(dabs, dabs)), ra.acc);
        }
    }
    if (order == 0) {
        __m256d slope = _mm256_i64gather_pd(r.gslope, idx, 8);
        __m256d icept = _mm256_i64gather_pd(r.gicept, idx, 8);
        ra.acc = _mm256_add_pd(ra.acc, _mm256_fmadd_pd(slope, x, icept));
    } else if (order == 1) {
        ra.acc = _mm256_add_pd(ra.acc, _mm256_i64gather_pd(r.gslope, idx, 8));
    }
    (void)step;
    (void)lane0;
}

void orbit_impl(const IetTables& t, double* x, std::size_t lanes, long steps,
                double* min_dist) {
    std::size_t l = 0;
    for (; l + 4 <= lanes; l += 4) {
        __m256d xv = _mm256_loadu_pd(x + l);
        __m256d mind = min_dist ? _mm256_loadu_pd(min_dist + l) : _mm256_set1_pd(kInf);
        for (long k = 0; k < steps; ++k) {
            __m256i idx = interval_index(t.beta, t.d, xv);
            if (min_dist) {
                __m256d bl = _mm256_i64gather_pd(t.beta, idx, 8);
                __m256d br = _mm256_i64gather_pd(t.beta + 1, idx, 8);
                __m256d dl = _mm256_sub_pd(xv, bl);
                __m256d dr = _mm256_sub_pd(br, xv);
                mind = _mm256_min_pd(mind, _mm256_min_pd(dl, dr));
            }
            xv = _mm256_add_pd(xv, _mm256_i64gather_pd(t.delta, idx, 8));
        }
        _mm256_storeu_pd(x + l, xv);
        if (min_dist) _mm256_storeu_pd(min_dist + l, mind);
    }
    if (l < lanes)
        scalar_funcs().orbit(t, x + l, lanes - l, steps, min_dist ? min_dist + l : nullptr);
}

void birkhoff_impl(const IetTables& t, const RoofTables& r, int order, double* x, double* acc,
                   std::size_t lanes, long steps, double* min_dist, ClosestTrack* track) {
    std::size_t l = 0;
    for (; l + 4 <= lanes; l += 4) {
        __m256d xv = _mm256_loadu_pd(x + l);
        RoofAccum ra;
        if (min_dist) ra.mind = _mm256_loadu_pd(min_dist + l);
        for (long k = 0; k < steps; ++k) {
            __m256i idx = interval_index(t.beta, t.d, xv);
            roof_step(r, order, xv, idx, ra, track, l, k);
            xv = _mm256_add_pd(xv, _mm256_i64gather_pd(t.delta, idx, 8));
        }
        _mm256_storeu_pd(x + l, xv);
        __m256d a = _mm256_loadu_pd(acc + l);
        _mm256_storeu_pd(acc + l, _mm256_add_pd(a, ra.acc));
        if (min_dist) _mm256_storeu_pd(min_dist + l, ra.mind);
    }
    if (l < lanes) {
        if (!track) {
            scalar_funcs().birkhoff(t, r, order, x + l, acc + l, lanes - l, steps,
                                    min_dist ? min_dist + l : nullptr, nullptr);
        } else {
            // remainder lanes one by one so the track rows stay lane-addressed
            for (; l < lanes; ++l) {
                ClosestTrack one;
                one.init(track->d, 1, track->with_args);
                scalar_funcs().birkhoff(t, r, order, x + l, acc + l, 1, steps,
                                        min_dist ? min_dist + l : nullptr, &one);
                for (int i = 0; i <= track->d; ++i) {
                    std::size_t idx = static_cast<std::size_t>(i) * track->lanes + l;
                    std::size_t oi = static_cast<std::size_t>(i);
                    if (one.m_plus[oi] < track->m_plus[idx]) track->m_plus[idx] = one.m_plus[oi];
                    if (one.m_minus[oi] < track->m_minus[idx])
                        track->m_minus[idx] = one.m_minus[oi];
                }
            }
        }
    }
}

void roof_eval_impl(const RoofTables& r, int order, const double* x, double* out,
                    std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        RoofAccum ra;
        __m256i idx = interval_index(r.beta, r.d, xv);
        roof_step(r, order, xv, idx, ra, nullptr, 0, 0);
        _mm256_storeu_pd(out + i, ra.acc);
    }
    if (i < n) scalar_funcs().roof_eval(r, order, x + i, out + i, n - i);
}

bool flow_impl(const IetTables& t, const RoofTables& r, double* x, double* s, long long* ncross,
               std::size_t lanes, double tt, long long step_budget, double tol,
               std::uint8_t* flagged) {
    std::size_t l = 0;
    for (; l + 4 <= lanes; l += 4) {
        __m256d xv = _mm256_loadu_pd(x + l);
        __m256d fiber = _mm256_add_pd(_mm256_loadu_pd(s + l), _mm256_set1_pd(tt));
        __m256i cnt = _mm256_setzero_si256();
        alignas(32) double flagf[4];
        for (int j = 0; j < 4; ++j) flagf[j] = flagged[l + j] ? 1.0 : 0.0;
        __m256d inactive =
            _mm256_cmp_pd(_mm256_loadu_pd(flagf), _mm256_setzero_pd(), _CMP_GT_OQ);
        long long budget = step_budget;
        while (true) {
            RoofAccum ra;
            __m256i idx = interval_index(t.beta, t.d, xv);
            roof_step(r, 0, xv, idx, ra, nullptr, 0, 0);
            __m256d newflag = _mm256_andnot_pd(
                inactive, _mm256_cmp_pd(ra.mind, _mm256_set1_pd(tol), _CMP_LT_OQ));
            inactive = _mm256_or_pd(inactive, newflag);
            int nfmask = _mm256_movemask_pd(newflag);
            if (nfmask)
                for (int j = 0; j < 4; ++j)
                    if (nfmask & (1 << j)) flagged[l + j] = 1;
            __m256d cross = _mm256_andnot_pd(
                inactive, _mm256_cmp_pd(fiber, ra.acc, _CMP_GE_OQ));
            if (_mm256_movemask_pd(cross) == 0) break;
            fiber = _mm256_blendv_pd(fiber, _mm256_sub_pd(fiber, ra.acc), cross);
            __m256d delta = _mm256_i64gather_pd(t.delta, idx, 8);
            xv = _mm256_blendv_pd(xv, _mm256_add_pd(xv, delta), cross);
            cnt = _mm256_add_epi64(cnt, _mm256_srli_epi64(_mm256_castpd_si256(cross), 63));
            if (--budget < 0) return false;
        }
        _mm256_storeu_pd(x + l, xv);
        alignas(32) double fb[4];
        _mm256_storeu_pd(fb, fiber);
        alignas(32) long long cc[4];
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(cc), cnt);
        for (int j = 0; j < 4; ++j) {
            s[l + j] = fb[j];
            ncross[l + j] += cc[j];
        }
    }
    if (l < lanes)
        return scalar_funcs().flow(t, r, x + l, s + l, ncross + l, lanes - l, tt, step_budget,
                                   tol, flagged + l);
    return true;
}

} // namespace

const Funcs& avx2_funcs() {
    static const Funcs f = {"avx2", orbit_impl, birkhoff_impl, roof_eval_impl, flow_impl};
    return f;
}

} // namespace ietlab::kernels

#else

namespace ietlab::kernels {
const Funcs& avx2_funcs() { return scalar_funcs(); }
} // namespace ietlab::kernels

#endif
