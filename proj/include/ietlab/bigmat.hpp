#pragma once

#include <cstddef>
#include <gmpxx.h>
#include <string>
#include <vector>

#include "ietlab/errors.hpp"

namespace ietlab {

using BigInt = mpz_class;
using Rational = mpq_class;
using IVec = std::vector<BigInt>;

// Dense square matrix of arbitrary-precision integers. Cocycle column sums
// (the return-time heights) overflow 64 bits after ~90 accelerated steps, so
// everything stays in mpz.
class IMat {
public:
    IMat() = default;
    explicit IMat(std::size_t d) : d_(d), a_(d * d, 0) {}

    static IMat identity(std::size_t d) {
        IMat m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t dim() const { return d_; }
    BigInt& operator()(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }
    const BigInt& operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

    bool operator==(const IMat& o) const { return d_ == o.d_ && a_ == o.a_; }

    IMat transpose() const {
        IMat t(d_);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    IMat operator*(const IMat& o) const {
        IMat r(d_);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t k = 0; k < d_; ++k) {
                const BigInt& v = (*this)(i, k);
                if (v == 0) continue;
                for (std::size_t j = 0; j < d_; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    IVec apply(const IVec& v) const {
        IVec r(d_, 0);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j)
                if ((*this)(i, j) != 0) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    IVec apply_transpose(const IVec& v) const {
        IVec r(d_, 0);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j)
                if ((*this)(i, j) != 0) r[j] += (*this)(i, j) * v[i];
        return r;
    }

    IVec column_sums() const {
        IVec s(d_, 0);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) s[j] += (*this)(i, j);
        return s;
    }

    BigInt entry_sum() const {
        BigInt s = 0;
        for (const auto& x : a_) s += x;
        return s;
    }

    bool is_nonnegative() const {
        for (const auto& x : a_)
            if (x < 0) return false;
        return true;
    }

    bool is_positive() const {
        for (const auto& x : a_)
            if (x <= 0) return false;
        return true;
    }

    std::size_t nonzero_count() const {
        std::size_t n = 0;
        for (const auto& x : a_)
            if (x != 0) ++n;
        return n;
    }

    // Exact determinant via rational Gaussian elimination (used by tests on
    // small cocycle matrices only).
    Rational determinant() const {
        std::vector<Rational> m(d_ * d_);
        for (std::size_t i = 0; i < d_ * d_; ++i) m[i] = Rational(a_[i]);
        Rational det = 1;
        for (std::size_t c = 0; c < d_; ++c) {
            std::size_t p = c;
            while (p < d_ && m[p * d_ + c] == 0) ++p;
            if (p == d_) return Rational(0);
            if (p != c) {
                for (std::size_t j = 0; j < d_; ++j) std::swap(m[p * d_ + j], m[c * d_ + j]);
                det = -det;
            }
            det *= m[c * d_ + c];
            for (std::size_t r = c + 1; r < d_; ++r) {
                if (m[r * d_ + c] == 0) continue;
                Rational f = m[r * d_ + c] / m[c * d_ + c];
                for (std::size_t j = c; j < d_; ++j) m[r * d_ + j] -= f * m[c * d_ + j];
            }
        }
        det.canonicalize();
        return det;
    }

private:
    std::size_t d_ = 0;
    std::vector<BigInt> a_;
};

inline double balance_ratio(const IMat& m) {
    IVec s = m.column_sums();
    BigInt mx = s[0], mn = s[0];
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == 0) throw ZeroColumn(j);
        if (s[j] > mx) mx = s[j];
        if (s[j] < mn) mn = s[j];
    }
    return mpq_class(mx, mn).get_d();
}

inline BigInt max_column_sum(const IMat& m) {
    IVec s = m.column_sums();
    BigInt mx = s[0];
    for (const auto& v : s)
        if (v > mx) mx = v;
    return mx;
}

inline double to_double(const BigInt& v) { return v.get_d(); }
inline std::string to_decimal(const BigInt& v) { return v.get_str(); }

} // namespace ietlab
