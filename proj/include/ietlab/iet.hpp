#pragma once

#include <cmath>
#include <cstddef>
#include <gmpxx.h>
#include <memory>
#include <optional>
#include <vector>

#include "ietlab/errors.hpp"
#include "ietlab/permutation.hpp"

namespace ietlab {

template <class S> struct scalar_traits;

template <> struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double tol() { return 1e-12; }
    static double to_double(double x) { return x; }
    static double abs(double x) { return std::fabs(x); }
};

template <> struct scalar_traits<mpq_class> {
    static constexpr bool exact = true;
    static mpq_class tol() { return mpq_class(0); }
    static double to_double(const mpq_class& x) { return x.get_d(); }
    static mpq_class abs(const mpq_class& x) { return ::abs(x); }
};

// Interval exchange transformation on [0, total), intervals half-open
// [beta_{i-1}, beta_i). S is double or mpq_class (exact mode).
template <class S>
class BasicIet {
public:
    using scalar = S;

    BasicIet() = default;

    BasicIet(Permutation perm, std::vector<S> lengths, bool normalize = true)
        : perm_(std::move(perm)), lengths_(std::move(lengths)) {
        const std::size_t d = lengths_.size();
        if (d < 2 || perm_.size() != d) throw Error("need |images| = |lengths| = d >= 2");
        perm_.require_irreducible();
        for (std::size_t i = 0; i < d; ++i)
            if (!(lengths_[i] > 0)) throw NonPositiveLength(i + 1);
        if (normalize) {
            S s = 0;
            for (const auto& l : lengths_) s += l;
            for (auto& l : lengths_) l /= s;
        }
        rebuild();
    }

    std::size_t size() const { return lengths_.size(); }
    const Permutation& perm() const { return perm_; }
    const std::vector<S>& lengths() const { return lengths_; }
    const std::vector<S>& endpoints() const { return endpoints_; } // beta_0..beta_d
    const std::vector<S>& displacements() const { return displacements_; }
    const S& total() const { return endpoints_.back(); }

    // Index i in 1..d with x in [beta_{i-1}, beta_i).
    std::size_t interval_index(const S& x) const {
        std::size_t lo = 1, hi = size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (x < endpoints_[mid]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

    S apply(const S& x) const { return x + displacements_[interval_index(x) - 1]; }

    S apply_inverse(const S& x) const { return inverse().apply(x); }

    BasicIet inverse() const {
        if (!inverse_) {
            const std::size_t d = size();
            std::vector<std::size_t> inv_images = perm_.inverse().images();
            std::vector<S> inv_lengths(d);
            for (std::size_t k = 1; k <= d; ++k) inv_lengths[k - 1] = lengths_[perm_.preimage(k) - 1];
            inverse_ = std::make_shared<BasicIet>(Permutation(inv_images), inv_lengths, false);
        }
        return *inverse_;
    }

    // Distance from x to the nearest endpoint, with its index.
    std::pair<S, std::size_t> endpoint_distance(const S& x) const {
        std::size_t i = interval_index(x);
        S left = x - endpoints_[i - 1];
        S right = endpoints_[i] - x;
        if (left <= right) return {left, i - 1};
        return {right, i};
    }

    bool near_endpoint(const S& x, const S& tol, std::size_t* which = nullptr) const {
        auto [dist, idx] = endpoint_distance(x);
        if (which) *which = idx;
        return dist < tol || dist == 0;
    }

private:
    void rebuild() {
        const std::size_t d = size();
        endpoints_.assign(d + 1, S(0));
        for (std::size_t i = 1; i <= d; ++i) endpoints_[i] = endpoints_[i - 1] + lengths_[i - 1];
        auto omega = displacement_matrix(perm_);
        displacements_.assign(d, S(0));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                if (omega[i][j] == 1) displacements_[i] += lengths_[j];
                else if (omega[i][j] == -1) displacements_[i] -= lengths_[j];
            }
    }

    Permutation perm_;
    std::vector<S> lengths_;
    std::vector<S> endpoints_;
    std::vector<S> displacements_;
    mutable std::shared_ptr<BasicIet> inverse_;
};

using Iet = BasicIet<double>;
using RatIet = BasicIet<mpq_class>;

inline Iet to_double_iet(const RatIet& t, bool normalize = false) {
    std::vector<double> lengths(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) lengths[i] = t.lengths()[i].get_d();
    return Iet(t.perm(), lengths, normalize);
}

template <class S>
BasicIet<S> make_iet(const std::vector<std::size_t>& images, std::vector<S> lengths,
                     bool normalize = true) {
    return BasicIet<S>(Permutation(images), std::move(lengths), normalize);
}

enum class Direction { forward, backward };

// Orbit segment (x, Tx, ..., T^{r-1}x) or the backward analogue. In strict
// mode any iterate closer than tol to an endpoint (including exact hits after
// the first point) raises EndpointHit.
template <class S>
std::vector<S> apply_orbit(const BasicIet<S>& t, S x, long r,
                           Direction dir = Direction::forward,
                           bool strict = true) {
    if (!(x >= 0) || !(x < t.total())) throw Error("point outside the domain");
    std::vector<S> out;
    out.reserve(static_cast<std::size_t>(r < 0 ? -r : r));
    const S tol = scalar_traits<S>::tol();
    const BasicIet<S>* map = &t;
    BasicIet<S> inv;
    if (dir == Direction::backward) {
        inv = t.inverse();
        map = &inv;
    }
    long n = r < 0 ? -r : r;
    for (long k = 0; k < n; ++k) {
        if (k > 0 && strict) {
            std::size_t which = 0;
            if (map->near_endpoint(x, tol, &which)) throw EndpointHit(k, which);
        }
        out.push_back(x);
        if (k + 1 < n) x = map->apply(x);
    }
    return out;
}

struct KeaneViolation {
    long m = 0;             // iterate count
    std::size_t i = 0;      // orbit of beta_i
    std::size_t j = 0;      // hits beta_j
};

// Checks T^m beta_i != beta_j for 1 <= m <= depth over the interior
// discontinuities i = 1..d-1, excluding the structural case j = 0, m = 1.
template <class S>
std::optional<KeaneViolation> keane_depth_check(const BasicIet<S>& t, long depth) {
    const S tol = scalar_traits<S>::tol();
    const std::size_t d = t.size();
    for (std::size_t i = 1; i < d; ++i) {
        S x = t.endpoints()[i];
        for (long m = 1; m <= depth; ++m) {
            x = t.apply(x);
            for (std::size_t j = 0; j < d; ++j) {
                S dist = scalar_traits<S>::abs(x - t.endpoints()[j]);
                bool hit = scalar_traits<S>::exact ? dist == 0 : dist < tol;
                if (hit && !(j == 0 && m == 1)) return KeaneViolation{m, i, j};
            }
        }
    }
    return std::nullopt;
}

} // namespace ietlab
