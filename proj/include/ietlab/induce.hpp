#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "ietlab/bigmat.hpp"
#include "ietlab/iet.hpp"

namespace ietlab {

template <class S>
struct BasicTower {
    S lo{}, hi{};                  // base interval (lo, hi)
    BigInt height{};               // number of floors
    std::optional<double> epsilon; // rigidity quality, when certified

    S width() const { return hi - lo; }
    double area() const { return to_double(height) * scalar_traits<S>::to_double(hi - lo); }
};

using TowerDescriptor = BasicTower<double>;

template <class S>
struct BasicInducedMap {
    BasicIet<S> sub_iet;             // return map on J, lengths unnormalized
    S window_lo{}, window_hi{};
    std::vector<long> return_times;  // per continuity interval of sub_iet
    std::vector<BasicTower<S>> towers;
};

using InducedMap = BasicInducedMap<double>;

namespace detail {

template <class S>
struct Piece {
    S orig_lo, orig_hi; // source subinterval of J
    S cur_lo, cur_hi;   // T^steps image
    long steps;
};

} // namespace detail

// First-return map of T to J = [lo, hi). The pieces of J are flowed forward,
// split at discontinuities and at the window edges, until each returns.
template <class S>
BasicInducedMap<S> induce_first_return(const BasicIet<S>& t, const S& lo, const S& hi,
                                       long max_steps) {
    if (!(lo >= 0) || !(hi <= t.total()) || !(lo < hi)) throw Error("bad induction window");
    const S tol = scalar_traits<S>::tol();

    std::deque<detail::Piece<S>> active;
    active.push_back({lo, hi, lo, hi, 0});
    std::vector<detail::Piece<S>> returned;

    while (!active.empty()) {
        detail::Piece<S> p = active.front();
        active.pop_front();
        // slivers at the window edges are cut/rounding artifacts
        if (!(p.orig_hi - p.orig_lo > tol)) continue;

        if (p.steps > 0) {
            // Clip against the window; interior overlaps split into sub-pieces.
            if (p.cur_lo >= lo && p.cur_hi <= hi) {
                returned.push_back(p);
                continue;
            }
            bool cut = false;
            for (const S& edge : {lo, hi}) {
                if (p.cur_lo < edge && edge < p.cur_hi) {
                    S mid = p.orig_lo + (edge - p.cur_lo);
                    active.push_back({p.orig_lo, mid, p.cur_lo, edge, p.steps});
                    active.push_back({mid, p.orig_hi, edge, p.cur_hi, p.steps});
                    cut = true;
                    break;
                }
            }
            if (cut) continue;
        }

        if (p.steps >= max_steps) throw ReturnTimeExceeded(max_steps);

        // Split at discontinuities inside the current image, then translate.
        std::vector<S> cuts;
        for (std::size_t i = 1; i < t.size(); ++i) {
            const S& b = t.endpoints()[i];
            if (p.cur_lo < b && b < p.cur_hi) cuts.push_back(b);
        }
        cuts.push_back(p.cur_hi);
        S cl = p.cur_lo, ol = p.orig_lo;
        for (const S& cr : cuts) {
            S orr = ol + (cr - cl);
            std::size_t idx = t.interval_index(cl);
            const S& delta = t.displacements()[idx - 1];
            active.push_back({ol, orr, cl + delta, cr + delta, p.steps + 1});
            cl = cr;
            ol = orr;
        }
    }

    std::sort(returned.begin(), returned.end(),
              [](const auto& a, const auto& b) { return a.orig_lo < b.orig_lo; });

    BasicInducedMap<S> out;
    out.window_lo = lo;
    out.window_hi = hi;
    const std::size_t n = returned.size();
    std::vector<S> lengths(n);
    std::vector<std::pair<S, std::size_t>> image_order(n);
    for (std::size_t i = 0; i < n; ++i) {
        lengths[i] = returned[i].orig_hi - returned[i].orig_lo;
        image_order[i] = {returned[i].cur_lo, i};
        out.return_times.push_back(returned[i].steps);
        BasicTower<S> tw;
        tw.lo = returned[i].orig_lo;
        tw.hi = returned[i].orig_hi;
        tw.height = returned[i].steps;
        out.towers.push_back(tw);
    }
    std::sort(image_order.begin(), image_order.end());
    std::vector<std::size_t> images(n);
    for (std::size_t rank = 0; rank < n; ++rank) images[image_order[rank].second] = rank + 1;
    out.sub_iet = BasicIet<S>(Permutation(images), lengths, /*normalize=*/false);
    return out;
}

} // namespace ietlab
