#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ietlab/bigmat.hpp"
#include "ietlab/iet.hpp"

namespace ietlab {

enum class ArrowKind { top = 0, bottom = 1 };

// One induction move. `lambda_mat` is the unimodular 0/1 matrix M with
// lambda = M * lambda'; heights propagate by its transpose. Entries stay in
// {0,1} with d+1 nonzeros and det +-1; for top moves M is the identity plus
// one off-diagonal 1, bottom moves compose that with the relabeling cycle the
// move induces on interval positions.
struct RauzyArrow {
    Permutation from, to;
    ArrowKind kind = ArrowKind::top;
    std::size_t winner_pos = 0; // domain position of the winning interval
    std::size_t loser_pos = 0;
    IMat lambda_mat;
};

namespace rvdetail {

inline std::vector<std::size_t> top_move(const std::vector<std::size_t>& p) {
    const std::size_t d = p.size();
    std::size_t pd = p[d - 1];
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    std::vector<std::size_t> q(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (i == jd) q[i] = pd + 1;
        else if (p[i] <= pd) q[i] = p[i];
        else q[i] = p[i] + 1; // p[i] < d off the jd slot
    }
    return q;
}

inline std::vector<std::size_t> bottom_move(const std::vector<std::size_t>& p) {
    const std::size_t d = p.size();
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    std::vector<std::size_t> q(d);
    for (std::size_t i = 0; i <= jd; ++i) q[i] = p[i];
    q[jd + 1] = p[d - 1];
    for (std::size_t i = jd + 2; i < d; ++i) q[i] = p[i - 1];
    return q;
}

inline std::vector<std::size_t> move_images(const std::vector<std::size_t>& p, ArrowKind k) {
    return k == ArrowKind::top ? top_move(p) : bottom_move(p);
}

inline std::vector<std::size_t> inverse_move_images(const std::vector<std::size_t>& q,
                                                    ArrowKind k) {
    const std::size_t d = q.size();
    std::vector<std::size_t> p(d);
    if (k == ArrowKind::top) {
        std::size_t qd = q[d - 1];
        std::size_t jd = 0;
        for (std::size_t i = 0; i < d; ++i)
            if (q[i] == qd + 1) jd = i;
        for (std::size_t i = 0; i < d; ++i) {
            if (i == jd) p[i] = d;
            else if (q[i] <= qd) p[i] = q[i];
            else p[i] = q[i] - 1;
        }
    } else {
        std::size_t jd = 0;
        for (std::size_t i = 0; i < d; ++i)
            if (q[i] == d) jd = i;
        for (std::size_t i = 0; i <= jd; ++i) p[i] = q[i];
        p[d - 1] = q[jd + 1];
        for (std::size_t i = jd + 1; i + 1 < d; ++i) p[i] = q[i + 1];
    }
    return p;
}

inline IMat lambda_matrix(const std::vector<std::size_t>& p, ArrowKind k) {
    const std::size_t d = p.size();
    std::size_t jd = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (p[i] == d) jd = i;
    IMat m(d);
    if (k == ArrowKind::top) {
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1;
        m(d - 1, jd) = 1;
    } else {
        for (std::size_t i = 0; i < jd; ++i) m(i, i) = 1;
        m(jd, jd) = 1;
        m(jd, jd + 1) = 1;
        for (std::size_t i = jd + 1; i + 1 < d; ++i) m(i, i + 1) = 1;
        m(d - 1, jd + 1) = 1;
    }
    return m;
}

} // namespace rvdetail

inline Permutation rauzy_move(const Permutation& p, ArrowKind k) {
    return Permutation(rvdetail::move_images(p.images(), k));
}

inline Permutation rauzy_move_inverse(const Permutation& p, ArrowKind k) {
    return Permutation(rvdetail::inverse_move_images(p.images(), k));
}

inline RauzyArrow make_arrow(const Permutation& p, ArrowKind k) {
    RauzyArrow a;
    a.from = p;
    a.to = rauzy_move(p, k);
    a.kind = k;
    const std::size_t d = p.size();
    std::size_t jd = p.preimage(d);
    a.winner_pos = k == ArrowKind::top ? d : jd;
    a.loser_pos = k == ArrowKind::top ? jd : d;
    a.lambda_mat = rvdetail::lambda_matrix(p.images(), k);
    return a;
}

// In-place elementary step on unnormalized lengths, returning the arrow.
// Lengths keep their common scale so exact identities survive in rational
// mode; callers renormalize when they need to.
template <class S>
RauzyArrow rv_step_inplace(Permutation& perm, std::vector<S>& lambda, long step_index = 0) {
    const std::size_t d = lambda.size();
    std::size_t jd = perm.preimage(d);
    const S& last_top = lambda[d - 1];
    const S& last_bot = lambda[jd - 1];
    S diff = last_top - last_bot;
    // the tie test is relative: trace lengths stay unnormalized and shrink
    if (scalar_traits<S>::exact
            ? diff == 0
            : scalar_traits<S>::abs(diff) <
                  scalar_traits<S>::tol() * (last_top + last_bot))
        throw UndefinedStep(step_index);
    ArrowKind k = diff > 0 ? ArrowKind::top : ArrowKind::bottom;
    RauzyArrow a = make_arrow(perm, k);
    if (k == ArrowKind::top) {
        lambda[d - 1] = diff;
    } else {
        std::vector<S> nl(d);
        for (std::size_t i = 0; i + 1 < jd; ++i) nl[i] = lambda[i];
        nl[jd - 1] = lambda[jd - 1] - lambda[d - 1];
        nl[jd] = lambda[d - 1];
        for (std::size_t i = jd + 1; i < d; ++i) nl[i] = lambda[i - 1];
        lambda = std::move(nl);
    }
    perm = a.to;
    return a;
}

template <class S>
std::pair<BasicIet<S>, RauzyArrow> rv_step(const BasicIet<S>& t) {
    Permutation p = t.perm();
    std::vector<S> lam = t.lengths();
    RauzyArrow a = rv_step_inplace(p, lam);
    return {BasicIet<S>(p, lam, /*normalize=*/true), a};
}

enum class InductionMode { rauzy, zorich };

template <class S>
struct TraceStep {
    Permutation perm;            // combinatorics after this step
    std::vector<S> lambda;       // unnormalized lengths after this step
    IVec heights;                // exact return times after this step
    S interval_length{};         // |I^{(n)}|
    ArrowKind kind = ArrowKind::top;
    long run_length = 1;         // elementary moves grouped into this step
    IMat step_mat;               // lambda-transport M over the grouped moves
    std::size_t winner_label = 0;
};

template <class S>
struct BasicRauzyTrace {
    BasicIet<S> start;
    InductionMode mode = InductionMode::rauzy;
    bool truncated = false; // stopped early on a tied induction step
    std::vector<TraceStep<S>> steps;

    // Cumulative lambda-transport over steps (m, n], identity when m == n.
    IMat cumulative(std::size_t m, std::size_t n) const {
        IMat acc = IMat::identity(start.size());
        for (std::size_t i = m; i < n; ++i) acc = acc * steps[i].step_mat;
        return acc;
    }
    IMat cumulative() const { return cumulative(0, steps.size()); }
};

using RauzyTrace = BasicRauzyTrace<double>;
using RatRauzyTrace = BasicRauzyTrace<mpq_class>;

namespace rvdetail {

// Kind of the next elementary move, or nullopt on a (relative) tie.
template <class S>
std::optional<ArrowKind> peek_kind(const Permutation& perm, const std::vector<S>& lambda) {
    std::size_t jd = perm.preimage(lambda.size());
    const S& a = lambda[lambda.size() - 1];
    const S& b = lambda[jd - 1];
    S diff = a - b;
    if (scalar_traits<S>::exact
            ? diff == 0
            : scalar_traits<S>::abs(diff) < scalar_traits<S>::tol() * (a + b))
        return std::nullopt;
    return diff > 0 ? ArrowKind::top : ArrowKind::bottom;
}

} // namespace rvdetail

enum class TiePolicy { throw_error, truncate };

// Runs `steps` induction steps; in zorich mode each step is a maximal run of
// same-type elementary moves. Winner labels follow the initial interval
// numbering through the relabelings the moves induce.
template <class S>
BasicRauzyTrace<S> induction_trace(const BasicIet<S>& t, long steps,
                                   InductionMode mode = InductionMode::rauzy,
                                   TiePolicy policy = TiePolicy::throw_error) {
    BasicRauzyTrace<S> trace;
    trace.start = t;
    trace.mode = mode;
    const std::size_t d = t.size();
    Permutation perm = t.perm();
    std::vector<S> lambda = t.lengths();
    IVec heights(d, 1);
    std::vector<std::size_t> label(d);
    for (std::size_t i = 0; i < d; ++i) label[i] = i + 1;
    long elementary = 0;
    // In double mode the working lengths stay renormalized to sum 1 and the
    // shrinking interval length is carried separately; cancellations in the
    // raw subtractive recursion exhaust the exponent range otherwise.
    S length_scale = 1;
    if constexpr (!scalar_traits<S>::exact) {
        S s = 0;
        for (const auto& l : lambda) s += l;
        for (auto& l : lambda) l /= s;
        length_scale = s;
    }

    auto one_move = [&]() -> std::pair<ArrowKind, std::size_t> {
        std::size_t jd_before = perm.preimage(d);
        RauzyArrow a = rv_step_inplace(perm, lambda, elementary);
        ++elementary;
        heights = a.lambda_mat.apply_transpose(heights);
        if constexpr (!scalar_traits<S>::exact) {
            S s = 0;
            for (const auto& l : lambda) s += l;
            for (auto& l : lambda) l /= s;
            length_scale *= s;
        }
        std::size_t winner = a.kind == ArrowKind::top ? label[d - 1] : label[jd_before - 1];
        if (a.kind == ArrowKind::bottom) {
            std::vector<std::size_t> nl(d);
            for (std::size_t i = 0; i < jd_before; ++i) nl[i] = label[i];
            nl[jd_before] = label[d - 1];
            for (std::size_t i = jd_before + 1; i < d; ++i) nl[i] = label[i - 1];
            label = std::move(nl);
        }
        return {a.kind, winner};
    };

    while (static_cast<long>(trace.steps.size()) < steps) {
        if (!rvdetail::peek_kind(perm, lambda)) {
            if (policy == TiePolicy::throw_error) throw UndefinedStep(elementary);
            trace.truncated = true;
            break;
        }
        TraceStep<S> cur;
        Permutation from = perm;
        auto [kind, winner] = one_move();
        cur.kind = kind;
        cur.run_length = 1;
        cur.step_mat = rvdetail::lambda_matrix(from.images(), kind);
        cur.winner_label = winner;
        if (mode == InductionMode::zorich) {
            for (;;) {
                auto next = rvdetail::peek_kind(perm, lambda);
                if (!next || *next != kind) break;
                Permutation f2 = perm;
                auto [k2, w2] = one_move();
                cur.step_mat = cur.step_mat * rvdetail::lambda_matrix(f2.images(), k2);
                cur.run_length += 1;
                cur.winner_label = w2;
            }
        }
        cur.perm = perm;
        cur.lambda = lambda;
        if constexpr (!scalar_traits<S>::exact)
            for (auto& l : cur.lambda) l *= length_scale;
        cur.heights = heights;
        S len = 0;
        for (const auto& l : cur.lambda) len += l;
        cur.interval_length = len;
        trace.steps.push_back(std::move(cur));
    }
    return trace;
}

// Trace with every elementary move recorded (rauzy mode) plus winner labels,
// as needed by the Roth-style acceleration.
template <class S>
BasicRauzyTrace<S> elementary_trace(const BasicIet<S>& t, long steps) {
    return induction_trace(t, steps, InductionMode::rauzy);
}

struct RauzyGraph {
    std::vector<Permutation> vertices;
    std::vector<RauzyArrow> arrows; // 2 per vertex, top then bottom

    std::size_t vertex_index(const Permutation& p) const {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (vertices[i] == p) return i;
        throw Error("permutation not in class");
    }
};

inline RauzyGraph rauzy_class_enumerate(const Permutation& seed) {
    seed.require_irreducible();
    RauzyGraph g;
    std::set<std::vector<std::size_t>> seen;
    std::vector<Permutation> queue{seed};
    seen.insert(seed.images());
    while (!queue.empty()) {
        Permutation p = queue.back();
        queue.pop_back();
        g.vertices.push_back(p);
        for (ArrowKind k : {ArrowKind::top, ArrowKind::bottom}) {
            RauzyArrow a = make_arrow(p, k);
            if (seen.insert(a.to.images()).second) queue.push_back(a.to);
            g.arrows.push_back(std::move(a));
        }
    }
    std::sort(g.vertices.begin(), g.vertices.end());
    return g;
}

inline std::string rauzy_graph_to_dot(const RauzyGraph& g) {
    auto name = [](const Permutation& p) {
        std::string s = "\"";
        for (std::size_t i = 1; i <= p.size(); ++i) {
            if (i > 1) s += ",";
            s += std::to_string(p(i));
        }
        return s + "\"";
    };
    std::string out = "digraph rauzy {\n";
    for (const auto& a : g.arrows) {
        out += "  " + name(a.from) + " -> " + name(a.to);
        out += a.kind == ArrowKind::top ? " [label=\"t\"];\n" : " [label=\"b\"];\n";
    }
    out += "}\n";
    return out;
}

} // namespace ietlab
