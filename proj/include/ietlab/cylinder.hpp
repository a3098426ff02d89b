#pragma once

#include <deque>
#include <vector>

#include "ietlab/bigmat.hpp"
#include "ietlab/rauzy.hpp"

namespace ietlab {

// Projective image of the length simplex under the path's lambda-transport;
// its Lebesgue mass is the reciprocal of the column-sum product.
struct CylinderSimplex {
    Permutation start_perm;
    std::vector<RauzyArrow> path;
    IMat matrix;       // cumulative lambda-transport M_1 ... M_n
    Rational measure;  // exact
    double measure_d = 0.0;
};

inline void require_composable(const std::vector<RauzyArrow>& path) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (!(path[i].to == path[i + 1].from)) throw NonComposablePath();
}

inline Rational simplex_mass(const IMat& m) {
    IVec cols = m.column_sums();
    Rational meas = 1;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] == 0) throw ZeroColumn(j);
        meas /= Rational(cols[j]);
    }
    meas.canonicalize();
    return meas;
}

inline CylinderSimplex cylinder_measure(const Permutation& start,
                                        const std::vector<RauzyArrow>& path) {
    if (!path.empty() && !(path.front().from == start)) throw NonComposablePath();
    require_composable(path);
    CylinderSimplex c;
    c.start_perm = start;
    c.path = path;
    c.matrix = IMat::identity(start.size());
    for (const auto& a : path) c.matrix = c.matrix * a.lambda_mat;
    c.measure = simplex_mass(c.matrix);
    c.measure_d = c.measure.get_d();
    return c;
}

// Membership of a (normalized) length vector in the cylinder simplex: the
// first |path| induction moves of (perm, lambda) follow the path's kinds.
template <class S>
bool lambda_in_cylinder(const Permutation& start, const std::vector<RauzyArrow>& path,
                        std::vector<S> lambda) {
    Permutation p = start;
    for (const auto& a : path) {
        auto k = rvdetail::peek_kind(p, lambda);
        if (!k || *k != a.kind) return false;
        rv_step_inplace(p, lambda);
    }
    return true;
}

struct KerkhoffResult {
    std::vector<std::vector<RauzyArrow>> extensions; // prefix-free, each extends the query
    Rational conditional_measure = 0;                // sum of m(ext | query)
    bool budget_exhausted = false;
    std::size_t nodes_visited = 0;
};

// Bounded breadth-first search for a prefix-free family of balanced
// extensions: every accepted path has C-balanced transport and max column sum
// within a factor C of the query's. Branches whose column sums already exceed
// that bound are pruned (column sums never decrease along extensions).
inline KerkhoffResult kerkhoff_extend(const Permutation& start,
                                      const std::vector<RauzyArrow>& path, double c_bound,
                                      std::size_t node_budget = 1'000'000) {
    if (c_bound <= 1.0) throw Error("balance bound must exceed 1");
    require_composable(path);
    CylinderSimplex root = cylinder_measure(start, path);
    BigInt root_max = max_column_sum(root.matrix);
    // ceil(C * root_max) as exact bound
    Rational cap_q = Rational(root_max) * Rational(c_bound);

    struct Node {
        std::vector<RauzyArrow> path;
        IMat mat;
        Permutation end;
    };
    KerkhoffResult out;
    std::deque<Node> frontier;
    frontier.push_back({path, root.matrix, path.empty() ? start : path.back().to});
    Rational accepted_mass = 0;

    while (!frontier.empty()) {
        if (out.nodes_visited >= node_budget) {
            out.budget_exhausted = true;
            break;
        }
        Node n = std::move(frontier.front());
        frontier.pop_front();
        ++out.nodes_visited;

        bool is_root = n.path.size() == path.size();
        if (!is_root) {
            IVec cols = n.mat.column_sums();
            BigInt mx = cols[0], mn = cols[0];
            for (const auto& v : cols) {
                if (v > mx) mx = v;
                if (v < mn) mn = v;
            }
            if (Rational(mx) > cap_q) continue; // prune, sums only grow
            if (Rational(mx) <= Rational(mn) * Rational(c_bound)) {
                out.extensions.push_back(n.path);
                accepted_mass += simplex_mass(n.mat);
                continue; // accepted paths are not extended: prefix-free
            }
        }
        for (ArrowKind k : {ArrowKind::top, ArrowKind::bottom}) {
            RauzyArrow a = make_arrow(n.end, k);
            Node child;
            child.path = n.path;
            child.path.push_back(a);
            child.mat = n.mat * a.lambda_mat;
            child.end = a.to;
            frontier.push_back(std::move(child));
        }
    }
    Rational root_mass = simplex_mass(root.matrix);
    out.conditional_measure = accepted_mass / root_mass;
    out.conditional_measure.canonicalize();
    return out;
}

} // namespace ietlab
