#include "ietlab/json_io.hpp"

#include <fstream>

namespace ietlab {

Json iet_to_json(const Iet& t) {
    Json j;
    j["perm"] = t.perm().images();
    j["lengths"] = t.lengths();
    j["exact"] = false;
    return j;
}

Json iet_to_json(const RatIet& t) {
    Json j;
    j["perm"] = t.perm().images();
    std::vector<double> approx;
    Json rat = Json::array();
    for (const auto& l : t.lengths()) {
        approx.push_back(l.get_d());
        rat.push_back({l.get_num().get_str(), l.get_den().get_str()});
    }
    j["lengths"] = approx;
    j["lengths_rational"] = rat;
    j["exact"] = true;
    return j;
}

bool json_iet_is_exact(const Json& j) { return j.value("exact", false); }

Iet iet_from_json(const Json& j) {
    std::vector<std::size_t> perm = j.at("perm").get<std::vector<std::size_t>>();
    std::vector<double> lengths = j.at("lengths").get<std::vector<double>>();
    return Iet(Permutation(perm), lengths, /*normalize=*/false);
}

RatIet rat_iet_from_json(const Json& j) {
    std::vector<std::size_t> perm = j.at("perm").get<std::vector<std::size_t>>();
    std::vector<mpq_class> lengths;
    if (j.contains("lengths_rational")) {
        for (const auto& pq : j.at("lengths_rational")) {
            mpz_class p(pq.at(0).get<std::string>());
            mpz_class q(pq.at(1).get<std::string>());
            mpq_class v(p, q);
            v.canonicalize();
            lengths.push_back(v);
        }
    } else {
        for (double v : j.at("lengths").get<std::vector<double>>())
            lengths.push_back(mpq_class(v));
    }
    return RatIet(Permutation(perm), lengths, /*normalize=*/false);
}

Json roof_to_json(const SymLogRoof& f) {
    Json j;
    j["c_plus"] = f.c_plus();
    j["c_minus"] = f.c_minus();
    j["g"] = {{"type", "piecewise_linear"},
              {"slopes", f.g().slopes},
              {"intercepts", f.g().intercepts}};
    j["symmetric"] = f.symmetric();
    j["mean"] = f.mean();
    return j;
}

SymLogRoof roof_from_json(const Json& j, const std::vector<double>& endpoints) {
    std::vector<double> cp = j.at("c_plus").get<std::vector<double>>();
    std::vector<double> cm = j.at("c_minus").get<std::vector<double>>();
    PiecewiseLinear g;
    if (j.contains("g")) {
        const Json& gj = j.at("g");
        if (gj.value("type", "piecewise_linear") != std::string("piecewise_linear"))
            throw ValidationError("roof.g.type", "only piecewise_linear is supported");
        g.slopes = gj.at("slopes").get<std::vector<double>>();
        g.intercepts = gj.at("intercepts").get<std::vector<double>>();
    } else {
        g = PiecewiseLinear::constant(endpoints.size() - 1, 1.0);
    }
    bool symmetric = j.value("symmetric", true);
    return SymLogRoof(endpoints, cp, cm, g, symmetric);
}

namespace {

Json imat_to_json(const IMat& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j).get_str());
        rows.push_back(row);
    }
    return rows;
}

} // namespace

template <class S>
Json trace_to_json(const BasicRauzyTrace<S>& trace, bool with_matrices) {
    Json j;
    if constexpr (scalar_traits<S>::exact) j["start"] = iet_to_json(trace.start);
    else j["start"] = iet_to_json(trace.start);
    j["mode"] = trace.mode == InductionMode::zorich ? "zorich" : "rauzy";
    Json steps = Json::array();
    for (const auto& st : trace.steps) {
        Json s;
        s["perm"] = st.perm.images();
        std::vector<double> lam;
        for (const auto& l : st.lambda) lam.push_back(scalar_traits<S>::to_double(l));
        s["lambda"] = lam;
        Json hs = Json::array();
        for (const auto& h : st.heights) hs.push_back(h.get_str());
        s["heights"] = hs;
        s["interval_length"] = scalar_traits<S>::to_double(st.interval_length);
        s["kind"] = st.kind == ArrowKind::top ? "top" : "bottom";
        s["run_length"] = st.run_length;
        s["winner"] = st.winner_label;
        if (with_matrices) s["matrix"] = imat_to_json(st.step_mat);
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

template Json trace_to_json<double>(const BasicRauzyTrace<double>&, bool);
template Json trace_to_json<mpq_class>(const BasicRauzyTrace<mpq_class>&, bool);

Json certificate_to_json(const RigidityCertificate& c, double tol_eq) {
    Json j;
    j["base"] = {c.tower.lo, c.tower.hi};
    j["height"] = c.tower.height.get_str();
    j["area"] = c.area;
    j["epsilon"] = c.epsilon;
    j["displacement"] = c.displacement;
    j["signed_displacement"] = c.signed_displacement;
    j["ratio"] = c.ratio();
    j["source_step"] = c.source_step;
    j["column"] = c.column;
    j["flavor"] = to_string(c.flavor);
    j["tol_eq"] = tol_eq;
    return j;
}

Json resonance_to_json(const ResonanceCertificate& c) {
    Json j;
    j["q"] = c.q;
    j["k"] = c.k;
    j["r"] = c.r;
    j["epsilon"] = c.epsilon;
    j["flavor"] = to_string(c.flavor);
    j["tower"] = certificate_to_json(c.tower);
    j["multiples_verified"] = c.multiples_verified;
    j["worst_multiple_ratio"] = c.worst_multiple_ratio;
    return j;
}

Json tail_report_to_json(const TailReport& r) {
    Json j;
    j["c_hat"] = r.c_hat;
    j["b_hat"] = r.b_hat;
    j["r_squared"] = r.r_squared;
    j["quantiles"] = {{"q50", r.q50}, {"q90", r.q90}, {"q99", r.q99}};
    j["pass"] = r.pass;
    return j;
}

Json sample_set_to_json(const CenteredSampleSet& s, bool with_samples) {
    Json j;
    j["rigidity_time"] = s.rigidity_time.get_str();
    j["centering"] = s.centering;
    j["count"] = s.samples.size();
    j["dropped"] = s.dropped;
    j["seed"] = s.seed;
    if (with_samples) j["samples"] = s.samples;
    return j;
}

Json tightness_to_json(const TightnessReport& r) {
    Json j;
    j["q50"] = r.q50;
    j["q90"] = r.q90;
    j["q99"] = r.q99;
    j["worst_growth"] = r.worst_growth;
    j["trend"] = r.trend;
    j["pass"] = r.pass;
    return j;
}

Json shearing_to_json(const ShearingReport& r) {
    Json j;
    j["t"] = r.t;
    j["delta"] = r.delta;
    j["q"] = r.q;
    j["k"] = r.k;
    j["partition_mass"] = r.partition_mass;
    j["fraction_discontinuity_free"] = r.sampled_fraction_d;
    j["s1_min"] = r.s1_min;
    j["s1_q10"] = r.s1_q10;
    j["s2_max"] = r.s2_max;
    Json recs = Json::array();
    for (const auto& rec : r.records) {
        recs.push_back({{"lo", rec.lo},
                        {"hi", rec.hi},
                        {"floor", rec.floor_index},
                        {"d_free", rec.discontinuity_free},
                        {"n_lo", rec.n_lo},
                        {"n_hi", rec.n_hi},
                        {"s1", rec.s1},
                        {"s2_ratio", rec.s2_ratio},
                        {"excised", rec.excised}});
    }
    j["records"] = std::move(recs);
    return j;
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

} // namespace ietlab
