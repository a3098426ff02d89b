#include "ietlab/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ietlab/cylinder.hpp"
#include "ietlab/kernels/kernels.hpp"
#include "ietlab/lyapunov.hpp"
#include "ietlab/svg.hpp"
#include "ietlab/thread_pool.hpp"

namespace ietlab {

namespace fs = std::filesystem;

Iet sample_iet(const Permutation& p, Rng& rng) {
    return Iet(p, rng.simplex(p.size()), /*normalize=*/true);
}

ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig cfg;
    if (!j.contains("kind")) throw ValidationError("kind", "missing");
    cfg.kind = j.at("kind").get<std::string>();
    static const std::vector<std::string> kinds = {"induct",  "towers",     "resonance",
                                                   "tails",   "mixing",     "lyapunov",
                                                   "rauzy-class", "roth"};
    bool known = false;
    for (const auto& k : kinds) known = known || k == cfg.kind;
    if (!known) throw ValidationError("kind", "unknown experiment '" + cfg.kind + "'");
    cfg.raw = j;
    cfg.out_dir = j.value("out_dir", std::string("."));
    cfg.prefix = j.value("prefix", cfg.kind + "_");
    bool samples_iet = j.contains("iet") && j.at("iet").contains("sample");
    bool stochastic = cfg.kind == "tails" || cfg.kind == "mixing" || cfg.kind == "lyapunov" ||
                      cfg.kind == "resonance" || samples_iet;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    else if (stochastic)
        throw ValidationError("seed", "required for stochastic experiments");
    cfg.threads = j.value("threads", 0u);
    cfg.kernel = j.value("kernel", std::string("auto"));
    return cfg;
}

namespace {

Iet iet_from_config(const Json& j, Rng& rng) {
    if (j.contains("iet")) {
        const Json& ij = j.at("iet");
        if (ij.contains("sample")) {
            const Json& s = ij.at("sample");
            if (!s.contains("d")) throw ValidationError("iet.sample.d", "missing");
            std::size_t d = s.at("d").get<std::size_t>();
            Permutation p = s.contains("perm")
                                ? Permutation(s.at("perm").get<std::vector<std::size_t>>())
                                : Permutation::symmetric(d);
            return sample_iet(p, rng);
        }
        std::vector<double> lengths = ij.at("lengths").get<std::vector<double>>();
        bool normalize = ij.value("normalize", true);
        if (!normalize) {
            double s = 0;
            for (double v : lengths) s += v;
            if (std::fabs(s - 1.0) > 1e-9)
                throw ValidationError("iet.lengths", "sum differs from 1 with normalize=false");
        }
        return Iet(Permutation(ij.at("perm").get<std::vector<std::size_t>>()), lengths,
                   normalize);
    }
    throw ValidationError("iet", "missing");
}

SymLogRoof roof_from_config(const Json& j, const Iet& t) {
    if (j.contains("roof")) return roof_from_json(j.at("roof"), t.endpoints());
    return symmetric_unit_roof(t);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / (cfg.prefix + name)).string();
}

void write_meta(const ExperimentConfig& cfg, double seconds, int exit_code) {
    Json meta;
    meta["elapsed_seconds"] = seconds;
    meta["exit_code"] = exit_code;
    meta["kernel"] = kernels::active_name();
    auto now = std::chrono::system_clock::now().time_since_epoch();
    meta["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    write_text_file(out_path(cfg, "meta.json"), dump_canonical(meta));
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ostringstream os;
    os << header << "\n";
    for (const auto& r : rows) os << r << "\n";
    write_text_file(path, os.str());
}

} // namespace

TailsPipeline run_tails_pipeline(const Iet& t, const SymLogRoof& f, std::size_t samples_per_cert,
                                 double height_budget, const std::vector<double>& eps_schedule,
                                 std::uint64_t seed, const TailThresholds& thresholds,
                                 std::size_t max_certs) {
    TailsPipeline out;
    CoexistenceConfig ccfg;
    ccfg.height_budget = height_budget;
    out.coexistence = coexistence_search(t, f, eps_schedule, ccfg);

    // the largest distinct rigidity times
    std::vector<const CoexistenceRecord*> recs;
    for (const auto& r : out.coexistence) recs.push_back(&r);
    std::sort(recs.begin(), recs.end(), [](const CoexistenceRecord* a, const CoexistenceRecord* b) {
        return a->tower.tower.height > b->tower.tower.height;
    });
    for (const auto* r : recs) {
        bool dup = false;
        for (const auto& c : out.used_certs)
            if (c.tower.height == r->tower.tower.height) dup = true;
        if (dup) continue;
        out.used_certs.push_back(r->tower);
        if (out.used_certs.size() >= max_certs) break;
    }
    if (out.used_certs.empty()) return out;

    auto pairs = centered_tail_analysis(t, f, out.used_certs, samples_per_cert, seed, thresholds);
    for (auto& [set, rep] : pairs) {
        out.sets.push_back(std::move(set));
        out.tails.push_back(rep);
    }
    if (out.sets.size() >= 3) out.tightness = tightness_report(out.sets);
    return out;
}

MixingPipeline run_mixing_pipeline(const Iet& t, const SymLogRoof& f_mean1,
                                   const std::vector<long>& k_list, std::size_t samples,
                                   double q_lo, double q_hi, std::uint64_t seed,
                                   std::size_t shearing_samples) {
    MixingPipeline out;
    out.k_list = k_list;
    long depth = 512;
    RauzyTrace trace = induction_trace(t, depth, InductionMode::rauzy, TiePolicy::truncate);
    auto certs = all_tower_certificates(trace);
    bool found = false;
    for (const auto& c : certs) {
        double h = c.tower.height.get_d();
        if (h < q_lo || h > q_hi) continue;
        if (!found || c.area > out.base_cert.area ||
            (c.area == out.base_cert.area && c.ratio() < out.base_cert.ratio())) {
            out.base_cert = c;
            found = true;
        }
    }
    if (!found) throw NoDominantTower();

    long q = static_cast<long>(out.base_cert.tower.height.get_d());
    for (long k : k_list) {
        ResonanceCertificate rc;
        rc.q = q;
        rc.k = k;
        rc.epsilon = 1.0 / static_cast<double>(k);
        rc.r = k * q;
        rc.tower = out.base_cert;
        bool honest = out.base_cert.ratio() < rc.epsilon * rc.epsilon &&
                      out.base_cert.area > 1.0 - rc.epsilon;
        rc.flavor = honest ? CertificateFlavor::strict : CertificateFlavor::measured;
        // accumulated drift of the multiples on the base midpoint
        double z = 0.5 * (out.base_cert.tower.lo + out.base_cert.tower.hi);
        double x = z, worst = 0.0;
        for (long j = 0; j < k; ++j) {
            for (long s = 0; s < q; ++s) x = t.apply(x);
            worst = std::max(worst, std::fabs(x - z));
        }
        double width = out.base_cert.tower.hi - out.base_cert.tower.lo;
        rc.worst_multiple_ratio = width > 0 ? worst / width : kernels::kInf;
        rc.multiples_verified = rc.worst_multiple_ratio <= rc.epsilon;
        out.resonances.push_back(rc);
    }

    Rng rng(seed);
    double u = rng.uniform() * 0.5;
    out.set_a.rects = {{u, u + 0.5, 0.0, kernels::kInf}};
    out.set_b = out.set_a;
    std::vector<std::pair<RectSet, RectSet>> pairs(out.resonances.size(),
                                                   {out.set_a, out.set_b});
    out.scan = resonant_mixing_scan(t, f_mean1, out.resonances, pairs, samples, seed);

    long kmax = *std::max_element(k_list.begin(), k_list.end());
    double delta = 1.0 / std::log(std::max(3.0, static_cast<double>(kmax)));
    for (long k : k_list) {
        double time = static_cast<double>(k) * static_cast<double>(q);
        out.shearing.push_back(shearing_report(t, f_mean1, out.base_cert, k, time, delta,
                                               shearing_samples, seed ^ (k * 2654435761ull)));
    }
    return out;
}

namespace {

int run_induct(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    long steps = cfg.raw.value("steps", 40L);
    std::string mode = cfg.raw.value("mode", std::string("zorich"));
    if (mode != "zorich" && mode != "rauzy") throw ValidationError("mode", "zorich|rauzy");
    InductionMode m = mode == "zorich" ? InductionMode::zorich : InductionMode::rauzy;

    Json report;
    report["config"] = cfg.raw;
    bool exact = cfg.raw.contains("iet") && cfg.raw.at("iet").value("exact", false);
    if (exact) {
        RatIet t = rat_iet_from_json(cfg.raw.at("iet"));
        auto trace = induction_trace(t, steps, m, TiePolicy::truncate);
        report["trace"] = trace_to_json(trace);
        report["truncated"] = trace.truncated;
    } else {
        Iet t = iet_from_config(cfg.raw, rng);
        auto trace = induction_trace(t, steps, m, TiePolicy::truncate);
        report["trace"] = trace_to_json(trace);
        report["truncated"] = trace.truncated;
    }
    std::string file = cfg.raw.value("out", out_path(cfg, "report.json"));
    write_text_file(file, dump_canonical(report));
    if (file != out_path(cfg, "report.json"))
        write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_towers(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    Iet t = iet_from_config(cfg.raw, rng);
    double eps = cfg.raw.value("epsilon", 0.4);
    long depth = cfg.raw.value("depth", 128L);
    RauzyTrace trace = induction_trace(t, depth, InductionMode::rauzy, TiePolicy::truncate);
    Json report;
    report["config"] = cfg.raw;
    report["truncated"] = trace.truncated;
    Json strict = Json::array();
    for (const auto& c : detect_rigid_towers(trace, eps)) strict.push_back(certificate_to_json(c));
    report["strict"] = strict;
    Json all = Json::array();
    std::vector<std::string> rows;
    for (const auto& c : all_tower_certificates(trace)) {
        all.push_back(certificate_to_json(c));
        std::ostringstream os;
        os << c.source_step << "," << c.column << "," << c.tower.height.get_str() << ","
           << c.area << "," << c.displacement << "," << c.ratio();
        rows.push_back(os.str());
    }
    report["measured"] = all;
    write_csv(out_path(cfg, "towers.csv"), "step,column,height,area,displacement,ratio", rows);
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_resonance(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    Iet t = iet_from_config(cfg.raw, rng);
    double eps = cfg.raw.value("epsilon", 0.25);
    long kmax = cfg.raw.value("k_max", 4L);
    long depth = cfg.raw.value("depth", 64L);
    Json report;
    report["config"] = cfg.raw;
    Json arr = Json::array();
    for (const auto& rc : resonant_times(t, eps, kmax, depth)) arr.push_back(resonance_to_json(rc));
    report["resonances"] = arr;
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_tails(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    Iet t = iet_from_config(cfg.raw, rng);
    SymLogRoof f = roof_from_config(cfg.raw, t);
    std::size_t samples = cfg.raw.value("samples", 1024u);
    double budget = cfg.raw.value("height_budget", 1e7);
    std::vector<double> schedule =
        cfg.raw.value("epsilon_schedule", std::vector<double>{0.5, 0.4, 0.3});
    TailThresholds thr;
    thr.min_r_squared = cfg.raw.value("min_r_squared", 0.9);

    TailsPipeline pipe = run_tails_pipeline(t, f, samples, budget, schedule, cfg.seed, thr);
    Json report;
    report["config"] = cfg.raw;
    report["iet"] = iet_to_json(t);
    report["roof"] = roof_to_json(f);
    Json certs = Json::array();
    for (const auto& c : pipe.used_certs) certs.push_back(certificate_to_json(c));
    report["certificates"] = certs;
    Json tails = Json::array();
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < pipe.tails.size(); ++i) {
        Json e;
        e["set"] = sample_set_to_json(pipe.sets[i]);
        e["tail"] = tail_report_to_json(pipe.tails[i]);
        tails.push_back(e);
        for (std::size_t k = 0; k < pipe.sets[i].samples.size(); ++k) {
            std::ostringstream os;
            os << i << "," << k << "," << pipe.sets[i].samples[k];
            rows.push_back(os.str());
        }
    }
    report["tails"] = tails;
    if (pipe.tightness) report["tightness"] = tightness_to_json(*pipe.tightness);
    report["pass"] = !pipe.tails.empty() &&
                     std::all_of(pipe.tails.begin(), pipe.tails.end(),
                                 [](const TailReport& r) { return r.pass; }) &&
                     (!pipe.tightness || pipe.tightness->pass);
    write_csv(out_path(cfg, "samples.csv"), "cert_index,sample_index,value", rows);
    if (cfg.raw.value("svg", true) && !pipe.sets.empty()) {
        svg::write_histogram(out_path(cfg, "hist.svg"), pipe.sets.back().samples, 48,
                             "centered Birkhoff sums");
        std::vector<double> abs_vals;
        for (double v : pipe.sets.back().samples) abs_vals.push_back(std::fabs(v));
        svg::write_log_survival(out_path(cfg, "survival.svg"), abs_vals,
                                pipe.tails.back().c_hat, pipe.tails.back().b_hat,
                                "log survival");
    }
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return pipe.used_certs.empty() ? 3 : 0;
}

int run_mixing(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    Iet t = iet_from_config(cfg.raw, rng);
    SymLogRoof f = roof_from_config(cfg.raw, t).rescaled_to_mean(1.0);
    std::vector<long> ks = cfg.raw.value("k_list", std::vector<long>{1, 4, 8, 16});
    std::size_t samples = cfg.raw.value("samples", 10000u);
    double qlo = cfg.raw.value("q_lo", 200.0), qhi = cfg.raw.value("q_hi", 20000.0);
    MixingPipeline pipe = run_mixing_pipeline(t, f, ks, samples, qlo, qhi, cfg.seed);
    Json report;
    report["config"] = cfg.raw;
    report["base_certificate"] = certificate_to_json(pipe.base_cert);
    Json rows = Json::array();
    std::vector<std::string> csv;
    for (const auto& r : pipe.scan) {
        rows.push_back({{"k", r.k},
                        {"q", r.q},
                        {"r", r.r},
                        {"time_kind", r.time_kind},
                        {"time", r.time},
                        {"corr", r.corr},
                        {"std_error", r.std_error},
                        {"product", r.product},
                        {"distance", r.distance}});
        std::ostringstream os;
        os << r.k << "," << r.q << "," << r.time_kind << "," << r.time << "," << r.corr << ","
           << r.std_error << "," << r.product << "," << r.distance;
        csv.push_back(os.str());
    }
    report["scan"] = rows;
    Json sh = Json::array();
    for (const auto& s : pipe.shearing) sh.push_back(shearing_to_json(s));
    report["shearing"] = sh;
    write_csv(out_path(cfg, "scan.csv"), "k,q,time_kind,time,corr,std_error,product,distance",
              csv);
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_lyapunov(const ExperimentConfig& cfg) {
    std::vector<std::size_t> perm_images =
        cfg.raw.contains("perm") ? cfg.raw.at("perm").get<std::vector<std::size_t>>()
                                 : Permutation::symmetric(cfg.raw.value("d", 4u)).images();
    Permutation p(perm_images);
    std::size_t ensemble = cfg.raw.value("ensemble", 32u);
    long steps = cfg.raw.value("steps", 10000L);
    auto est = lyapunov_estimate(p, ensemble, steps, cfg.seed);
    Json report;
    report["config"] = cfg.raw;
    report["lambda1"] = est.lambda1;
    report["lambda2"] = est.lambda2;
    report["ratio"] = est.ratio;
    report["sample_steps"] = est.sample_steps;
    report["ensemble_size"] = est.ensemble_size;
    report["resampled_orbits"] = est.resampled_orbits;
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_rauzy_class(const ExperimentConfig& cfg) {
    std::vector<std::size_t> perm_images =
        cfg.raw.contains("perm") ? cfg.raw.at("perm").get<std::vector<std::size_t>>()
                                 : Permutation::symmetric(cfg.raw.value("d", 4u)).images();
    RauzyGraph g = rauzy_class_enumerate(Permutation(perm_images));
    Json report;
    report["config"] = cfg.raw;
    report["vertex_count"] = g.vertices.size();
    Json verts = Json::array();
    for (const auto& v : g.vertices) verts.push_back(v.images());
    report["vertices"] = verts;
    write_text_file(out_path(cfg, "graph.dot"), rauzy_graph_to_dot(g));
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

int run_roth(const ExperimentConfig& cfg) {
    Rng rng(cfg.seed);
    Iet t = iet_from_config(cfg.raw, rng);
    double eps = cfg.raw.value("epsilon", 0.3);
    long steps = cfg.raw.value("steps", 4000L);
    RauzyTrace trace = induction_trace(t, steps, InductionMode::rauzy, TiePolicy::truncate);
    RothReport rep = roth_distortion_report(trace, eps);
    Json report;
    report["config"] = cfg.raw;
    report["epsilon"] = rep.epsilon;
    report["running_max_height"] = rep.running_max_height;
    report["running_max_length"] = rep.running_max_length;
    Json rows = Json::array();
    std::vector<std::string> csv;
    for (const auto& r : rep.rows) {
        rows.push_back({{"step", r.step},
                        {"height_ratio", r.height_ratio},
                        {"length_ratio", r.length_ratio}});
        std::ostringstream os;
        os << r.step << "," << r.height_ratio << "," << r.length_ratio;
        csv.push_back(os.str());
    }
    report["rows"] = rows;
    write_csv(out_path(cfg, "roth.csv"), "step,height_ratio,length_ratio", csv);
    write_text_file(out_path(cfg, "report.json"), dump_canonical(report));
    return 0;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    if (cfg.threads) set_worker_count(cfg.threads);
    kernels::select(cfg.kernel);
    int code = 0;
    try {
        if (cfg.kind == "induct") code = run_induct(cfg);
        else if (cfg.kind == "towers") code = run_towers(cfg);
        else if (cfg.kind == "resonance") code = run_resonance(cfg);
        else if (cfg.kind == "tails") code = run_tails(cfg);
        else if (cfg.kind == "mixing") code = run_mixing(cfg);
        else if (cfg.kind == "lyapunov") code = run_lyapunov(cfg);
        else if (cfg.kind == "rauzy-class") code = run_rauzy_class(cfg);
        else if (cfg.kind == "roth") code = run_roth(cfg);
    } catch (const StepBudgetExceeded&) {
        code = 3;
    } catch (const ReturnTimeExceeded&) {
        code = 3;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_meta(cfg, secs, code);
    return code;
}

} // namespace ietlab
