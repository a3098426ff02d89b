#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ietlab/json_io.hpp"

namespace ietlab {

struct ExperimentConfig {
    std::string kind;
    Json raw;          // fully echoed into every report
    std::string out_dir = ".";
    std::string prefix;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string kernel = "auto";
};

ExperimentConfig parse_config(const Json& j);

// Runs one experiment; writes <prefix>report.json (+ CSV/SVG/DOT side files)
// and <prefix>meta.json with wall-clock data. Returns the process exit code:
// 0 success, 3 budget exhausted with partial results written.
int run_experiment(const ExperimentConfig& cfg);

// ---- reusable pipelines (also driven by the acceptance suite) ----

struct TailsPipeline {
    std::vector<CoexistenceRecord> coexistence;
    std::vector<RigidityCertificate> used_certs; // largest heights, best first
    std::vector<CenteredSampleSet> sets;
    std::vector<TailReport> tails;
    std::optional<TightnessReport> tightness;
};

TailsPipeline run_tails_pipeline(const Iet& t, const SymLogRoof& f, std::size_t samples_per_cert,
                                 double height_budget, const std::vector<double>& eps_schedule,
                                 std::uint64_t seed, const TailThresholds& thresholds = {},
                                 std::size_t max_certs = 3);

struct MixingPipeline {
    RigidityCertificate base_cert;
    std::vector<ResonanceCertificate> resonances;
    std::vector<MixingScanRow> scan;
    std::vector<ShearingReport> shearing; // one per k in the request order
    std::vector<long> k_list;
    RectSet set_a, set_b;
};

MixingPipeline run_mixing_pipeline(const Iet& t, const SymLogRoof& f_mean1,
                                   const std::vector<long>& k_list, std::size_t samples,
                                   double q_lo, double q_hi, std::uint64_t seed,
                                   std::size_t shearing_samples = 48);

// Uniformly sampled IET with the given permutation (Lebesgue on the simplex).
Iet sample_iet(const Permutation& p, Rng& rng);

} // namespace ietlab
