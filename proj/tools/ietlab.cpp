#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ietlab/experiments.hpp"

using namespace ietlab;

namespace {

std::vector<std::size_t> parse_perm(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoul(tok));
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string prefix;
    std::string out_file;
    std::string kernel;
    long seed = -1;
    unsigned threads = 0;
    std::string perm, lengths;
    bool no_normalize = false;
    long steps = -1;
    std::string mode;
    double epsilon = -1;
    long depth = -1;
    long k_max = -1;
    long samples = -1;
    long ensemble = -1;
    long d = -1;
};

void attach(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--config", fl.config_path, "JSON config file");
    cmd->add_option("--out-dir", fl.out_dir, "output directory");
    cmd->add_option("--prefix", fl.prefix, "report file prefix");
    cmd->add_option("--out", fl.out_file, "primary output file");
    cmd->add_option("--kernel", fl.kernel, "auto|scalar|avx2");
    cmd->add_option("--seed", fl.seed, "master seed");
    cmd->add_option("--threads", fl.threads, "worker pool size");
    cmd->add_option("--perm", fl.perm, "permutation images, e.g. 3,2,1");
    cmd->add_option("--lengths", fl.lengths, "interval lengths, e.g. 0.3,0.3,0.4");
    cmd->add_flag("--no-normalize", fl.no_normalize, "keep lengths unnormalized");
    cmd->add_option("--steps", fl.steps, "induction steps");
    cmd->add_option("--mode", fl.mode, "rauzy|zorich");
    cmd->add_option("--epsilon", fl.epsilon, "rigidity quality");
    cmd->add_option("--depth", fl.depth, "max induction depth");
    cmd->add_option("--k-max", fl.k_max, "largest resonance multiple");
    cmd->add_option("--samples", fl.samples, "Monte-Carlo samples");
    cmd->add_option("--ensemble", fl.ensemble, "ensemble size");
    cmd->add_option("--d", fl.d, "number of intervals for sampled instances");
}

// config file overrides defaults, flags override the config file
Json merge(const std::string& kind, const CommonFlags& fl) {
    Json j;
    if (!fl.config_path.empty()) {
        std::ifstream in(fl.config_path);
        if (!in) throw ValidationError("config", "cannot open " + fl.config_path);
        in >> j;
    }
    j["kind"] = kind;
    if (!fl.out_dir.empty()) j["out_dir"] = fl.out_dir;
    if (!fl.prefix.empty()) j["prefix"] = fl.prefix;
    if (!fl.out_file.empty()) j["out"] = fl.out_file;
    if (!fl.kernel.empty()) j["kernel"] = fl.kernel;
    if (fl.seed >= 0) j["seed"] = static_cast<std::uint64_t>(fl.seed);
    if (fl.threads) j["threads"] = fl.threads;
    if (!fl.perm.empty()) {
        j["iet"]["perm"] = parse_perm(fl.perm);
        if (kind == "lyapunov" || kind == "rauzy-class") j["perm"] = parse_perm(fl.perm);
    }
    if (!fl.lengths.empty()) j["iet"]["lengths"] = parse_doubles(fl.lengths);
    if (fl.no_normalize) j["iet"]["normalize"] = false;
    if (fl.steps >= 0) j["steps"] = fl.steps;
    if (!fl.mode.empty()) j["mode"] = fl.mode;
    if (fl.epsilon >= 0) j["epsilon"] = fl.epsilon;
    if (fl.depth >= 0) j["depth"] = fl.depth;
    if (fl.k_max >= 0) j["k_max"] = fl.k_max;
    if (fl.samples >= 0) j["samples"] = fl.samples;
    if (fl.ensemble >= 0) j["ensemble"] = fl.ensemble;
    if (fl.d >= 0) j["d"] = fl.d;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ietlab: interval exchange renormalization laboratory"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"induct",  "towers",      "resonance", "tails",
                                            "mixing",  "lyapunov",    "rauzy-class", "roth"};
    std::map<std::string, CommonFlags> flags;
    for (const auto& kind : kinds) {
        auto* cmd = app.add_subcommand(kind, "run the '" + kind + "' experiment");
        attach(cmd, flags[kind]);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& kind : kinds) {
        if (!app.get_subcommand(kind)->parsed()) continue;
        try {
            Json j = merge(kind, flags[kind]);
            ExperimentConfig cfg = parse_config(j);
            return run_experiment(cfg);
        } catch (const ValidationError& e) {
            std::cerr << "config error at " << e.path << ": " << e.what() << "\n";
            return 2;
        } catch (const Json::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}
