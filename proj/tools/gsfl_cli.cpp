// gsfl — deterministic simulator for group-based split federated learning
// and its baselines (centralized, vanilla split, federated).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsfl/config.hpp"
#include "gsfl/csv.hpp"
#include "gsfl/errors.hpp"
#include "gsfl/oracle.hpp"
#include "gsfl/schemes.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gsfl::ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunArgs {
    std::string config_path;
    std::string out_csv = "metrics.csv";
    std::optional<std::uint64_t> seed;
};

gsfl::ExperimentConfig load_config(const RunArgs& args, std::string& config_text) {
    config_text = read_file(args.config_path);
    gsfl::ExperimentConfig cfg = gsfl::parse_config_text(config_text);
    if (args.seed) cfg.seed = *args.seed;
    return cfg;
}

int cmd_run(const RunArgs& args) {
    std::string config_text;
    gsfl::ExperimentConfig cfg = load_config(args, config_text);
    const gsfl::RunOutput result = gsfl::run_scheme(cfg);
    gsfl::emit_csv(result.metrics, args.out_csv);
    const gsfl::RunManifest manifest =
        gsfl::make_manifest(args.config_path, config_text, cfg, args.out_csv);
    gsfl::write_manifest(manifest, args.out_csv + ".manifest.json");
    const gsfl::RoundMetrics& last = result.metrics.back();
    std::printf("%s: %zu rounds, final accuracy %.4f, simulated time %.6g s -> %s\n",
                gsfl::scheme_name(cfg.scheme).c_str(), result.metrics.size(), last.test_accuracy,
                last.cumulative_latency_s, args.out_csv.c_str());
    return kExitOk;
}

// First round (1-based) whose accuracy reaches the threshold, 0 if never.
std::size_t rounds_to_accuracy(const std::vector<gsfl::RoundMetrics>& metrics, double threshold) {
    for (const gsfl::RoundMetrics& m : metrics) {
        if (m.test_accuracy >= threshold) return m.round;
    }
    return 0;
}

int cmd_compare(const RunArgs& args) {
    std::string config_text;
    const gsfl::ExperimentConfig base = load_config(args, config_text);

    const gsfl::Scheme order[] = {gsfl::Scheme::kCentralized, gsfl::Scheme::kSplit,
                                  gsfl::Scheme::kFederated, gsfl::Scheme::kGsfl};
    std::vector<gsfl::RoundMetrics> combined;
    std::vector<gsfl::RunOutput> outputs;
    for (gsfl::Scheme scheme : order) {
        gsfl::ExperimentConfig cfg = base;
        cfg.scheme = scheme;
        outputs.push_back(gsfl::run_scheme(cfg));
        const auto& metrics = outputs.back().metrics;
        combined.insert(combined.end(), metrics.begin(), metrics.end());
    }
    gsfl::emit_csv(combined, args.out_csv);
    const gsfl::RunManifest manifest =
        gsfl::make_manifest(args.config_path, config_text, base, args.out_csv);
    gsfl::write_manifest(manifest, args.out_csv + ".manifest.json");

    const double cl_final = outputs[0].metrics.back().test_accuracy;
    const double threshold = 0.9 * cl_final;
    std::printf("cl final accuracy %.4f, 90%% threshold %.4f\n", cl_final, threshold);
    std::printf("rounds_to_90pct_cl_final");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const std::size_t rounds = rounds_to_accuracy(outputs[i].metrics, threshold);
        std::printf(" %s=%zu", gsfl::scheme_name(order[i]).c_str(), rounds);
    }
    std::printf("\n-> %s\n", args.out_csv.c_str());
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, int trials) {
    const gsfl::GradCheckReport report = gsfl::gradcheck(seed, trials);
    std::printf("gradcheck: max relative error %.3e over %d models (%ld parameters)\n",
                report.max_rel_err, report.models, report.params_checked);
    if (report.max_rel_err >= 1e-5) {
        std::fprintf(stderr, "gradcheck FAILED: expected < 1e-5\n");
        return kExitInvariant;
    }
    return kExitOk;
}

int cmd_split_equiv(std::uint64_t seed, int trials) {
    const gsfl::SplitEquivReport report = gsfl::split_equivalence(seed, trials);
    std::printf("split-equiv: max parameter distance %.3e over %d trials\n", report.max_abs_diff,
                report.trials);
    if (report.max_abs_diff >= 1e-12) {
        std::fprintf(stderr, "split-equiv FAILED: expected < 1e-12\n");
        return kExitInvariant;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic GSFL/SL/FL/CL training and latency simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run one scheme and emit a metrics CSV");
    run->add_option("--config", run_args.config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", run_args.out_csv, "Output CSV path");
    std::uint64_t run_seed = 0;
    CLI::Option* run_seed_opt = run->add_option("--seed", run_seed, "Override the config seed");

    RunArgs compare_args;
    compare_args.out_csv = "compare.csv";
    CLI::App* compare =
        app.add_subcommand("compare", "Run all four schemes on one config, combined CSV");
    compare->add_option("--config", compare_args.config_path, "Experiment config (JSON)")
        ->required();
    compare->add_option("--out", compare_args.out_csv, "Output CSV path");
    std::uint64_t compare_seed = 0;
    CLI::Option* compare_seed_opt =
        compare->add_option("--seed", compare_seed, "Override the config seed");

    std::uint64_t check_seed = 42;
    int check_trials = 12;
    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "Finite-difference check of the backward pass");
    gradcheck_cmd->add_option("--seed", check_seed, "RNG seed");
    gradcheck_cmd->add_option("--trials", check_trials, "Number of random models");

    std::uint64_t oracle_seed = 42;
    int oracle_trials = 20;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Independent verification routes");
    oracle_cmd->require_subcommand(1);
    CLI::App* split_equiv_cmd =
        oracle_cmd->add_subcommand("split-equiv", "Split-vs-unsplit training equivalence");
    split_equiv_cmd->add_option("--seed", oracle_seed, "RNG seed");
    split_equiv_cmd->add_option("--trials", oracle_trials, "Number of random configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n\n%s", e.what(), app.help().c_str());
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            if (run_seed_opt->count() > 0) run_args.seed = run_seed;
            return cmd_run(run_args);
        }
        if (compare->parsed()) {
            if (compare_seed_opt->count() > 0) compare_args.seed = compare_seed;
            return cmd_compare(compare_args);
        }
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(check_seed, check_trials);
        if (oracle_cmd->parsed() && split_equiv_cmd->parsed()) {
            return cmd_split_equiv(oracle_seed, oracle_trials);
        }
        std::fprintf(stderr, "%s", app.help().c_str());
        return kExitConfig;
    } catch (const gsfl::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const gsfl::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitConfig;
    } catch (const gsfl::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitConfig;
    } catch (const gsfl::Error& e) {
        std::fprintf(stderr, "internal invariant violation: %s\n", e.what());
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInvariant;
    }
}
