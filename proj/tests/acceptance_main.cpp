// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. argv[1] must point at the gsfl CLI binary (used by the
// CLI determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gsfl/csv.hpp"
#include "gsfl/data.hpp"
#include "gsfl/errors.hpp"
#include "gsfl/latency.hpp"
#include "gsfl/nn.hpp"
#include "gsfl/oracle.hpp"
#include "gsfl/rng.hpp"
#include "gsfl/schemes.hpp"

namespace fs = std::filesystem;
using namespace gsfl;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::function<std::string()> body;  // returns "" on pass, else the failure reason
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_param_diff(const Params& a, const Params& b) {
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        for (std::size_t k = 0; k < a.layers[i].weight.data.size(); ++k) {
            max_diff = std::max(max_diff,
                                std::abs(a.layers[i].weight.data[k] - b.layers[i].weight.data[k]));
        }
        for (std::size_t k = 0; k < a.layers[i].bias.data.size(); ++k) {
            max_diff =
                std::max(max_diff, std::abs(a.layers[i].bias.data[k] - b.layers[i].bias.data[k]));
        }
    }
    return max_diff;
}

double trajectory_distance(const RunOutput& a, const RunOutput& b) {
    if (a.params_per_round.size() != b.params_per_round.size()) return 1e9;
    double max_diff = 0.0;
    for (std::size_t r = 0; r < a.params_per_round.size(); ++r) {
        max_diff = std::max(max_diff, max_param_diff(a.params_per_round[r], b.params_per_round[r]));
    }
    return max_diff;
}

std::string fail(const std::string& reason) { return reason; }

std::string criterion_split_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const SplitEquivReport report = split_equivalence(20260810, 20);
    const double elapsed = seconds_since(start);
    if (report.max_abs_diff >= 1e-12) {
        return fail("max parameter distance " + std::to_string(report.max_abs_diff));
    }
    if (elapsed >= 10.0) return fail("runtime " + std::to_string(elapsed) + " s exceeds 10 s");
    return "";
}

std::string criterion_gradcheck() {
    const auto start = std::chrono::steady_clock::now();
    const GradCheckReport report = gradcheck(20260810, 10);
    const double elapsed = seconds_since(start);
    if (report.max_rel_err >= 1e-5) {
        return fail("max relative error " + std::to_string(report.max_rel_err));
    }
    if (elapsed >= 10.0) return fail("runtime " + std::to_string(elapsed) + " s exceeds 10 s");
    return "";
}

std::string criterion_fedavg_algebra() {
    SeededRng rng(123);
    const ModelSpec spec = default_model(6, 3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Params> models;
        std::vector<double> weights;
        const std::size_t n = 2 + rng.below(5);
        for (std::size_t i = 0; i < n; ++i) {
            models.push_back(init_params(spec, rng.next_u64()));
            weights.push_back(rng.uniform(0.1, 10.0));
        }
        const Params avg = fedavg(models, weights);
        // Independent route: accumulate w_i * p_i in extended precision and
        // divide by the weight sum at the end.
        long double weight_sum = 0.0L;
        for (double w : weights) weight_sum += w;
        for (std::size_t layer = 0; layer < spec.layers.size(); ++layer) {
            for (std::size_t k = 0; k < avg.layers[layer].weight.data.size(); ++k) {
                long double acc = 0.0L;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += static_cast<long double>(weights[i]) *
                           static_cast<long double>(models[i].layers[layer].weight.data[k]);
                }
                const double expected = static_cast<double>(acc / weight_sum);
                if (std::abs(avg.layers[layer].weight.data[k] - expected) > 1e-12) {
                    return fail("weighted mean off by more than 1e-12");
                }
            }
        }
        // Idempotence (to the same 1e-12 bound) and degenerate weights.
        const Params& p = models[0];
        if (max_param_diff(fedavg({p, p, p}, {1, 2, 3}), p) > 1e-12) {
            return fail("idempotence violated beyond 1e-12");
        }
        if (!(fedavg({p}, {2.0}) == p)) return fail("single-model aggregation is not the identity");
        if (!(fedavg({models[0], models[1]}, {2, 0}) == models[0])) {
            return fail("degenerate weight did not select the first model");
        }
    }
    return "";
}

ExperimentConfig degeneracy_config(Scheme scheme, std::size_t n_clients, std::size_t n_groups) {
    ExperimentConfig cfg;
    cfg.scheme = scheme;
    cfg.rounds = 3;
    cfg.n_clients = n_clients;
    cfg.n_groups = n_groups;
    cfg.batch_size = 5;
    cfg.lr = 0.05;
    cfg.seed = 20260810;
    cfg.dataset.synthetic = {3, 4, 150, 60};
    return cfg;
}

std::string criterion_degeneracy() {
    const double gsfl_vs_sl = trajectory_distance(run_gsfl(degeneracy_config(Scheme::kGsfl, 4, 1)),
                                                  run_sl_vanilla(degeneracy_config(Scheme::kSplit, 4, 1)));
    if (gsfl_vs_sl > 1e-12) {
        return fail("gsfl(M=1) vs sl distance " + std::to_string(gsfl_vs_sl));
    }
    const RunOutput cl = run_centralized(degeneracy_config(Scheme::kCentralized, 1, 1));
    const double fl_vs_cl =
        trajectory_distance(run_fl(degeneracy_config(Scheme::kFederated, 1, 1)), cl);
    if (fl_vs_cl > 1e-12) return fail("fl(N=1) vs cl distance " + std::to_string(fl_vs_cl));
    const double sl_vs_cl =
        trajectory_distance(run_sl_vanilla(degeneracy_config(Scheme::kSplit, 1, 1)), cl);
    if (sl_vs_cl > 1e-12) return fail("sl(N=1) vs cl distance " + std::to_string(sl_vs_cl));
    return "";
}

std::string criterion_latency_direction() {
    const SplitModel split = split_model(default_model(16, 4), 2);
    const Topology topo = uniform_topology(30, 6);

    // Default parameters, balanced steps (the default experiment yields 6
    // steps for every client).
    const LatencyParams lp;
    const std::vector<std::int64_t> steps(30, 6);
    const double sl = round_latency(Scheme::kSplit, topo, split, lp, steps, 10).total_s;
    const double gsfl = round_latency(Scheme::kGsfl, topo, split, lp, steps, 10).total_s;
    if (!(gsfl < sl)) return fail("gsfl round is not strictly below sl");

    // Closed-form prediction, hand-derived from the cost model.
    const double per_batch =
        21120.0 / 1e9 + 20800.0 / 5e6 + 131200.0 / 1e11 + 20480.0 / 2e7 + 41600.0 / 1e9;
    const double model_up = 34816.0 / 5e6;
    const double model_down = 34816.0 / 2e7;
    const double seg_full = 6 * per_batch + model_up + model_down;
    const double seg_last = 6 * per_batch + model_up;
    const double predicted_ratio =
        ((4 * seg_full + seg_last) + model_down + 0.01) / (model_down + 29 * seg_full + seg_last);
    const double ratio = gsfl / sl;
    if (std::abs(ratio - predicted_ratio) > 0.1 * predicted_ratio) {
        return fail("ratio " + std::to_string(ratio) + " not within 10% of predicted " +
                    std::to_string(predicted_ratio));
    }

    // Zero aggregation overhead, perfectly balanced groups, dyadic rates:
    // the segment-sum ratio must equal 1/M exactly.
    LatencyParams dyadic;
    dyadic.uplink_bps = 4194304.0;        // 2^22
    dyadic.downlink_bps = 16777216.0;     // 2^24
    dyadic.client_flops = 1073741824.0;   // 2^30
    dyadic.server_flops = 68719476736.0;  // 2^36
    dyadic.bits_per_value = 32;
    dyadic.aggregation_s = 0.0;
    const std::vector<std::int64_t> balanced(30, 8);
    const double sl_exact = round_latency(Scheme::kSplit, topo, split, dyadic, balanced, 8).total_s;
    const double gsfl_exact = round_latency(Scheme::kGsfl, topo, split, dyadic, balanced, 8).total_s;
    if (gsfl_exact / sl_exact != 1.0 / 6.0) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g vs %.17g", gsfl_exact / sl_exact, 1.0 / 6.0);
        return fail(std::string("segment-sum ratio is not exactly 1/M: ") + buf);
    }
    return "";
}

std::string criterion_accuracy_parity() {
    const auto start = std::chrono::steady_clock::now();

    ExperimentConfig gsfl_cfg;  // documented defaults: C=4 d=16 n=2000 N=30 M=6 R=40
    gsfl_cfg.scheme = Scheme::kGsfl;
    const RunOutput gsfl = run_gsfl(gsfl_cfg);
    std::int64_t gsfl_steps = 0;
    for (std::int64_t s : gsfl.steps_per_round) gsfl_steps += s;

    ExperimentConfig cl_cfg = gsfl_cfg;
    cl_cfg.scheme = Scheme::kCentralized;
    cl_cfg.rounds = 40;
    const RunOutput cl = run_centralized(cl_cfg);

    // Accuracy of cl at the first round whose cumulative step count reaches
    // the gsfl total (equal total gradient steps; 36 epochs with defaults).
    std::int64_t cl_steps = 0;
    double cl_acc_at_equal_steps = -1.0;
    for (std::size_t r = 0; r < cl.metrics.size(); ++r) {
        cl_steps += cl.steps_per_round[r];
        if (cl_steps >= gsfl_steps) {
            cl_acc_at_equal_steps = cl.metrics[r].test_accuracy;
            break;
        }
    }
    if (cl_acc_at_equal_steps < 0) return fail("cl never reached the gsfl step count");

    const double gsfl_final = gsfl.metrics.back().test_accuracy;
    const double elapsed = seconds_since(start);
    if (std::abs(gsfl_final - cl_acc_at_equal_steps) > 0.02) {
        return fail("gsfl " + std::to_string(gsfl_final) + " vs cl " +
                    std::to_string(cl_acc_at_equal_steps) + " differ by more than 2 points");
    }
    if (!(gsfl_final > 0.25 + 0.25)) {
        return fail("gsfl final accuracy " + std::to_string(gsfl_final) + " not above 0.50");
    }
    if (elapsed >= 120.0) return fail("runtime " + std::to_string(elapsed) + " s exceeds 2 min");
    return "";
}

std::string criterion_convergence_ordering(const fs::path& scratch) {
    // Default config, E=1; the combined CSV is the record the ordering is
    // read from.
    ExperimentConfig base;
    std::vector<RoundMetrics> combined;
    for (Scheme scheme :
         {Scheme::kCentralized, Scheme::kSplit, Scheme::kFederated, Scheme::kGsfl}) {
        ExperimentConfig cfg = base;
        cfg.scheme = scheme;
        const RunOutput out = run_scheme(cfg);
        combined.insert(combined.end(), out.metrics.begin(), out.metrics.end());
    }
    const fs::path csv_path = scratch / "acceptance_compare.csv";
    emit_csv(combined, csv_path.string());

    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);  // header
    double cl_final = -1.0;
    std::vector<std::pair<std::size_t, double>> gsfl_rows, fl_rows;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6) return fail("malformed compare CSV row");
        const std::size_t round = std::stoul(fields[0]);
        const double acc = std::stod(fields[3]);
        if (fields[1] == "cl") cl_final = acc;
        if (fields[1] == "gsfl") gsfl_rows.emplace_back(round, acc);
        if (fields[1] == "fl") fl_rows.emplace_back(round, acc);
    }
    if (cl_final < 0 || gsfl_rows.empty() || fl_rows.empty()) {
        return fail("compare CSV is missing schemes");
    }
    const double threshold = 0.9 * cl_final;
    auto rounds_to = [&](const std::vector<std::pair<std::size_t, double>>& rows) -> std::size_t {
        for (const auto& [round, acc] : rows) {
            if (acc >= threshold) return round;
        }
        return rows.size() + 1;  // never reached: slower than any reached round
    };
    const std::size_t gsfl_rounds = rounds_to(gsfl_rows);
    const std::size_t fl_rounds = rounds_to(fl_rows);
    if (!(gsfl_rounds <= fl_rounds)) {
        return fail("gsfl needed " + std::to_string(gsfl_rounds) + " rounds, fl " +
                    std::to_string(fl_rounds));
    }
    return "";
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string criterion_cli_determinism(const std::string& cli, const fs::path& scratch) {
    const fs::path cfg_path = scratch / "determinism.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"rounds":10,"seed":7})";
    }
    const fs::path csv_a = scratch / "determinism_a.csv";
    const fs::path csv_b = scratch / "determinism_b.csv";
    for (const fs::path& out : {csv_a, csv_b}) {
        const std::string cmd = "\"" + cli + "\" compare --config \"" + cfg_path.string() +
                                "\" --out \"" + out.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return fail("CLI compare run failed");
    }
    const std::string bytes_a = read_bytes(csv_a);
    const std::string bytes_b = read_bytes(csv_b);
    if (bytes_a.empty()) return fail("compare CSV came out empty");
    if (bytes_a != bytes_b) return fail("compare CSVs differ between identical runs");
    return "";
}

void push_be_u32(std::vector<unsigned char>& out, std::uint32_t value) {
    out.push_back(static_cast<unsigned char>(value >> 24));
    out.push_back(static_cast<unsigned char>(value >> 16));
    out.push_back(static_cast<unsigned char>(value >> 8));
    out.push_back(static_cast<unsigned char>(value));
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::string criterion_idx_parser(const fs::path& scratch) {
    const std::vector<unsigned char> pixels = {0,  128, 255, 64,  10, 20,
                                               30, 40,  250, 251, 252, 253};
    auto images = [&](std::uint32_t magic, const std::vector<unsigned char>& px) {
        std::vector<unsigned char> bytes;
        push_be_u32(bytes, magic);
        push_be_u32(bytes, 3);
        push_be_u32(bytes, 2);
        push_be_u32(bytes, 2);
        bytes.insert(bytes.end(), px.begin(), px.end());
        return bytes;
    };
    auto labels = [&](std::uint32_t magic, std::uint32_t n, const std::vector<unsigned char>& ls) {
        std::vector<unsigned char> bytes;
        push_be_u32(bytes, magic);
        push_be_u32(bytes, n);
        bytes.insert(bytes.end(), ls.begin(), ls.end());
        return bytes;
    };

    const fs::path img = scratch / "golden_images.idx";
    const fs::path lab = scratch / "golden_labels.idx";
    write_bytes(img, images(0x00000803u, pixels));
    write_bytes(lab, labels(0x00000801u, 3, {2, 0, 1}));
    const Dataset data = load_idx(img.string(), lab.string());
    if (data.size() != 3 || data.dim() != 4) return fail("golden fixture shape wrong");
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (data.features.data[i] != static_cast<double>(pixels[i]) / 255.0) {
            return fail("pixel scaling not bit-exact at index " + std::to_string(i));
        }
    }
    if (data.labels != std::vector<std::size_t>{2, 0, 1}) return fail("labels wrong");

    bool ok = false;
    write_bytes(img, images(0x00000804u, pixels));
    try {
        load_idx(img.string(), lab.string());
    } catch (const IdxBadMagic&) {
        ok = true;
    } catch (...) {
    }
    if (!ok) return fail("bad magic did not raise IdxBadMagic");

    ok = false;
    write_bytes(img, images(0x00000803u, {0, 1, 2}));  // 3 images need 12 bytes
    try {
        load_idx(img.string(), lab.string());
    } catch (const IdxTruncated&) {
        ok = true;
    } catch (...) {
    }
    if (!ok) return fail("truncated file did not raise IdxTruncated");

    ok = false;
    write_bytes(img, images(0x00000803u, pixels));
    write_bytes(lab, labels(0x00000801u, 2, {0, 1}));
    try {
        load_idx(img.string(), lab.string());
    } catch (const IdxCountMismatch&) {
        ok = true;
    } catch (...) {
    }
    if (!ok) return fail("count mismatch did not raise IdxCountMismatch");
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-gsfl-cli>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = fs::temp_directory_path() / "gsfl_acceptance";
    fs::create_directories(scratch);

    const std::vector<Criterion> criteria = {
        {1, "split-equivalence oracle (20 random configs, < 1e-12, < 10 s)",
         criterion_split_equivalence},
        {2, "gradient check (10 random models, < 1e-5, < 10 s)", criterion_gradcheck},
        {3, "fedavg algebra (exactness 1e-12, idempotence, degenerate weights)",
         criterion_fedavg_algebra},
        {4, "degeneracy suite (gsfl M=1 == sl, fl/sl N=1 == cl, <= 1e-12)", criterion_degeneracy},
        {5, "latency direction (gsfl < sl, ratio within 10% of closed form, exact 1/M)",
         criterion_latency_direction},
        {6, "accuracy parity (gsfl within 2 points of cl at equal steps, > 0.50, < 2 min)",
         criterion_accuracy_parity},
        {7, "convergence-speed ordering (gsfl <= fl rounds to 90% of cl final)",
         [&] { return criterion_convergence_ordering(scratch); }},
        {8, "determinism (compare twice, bytewise-identical CSVs)",
         [&] { return criterion_cli_determinism(cli, scratch); }},
        {9, "idx parser (golden round-trip, three distinct malformed errors)",
         [&] { return criterion_idx_parser(scratch); }},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string reason;
        try {
            reason = criterion.body();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        if (reason.empty()) {
            std::printf("criterion %d PASS: %s\n", criterion.id, criterion.name.c_str());
        } else {
            std::printf("criterion %d FAIL: %s — %s\n", criterion.id, criterion.name.c_str(),
                        reason.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
