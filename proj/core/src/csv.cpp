#include "gsfl/csv.hpp"

#include <cstdio>
#include <fstream>

#include "gsfl/errors.hpp"

namespace gsfl {

namespace {

std::string real6(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

}  // namespace

std::string csv_string(const std::vector<RoundMetrics>& metrics) {
    if (metrics.empty()) throw ContractError("csv: no metrics to emit");
    std::string out = "round,scheme,train_loss,test_accuracy,round_latency_s,cumulative_latency_s\n";
    for (const RoundMetrics& m : metrics) {
        out += std::to_string(m.round);
        out += ',';
        out += scheme_name(m.scheme);
        out += ',';
        out += real6(m.train_loss);
        out += ',';
        out += real6(m.test_accuracy);
        out += ',';
        out += real6(m.round_latency_s);
        out += ',';
        out += real6(m.cumulative_latency_s);
        out += '\n';
    }
    return out;
}

void emit_csv(const std::vector<RoundMetrics>& metrics, const std::string& path) {
    const std::string text = csv_string(metrics);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write CSV to " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace gsfl
