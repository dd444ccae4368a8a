#include "gsfl/config.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gsfl/errors.hpp"

namespace gsfl {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& scope) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError(scope + ": unknown key \"" + item.key() + "\"");
    }
}

std::size_t read_size(const json& obj, const char* key, std::size_t fallback, std::size_t min) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(std::string(key) + ": must be a non-negative integer");
    }
    const std::size_t value = v.get<std::size_t>();
    if (value < min) {
        throw ConfigError(std::string(key) + ": must be >= " + std::to_string(min) + " (got " +
                          std::to_string(value) + ")");
    }
    return value;
}

double read_positive(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(key) + ": must be a number");
    const double value = v.get<double>();
    if (!(value > 0)) throw ConfigError(std::string(key) + ": must be > 0");
    return value;
}

std::string read_string(const json& obj, const char* key, const std::string& scope) {
    if (!obj.contains(key)) throw ConfigError(scope + "." + key + ": required");
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(scope + "." + key + ": must be a string");
    return v.get<std::string>();
}

std::uint64_t env_seed_or_default() {
    if (const char* env = std::getenv("GSFL_SEED")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw ConfigError("GSFL_SEED: not a valid unsigned integer");
        }
        return static_cast<std::uint64_t>(value);
    }
    return 42;
}

ExperimentConfig from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top-level document must be a JSON object");
    reject_unknown(doc,
                   {"scheme", "rounds", "n_clients", "n_groups", "cut", "batch_size", "lr",
                    "local_epochs", "seed", "dataset", "partition", "latency"},
                   "config");

    ExperimentConfig cfg;
    if (doc.contains("scheme")) {
        if (!doc.at("scheme").is_string()) throw ConfigError("scheme: must be a string");
        cfg.scheme = scheme_from_name(doc.at("scheme").get<std::string>());
    }
    cfg.rounds = read_size(doc, "rounds", cfg.rounds, 1);
    cfg.n_clients = read_size(doc, "n_clients", cfg.n_clients, 1);
    cfg.n_groups = read_size(doc, "n_groups", cfg.n_groups, 1);
    if (cfg.n_groups > cfg.n_clients) {
        throw ConfigError("n_groups " + std::to_string(cfg.n_groups) + " exceeds n_clients " +
                          std::to_string(cfg.n_clients));
    }
    cfg.batch_size = read_size(doc, "batch_size", cfg.batch_size, 1);
    cfg.lr = read_positive(doc, "lr", cfg.lr);
    cfg.local_epochs = read_size(doc, "local_epochs", cfg.local_epochs, 1);

    if (doc.contains("seed")) {
        const json& v = doc.at("seed");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw ConfigError("seed: must be a non-negative integer");
        }
        cfg.seed = v.get<std::uint64_t>();
    } else {
        cfg.seed = env_seed_or_default();
    }

    if (doc.contains("dataset")) {
        const json& ds = doc.at("dataset");
        if (!ds.is_object()) throw ConfigError("dataset: must be an object");
        reject_unknown(ds, {"type", "params"}, "dataset");
        std::string type = "synthetic";
        if (ds.contains("type")) {
            if (!ds.at("type").is_string()) throw ConfigError("dataset.type: must be a string");
            type = ds.at("type").get<std::string>();
        }
        if (type == "synthetic") {
            cfg.dataset.type = DatasetConfig::Type::kSynthetic;
            if (ds.contains("params")) {
                const json& p = ds.at("params");
                if (!p.is_object()) throw ConfigError("dataset.params: must be an object");
                reject_unknown(p, {"classes", "dim", "n_train", "n_test"}, "dataset.params");
                cfg.dataset.synthetic.classes = read_size(p, "classes", 4, 2);
                cfg.dataset.synthetic.dim = read_size(p, "dim", 16, 2);
                cfg.dataset.synthetic.n_train = read_size(p, "n_train", 2000, 1);
                cfg.dataset.synthetic.n_test = read_size(p, "n_test", 2000, 1);
            }
        } else if (type == "idx") {
            cfg.dataset.type = DatasetConfig::Type::kIdx;
            if (!ds.contains("params")) throw ConfigError("dataset.params: required for idx");
            const json& p = ds.at("params");
            if (!p.is_object()) throw ConfigError("dataset.params: must be an object");
            reject_unknown(p, {"train_images", "train_labels", "test_images", "test_labels"},
                           "dataset.params");
            cfg.dataset.idx.train_images = read_string(p, "train_images", "dataset.params");
            cfg.dataset.idx.train_labels = read_string(p, "train_labels", "dataset.params");
            cfg.dataset.idx.test_images = read_string(p, "test_images", "dataset.params");
            cfg.dataset.idx.test_labels = read_string(p, "test_labels", "dataset.params");
        } else {
            throw ConfigError("dataset.type: unknown value \"" + type +
                              "\" (expected synthetic or idx)");
        }
    }

    if (doc.contains("partition")) {
        const json& part = doc.at("partition");
        if (!part.is_object()) throw ConfigError("partition: must be an object");
        reject_unknown(part, {"mode", "k"}, "partition");
        std::string mode = "iid";
        if (part.contains("mode")) {
            if (!part.at("mode").is_string()) throw ConfigError("partition.mode: must be a string");
            mode = part.at("mode").get<std::string>();
        }
        if (mode == "iid") {
            cfg.partition.mode = PartitionMode::kIid;
        } else if (mode == "label-skew" || mode == "label_skew") {
            cfg.partition.mode = PartitionMode::kLabelSkew;
        } else {
            throw ConfigError("partition.mode: unknown value \"" + mode +
                              "\" (expected iid or label-skew)");
        }
        cfg.partition.skew_classes = read_size(part, "k", 1, 1);
    }

    if (doc.contains("latency")) {
        const json& lat = doc.at("latency");
        if (!lat.is_object()) throw ConfigError("latency: must be an object");
        reject_unknown(lat,
                       {"uplink_bps", "downlink_bps", "client_flops", "server_flops",
                        "bits_per_value", "aggregation_s"},
                       "latency");
        cfg.latency.uplink_bps = read_positive(lat, "uplink_bps", cfg.latency.uplink_bps);
        cfg.latency.downlink_bps = read_positive(lat, "downlink_bps", cfg.latency.downlink_bps);
        cfg.latency.client_flops = read_positive(lat, "client_flops", cfg.latency.client_flops);
        cfg.latency.server_flops = read_positive(lat, "server_flops", cfg.latency.server_flops);
        cfg.latency.bits_per_value = static_cast<std::int64_t>(
            read_size(lat, "bits_per_value", static_cast<std::size_t>(cfg.latency.bits_per_value), 1));
        if (lat.contains("aggregation_s")) {
            const json& v = lat.at("aggregation_s");
            if (!v.is_number()) throw ConfigError("aggregation_s: must be a number");
            cfg.latency.aggregation_s = v.get<double>();
            if (cfg.latency.aggregation_s < 0) {
                throw ConfigError("aggregation_s: must be >= 0");
            }
        }
    }

    // The default model has 5 layers, so the cut must fall in [1, 4].
    cfg.cut = read_size(doc, "cut", cfg.cut, 0);
    if (cfg.cut < 1 || cfg.cut > 4) {
        throw ConfigError("cut: " + std::to_string(cfg.cut) + " outside valid range [1, 4]");
    }

    validate_config(cfg);
    return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) { return from_json(parse_json(text)); }

ExperimentConfig parse_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

std::string config_hash(const std::string& config_text) {
    const std::string canonical = parse_json(config_text).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char byte : canonical) {
        h ^= byte;
        h *= 1099511628211ULL;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

RunManifest make_manifest(const std::string& config_path, const std::string& config_text,
                          const ExperimentConfig& cfg, const std::string& output_csv) {
    RunManifest manifest;
    manifest.config_hash = config_hash(config_text);
    manifest.seed = cfg.seed;
    manifest.scheme = scheme_name(cfg.scheme);
    manifest.config_path = config_path;
    manifest.output_csv = output_csv;
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    manifest.started_at = buf;
    return manifest;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    json doc;
    doc["config_hash"] = manifest.config_hash;
    doc["seed"] = manifest.seed;
    doc["scheme"] = manifest.scheme;
    doc["started_at"] = manifest.started_at;
    doc["config_path"] = manifest.config_path;
    doc["output_csv"] = manifest.output_csv;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest to " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace gsfl
