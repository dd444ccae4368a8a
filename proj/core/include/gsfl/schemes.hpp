#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsfl/data.hpp"
#include "gsfl/latency.hpp"
#include "gsfl/model.hpp"
#include "gsfl/split.hpp"
#include "gsfl/topology.hpp"

namespace gsfl {

struct SyntheticConfig {
    std::size_t classes = 4;
    std::size_t dim = 16;
    std::size_t n_train = 2000;
    std::size_t n_test = 2000;
};

struct IdxConfig {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
};

struct DatasetConfig {
    enum class Type { kSynthetic, kIdx } type = Type::kSynthetic;
    SyntheticConfig synthetic;
    IdxConfig idx;
};

struct PartitionConfig {
    PartitionMode mode = PartitionMode::kIid;
    std::size_t skew_classes = 1;  // label-skew only
};

struct ExperimentConfig {
    Scheme scheme = Scheme::kGsfl;
    std::size_t rounds = 40;
    std::size_t n_clients = 30;
    std::size_t n_groups = 6;
    std::size_t cut = 2;
    std::size_t batch_size = 10;
    double lr = 0.01;
    std::size_t local_epochs = 1;
    std::uint64_t seed = 42;
    DatasetConfig dataset;
    PartitionConfig partition;
    LatencyParams latency;
    // Not a config-file key: charges the pooled dataset upload to the first
    // centralized round when enabled.
    bool cl_include_data_upload = false;
};

void validate_config(const ExperimentConfig& cfg);

struct RoundMetrics {
    std::size_t round = 0;  // 1-based
    Scheme scheme = Scheme::kGsfl;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double round_latency_s = 0.0;
    double cumulative_latency_s = 0.0;
};

// Per-round metrics plus instrumentation the CSV does not carry.
struct RunOutput {
    std::vector<RoundMetrics> metrics;
    std::vector<std::int64_t> steps_per_round;  // gradient steps executed per round
    std::vector<Params> params_per_round;       // full (stitched) model after each round
};

// Everything a run needs, realized deterministically from the config.
struct Experiment {
    ExperimentConfig config;
    Dataset train;
    Dataset test;
    ModelSpec model;
    SplitModel split;
    Topology topo;
    ShardPlan shards;
    Params init;
};

Experiment realize(const ExperimentConfig& cfg);

// Elementwise weighted mean, weights normalized to sum 1; accumulation runs
// in ascending model index so results are reproducible bit-for-bit.
Params fedavg(const std::vector<Params>& models, const std::vector<double>& weights);

// Mean argmax accuracy on the test set; ties resolve to the lowest class.
double evaluate(const ModelSpec& spec, const Params& params, const Dataset& test);

// Full-model local SGD over one shard for `epochs` epochs, batch schedules
// seeded per (round, client, epoch). Shared by the fl runner and tests.
struct LocalTrainResult {
    Params params;
    double loss_sum = 0.0;
    std::int64_t steps = 0;
};
LocalTrainResult train_full_model(const ModelSpec& spec, const Params& start,
                                  const Dataset& train, const std::vector<std::size_t>& shard,
                                  std::size_t batch_size, double lr, std::size_t epochs,
                                  std::uint64_t global_seed, std::size_t round, std::size_t client);

RunOutput run_gsfl(const ExperimentConfig& cfg);
RunOutput run_sl_vanilla(const ExperimentConfig& cfg);
RunOutput run_fl(const ExperimentConfig& cfg);
RunOutput run_centralized(const ExperimentConfig& cfg);

// Dispatch on cfg.scheme.
RunOutput run_scheme(const ExperimentConfig& cfg);

}  // namespace gsfl
