#include "gsfl/schemes.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "gsfl/errors.hpp"
#include "gsfl/nn.hpp"
#include "gsfl/rng.hpp"

namespace gsfl {

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.rounds < 1) throw ConfigError("rounds: must be >= 1");
    if (cfg.local_epochs < 1) throw ConfigError("local_epochs: must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size: must be >= 1");
    // Config files require lr > 0 (enforced at parse time); a zero rate stays
    // runnable so frozen-parameter runs remain expressible.
    if (!(cfg.lr >= 0)) throw ConfigError("lr: must be >= 0");
    if (cfg.n_clients < 1) throw ConfigError("n_clients: must be >= 1");
    if (cfg.n_groups < 1) throw ConfigError("n_groups: must be >= 1");
    if (cfg.n_groups > cfg.n_clients) {
        throw ConfigError("n_groups " + std::to_string(cfg.n_groups) + " exceeds n_clients " +
                          std::to_string(cfg.n_clients));
    }
    validate_latency_params(cfg.latency);
    if (cfg.dataset.type == DatasetConfig::Type::kSynthetic) {
        const SyntheticConfig& s = cfg.dataset.synthetic;
        if (s.classes < 2) throw ConfigError("dataset.params.classes: must be >= 2");
        if (s.dim < 2) throw ConfigError("dataset.params.dim: must be >= 2");
        if (s.n_train < 1) throw ConfigError("dataset.params.n_train: must be >= 1");
        if (s.n_test < 1) throw ConfigError("dataset.params.n_test: must be >= 1");
    }
    if (cfg.partition.mode == PartitionMode::kLabelSkew && cfg.partition.skew_classes < 1) {
        throw ConfigError("partition.k: must be >= 1");
    }
}

Experiment realize(const ExperimentConfig& cfg) {
    validate_config(cfg);

    Experiment ex;
    ex.config = cfg;
    if (cfg.dataset.type == DatasetConfig::Type::kSynthetic) {
        const SyntheticConfig& s = cfg.dataset.synthetic;
        auto [train, test] =
            gen_synthetic(s.classes, s.dim, s.n_train, s.n_test, derive_seed(cfg.seed, kDatasetStream));
        ex.train = std::move(train);
        ex.test = std::move(test);
    } else {
        ex.train = load_idx(cfg.dataset.idx.train_images, cfg.dataset.idx.train_labels);
        ex.test = load_idx(cfg.dataset.idx.test_images, cfg.dataset.idx.test_labels);
        ex.test.tag = SplitTag::kTest;
        if (ex.test.dim() != ex.train.dim()) {
            throw DataError("idx: test image size does not match train image size");
        }
        // The model head is sized by the training labels.
        for (std::size_t label : ex.test.labels) {
            if (label >= ex.train.num_classes) {
                throw DataError("idx: test label " + std::to_string(label) +
                                " exceeds training classes");
            }
        }
        ex.test.num_classes = ex.train.num_classes;
    }

    if (ex.train.size() < cfg.n_clients * cfg.batch_size) {
        throw ConfigError("n_train " + std::to_string(ex.train.size()) +
                          " cannot give every client a full batch (n_clients * batch_size = " +
                          std::to_string(cfg.n_clients * cfg.batch_size) + ")");
    }

    ex.model = default_model(ex.train.dim(), ex.train.num_classes);
    const std::size_t n_layers = ex.model.layers.size();
    if (cfg.cut < 1 || cfg.cut > n_layers - 1) {
        throw ConfigError("cut: " + std::to_string(cfg.cut) + " outside valid range [1, " +
                          std::to_string(n_layers - 1) + "]");
    }
    ex.split = split_model(ex.model, cfg.cut);
    ex.topo = uniform_topology(cfg.n_clients, cfg.n_groups);
    ex.shards = partition(ex.train, ex.topo, cfg.partition.mode, cfg.partition.skew_classes,
                          derive_seed(cfg.seed, kPartitionStream));
    for (std::size_t c = 0; c < ex.shards.shards.size(); ++c) {
        if (ex.shards.shards[c].size() < cfg.batch_size) {
            throw ConfigError("client " + std::to_string(c) + " shard of " +
                              std::to_string(ex.shards.shards[c].size()) +
                              " samples cannot fill a batch of " + std::to_string(cfg.batch_size));
        }
    }
    ex.init = init_params(ex.model, derive_seed(cfg.seed, kInitStream));
    return ex;
}

Params fedavg(const std::vector<Params>& models, const std::vector<double>& weights) {
    if (models.empty()) throw AggregationError("fedavg: no models");
    if (models.size() != weights.size()) {
        throw AggregationError("fedavg: " + std::to_string(models.size()) + " models vs " +
                               std::to_string(weights.size()) + " weights");
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        if (w < 0) throw AggregationError("fedavg: negative weight");
        weight_sum += w;
    }
    if (!(weight_sum > 0)) throw AggregationError("fedavg: weights sum to zero");

    const Params& first = models[0];
    for (const Params& m : models) {
        if (m.layers.size() != first.layers.size()) {
            throw AggregationError("fedavg: models differ in layer count");
        }
        for (std::size_t i = 0; i < m.layers.size(); ++i) {
            if (m.layers[i].weight.shape != first.layers[i].weight.shape ||
                m.layers[i].bias.shape != first.layers[i].bias.shape) {
                throw AggregationError("fedavg: shape mismatch at layer " + std::to_string(i));
            }
        }
    }

    Params out;
    out.layers.resize(first.layers.size());
    for (std::size_t i = 0; i < first.layers.size(); ++i) {
        out.layers[i].weight = Tensor::zeros(first.layers[i].weight.shape);
        out.layers[i].bias = Tensor::zeros(first.layers[i].bias.shape);
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
        const double w = weights[m] / weight_sum;
        for (std::size_t i = 0; i < first.layers.size(); ++i) {
            const LayerParams& src = models[m].layers[i];
            LayerParams& dst = out.layers[i];
            for (std::size_t k = 0; k < src.weight.data.size(); ++k) {
                dst.weight.data[k] += w * src.weight.data[k];
            }
            for (std::size_t k = 0; k < src.bias.data.size(); ++k) {
                dst.bias.data[k] += w * src.bias.data[k];
            }
        }
    }
    return out;
}

double evaluate(const ModelSpec& spec, const Params& params, const Dataset& test) {
    const ForwardResult fwd = forward(spec, params, test.features);
    const std::size_t classes = fwd.output.cols();
    std::size_t correct = 0;
    for (std::size_t b = 0; b < fwd.output.rows(); ++b) {
        const double* row = &fwd.output.data[b * classes];
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (row[c] > row[best]) best = c;
        }
        if (best == test.labels[b]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(fwd.output.rows());
}

LocalTrainResult train_full_model(const ModelSpec& spec, const Params& start,
                                  const Dataset& train, const std::vector<std::size_t>& shard,
                                  std::size_t batch_size, double lr, std::size_t epochs,
                                  std::uint64_t global_seed, std::size_t round,
                                  std::size_t client) {
    LocalTrainResult result;
    result.params = start;
    for (std::size_t e = 0; e < epochs; ++e) {
        const auto plan = batches(shard, batch_size, epoch_seed(global_seed, round, client, e));
        for (const auto& batch : plan) {
            auto [x, y] = gather(train, batch);
            ForwardResult fwd = forward(spec, result.params, x);
            LossResult loss = loss_softmax_ce(fwd.output, y);
            BackwardResult bwd = backward(spec, result.params, fwd.cache, loss.grad_logits);
            result.params = sgd_step(result.params, bwd.grads, lr);
            result.loss_sum += loss.loss;
            ++result.steps;
        }
    }
    return result;
}

namespace {

struct ChainResult {
    Params client_params;
    Params server_params;
    double loss_sum = 0.0;
    std::int64_t steps = 0;
};

// Relay split training over an ordered client list: each client runs
// local_epochs epochs of split steps against the shared server-side params,
// then hands its client-side params to the next client.
ChainResult run_chain(const Experiment& ex, const std::vector<std::size_t>& order,
                      Params client_params, Params server_params, std::size_t round) {
    const ExperimentConfig& cfg = ex.config;
    ChainResult chain;
    std::int64_t next_batch_id = 0;
    for (std::size_t client : order) {
        for (std::size_t e = 0; e < cfg.local_epochs; ++e) {
            const auto plan = batches(ex.shards.shards[client], cfg.batch_size,
                                      epoch_seed(cfg.seed, round, client, e));
            for (const auto& batch : plan) {
                auto [x, y] = gather(ex.train, batch);
                const std::int64_t batch_id = next_batch_id++;
                ClientForwardResult fwd =
                    client_forward(ex.split.client_spec, client_params, x, y, batch_id);
                ServerStepResult server =
                    server_train_step(ex.split.server_spec, server_params, fwd.smashed, cfg.lr);
                server_params = std::move(server.params);
                client_params = client_backward_step(ex.split.client_spec, client_params,
                                                     fwd.cache, batch_id, server.grad, cfg.lr);
                chain.loss_sum += server.grad.loss_value;
                ++chain.steps;
            }
        }
    }
    chain.client_params = std::move(client_params);
    chain.server_params = std::move(server_params);
    return chain;
}

std::vector<std::int64_t> planned_steps(const Experiment& ex) {
    const ExperimentConfig& cfg = ex.config;
    std::vector<std::int64_t> steps(cfg.n_clients);
    for (std::size_t c = 0; c < cfg.n_clients; ++c) {
        steps[c] = static_cast<std::int64_t>(ex.shards.shards[c].size() / cfg.batch_size) *
                   static_cast<std::int64_t>(cfg.local_epochs);
    }
    return steps;
}

void push_round(RunOutput& out, const Experiment& ex, std::size_t round, double loss_sum,
                std::int64_t steps, const Params& full_params, double latency_s) {
    RoundMetrics m;
    m.round = round + 1;
    m.scheme = ex.config.scheme;
    m.train_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
    m.test_accuracy = evaluate(ex.model, full_params, ex.test);
    m.round_latency_s = latency_s;
    m.cumulative_latency_s =
        (out.metrics.empty() ? 0.0 : out.metrics.back().cumulative_latency_s) + latency_s;
    out.metrics.push_back(m);
    out.steps_per_round.push_back(steps);
    out.params_per_round.push_back(full_params);
}

}  // namespace

RunOutput run_gsfl(const ExperimentConfig& cfg) {
    if (cfg.scheme != Scheme::kGsfl) throw ContractError("run_gsfl: config scheme is not gsfl");
    const Experiment ex = realize(cfg);
    const std::vector<std::int64_t> steps = planned_steps(ex);
    const RoundCost cost =
        round_latency(Scheme::kGsfl, ex.topo, ex.split, cfg.latency, steps, cfg.batch_size);

    std::vector<double> group_weights(cfg.n_groups, 0.0);
    for (std::size_t g = 0; g < cfg.n_groups; ++g) {
        for (std::size_t client : ex.topo.order[g]) {
            group_weights[g] += static_cast<double>(ex.shards.shards[client].size());
        }
    }

    RunOutput out;
    Params global = ex.init;
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        auto [client_init, server_init] = split_params(global, cfg.cut);
        std::vector<Params> client_models(cfg.n_groups);
        std::vector<Params> server_models(cfg.n_groups);
        double loss_sum = 0.0;
        std::int64_t round_steps = 0;
        // Groups are independent; they run sequentially here and aggregate in
        // ascending index, which keeps results identical to any parallel
        // execution of the group bodies.
        for (std::size_t g = 0; g < cfg.n_groups; ++g) {
            ChainResult chain = run_chain(ex, ex.topo.order[g], client_init, server_init, r);
            client_models[g] = std::move(chain.client_params);
            server_models[g] = std::move(chain.server_params);
            loss_sum += chain.loss_sum;
            round_steps += chain.steps;
        }
        Params client_agg = fedavg(client_models, group_weights);
        Params server_agg = fedavg(server_models, group_weights);
        global = stitch_model(ex.split, client_agg, server_agg).second;
        push_round(out, ex, r, loss_sum, round_steps, global, cost.total_s);
    }
    return out;
}

RunOutput run_sl_vanilla(const ExperimentConfig& cfg) {
    if (cfg.scheme != Scheme::kSplit) throw ContractError("run_sl_vanilla: config scheme is not sl");
    const Experiment ex = realize(cfg);
    const std::vector<std::int64_t> steps = planned_steps(ex);
    const RoundCost cost =
        round_latency(Scheme::kSplit, ex.topo, ex.split, cfg.latency, steps, cfg.batch_size);

    std::vector<std::size_t> order(cfg.n_clients);
    for (std::size_t c = 0; c < cfg.n_clients; ++c) order[c] = c;

    RunOutput out;
    auto [client_params, server_params] = split_params(ex.init, cfg.cut);
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        ChainResult chain =
            run_chain(ex, order, std::move(client_params), std::move(server_params), r);
        client_params = std::move(chain.client_params);
        server_params = std::move(chain.server_params);
        const Params full = stitch_model(ex.split, client_params, server_params).second;
        push_round(out, ex, r, chain.loss_sum, chain.steps, full, cost.total_s);
    }
    return out;
}

RunOutput run_fl(const ExperimentConfig& cfg) {
    if (cfg.scheme != Scheme::kFederated) throw ContractError("run_fl: config scheme is not fl");
    const Experiment ex = realize(cfg);
    const std::vector<std::int64_t> steps = planned_steps(ex);
    const RoundCost cost =
        round_latency(Scheme::kFederated, ex.topo, ex.split, cfg.latency, steps, cfg.batch_size);

    std::vector<double> client_weights(cfg.n_clients);
    for (std::size_t c = 0; c < cfg.n_clients; ++c) {
        client_weights[c] = static_cast<double>(ex.shards.shards[c].size());
    }

    RunOutput out;
    Params global = ex.init;
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        std::vector<Params> locals(cfg.n_clients);
        double loss_sum = 0.0;
        std::int64_t round_steps = 0;
        for (std::size_t c = 0; c < cfg.n_clients; ++c) {
            LocalTrainResult local =
                train_full_model(ex.model, global, ex.train, ex.shards.shards[c], cfg.batch_size,
                                 cfg.lr, cfg.local_epochs, cfg.seed, r, c);
            locals[c] = std::move(local.params);
            loss_sum += local.loss_sum;
            round_steps += local.steps;
        }
        global = fedavg(locals, client_weights);
        push_round(out, ex, r, loss_sum, round_steps, global, cost.total_s);
    }
    return out;
}

RunOutput run_centralized(const ExperimentConfig& cfg) {
    if (cfg.scheme != Scheme::kCentralized) {
        throw ContractError("run_centralized: config scheme is not cl");
    }
    const Experiment ex = realize(cfg);

    // The pooled training set is the single shard of a one-client topology,
    // built through the same partition path so single-client runs of the
    // other schemes see the identical batch schedule.
    const Topology pooled_topo = uniform_topology(1, 1);
    const ShardPlan pooled = partition(ex.train, pooled_topo, PartitionMode::kIid, 1,
                                       derive_seed(cfg.seed, kPartitionStream));
    const std::vector<std::size_t>& shard = pooled.shards[0];
    const std::vector<std::int64_t> steps = {
        static_cast<std::int64_t>(shard.size() / cfg.batch_size)};

    RunOutput out;
    Params global = ex.init;
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        std::int64_t upload_bits = 0;
        if (cfg.cl_include_data_upload && r == 0) {
            upload_bits = static_cast<std::int64_t>(ex.train.size()) *
                          static_cast<std::int64_t>(ex.train.dim() + 1) *
                          cfg.latency.bits_per_value;
        }
        const RoundCost cost = round_latency(Scheme::kCentralized, pooled_topo, ex.split,
                                             cfg.latency, steps, cfg.batch_size, upload_bits);
        // One round of centralized training is one epoch over the pool.
        LocalTrainResult epoch = train_full_model(ex.model, global, ex.train, shard,
                                                  cfg.batch_size, cfg.lr, 1, cfg.seed, r, 0);
        global = std::move(epoch.params);
        push_round(out, ex, r, epoch.loss_sum, epoch.steps, global, cost.total_s);
    }
    return out;
}

RunOutput run_scheme(const ExperimentConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::kCentralized: return run_centralized(cfg);
        case Scheme::kSplit: return run_sl_vanilla(cfg);
        case Scheme::kFederated: return run_fl(cfg);
        case Scheme::kGsfl: return run_gsfl(cfg);
    }
    throw ContractError("unknown scheme");
}

}  // namespace gsfl
