#include "gsfl/latency.hpp"

#include <algorithm>
#include <string>

#include "gsfl/errors.hpp"

namespace gsfl {

void validate_latency_params(const LatencyParams& lp) {
    if (!(lp.uplink_bps > 0) || !(lp.downlink_bps > 0)) {
        throw ConfigError("latency: link rates must be strictly positive");
    }
    if (!(lp.client_flops > 0) || !(lp.server_flops > 0)) {
        throw ConfigError("latency: compute speeds must be strictly positive");
    }
    if (lp.bits_per_value <= 0) throw ConfigError("latency: bits_per_value must be positive");
    if (lp.aggregation_s < 0) throw ConfigError("latency: aggregation_s must be non-negative");
}

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::kCentralized: return "cl";
        case Scheme::kSplit: return "sl";
        case Scheme::kFederated: return "fl";
        case Scheme::kGsfl: return "gsfl";
    }
    throw ContractError("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "cl") return Scheme::kCentralized;
    if (name == "sl") return Scheme::kSplit;
    if (name == "fl") return Scheme::kFederated;
    if (name == "gsfl") return Scheme::kGsfl;
    throw ConfigError("scheme: unknown value \"" + name + "\" (expected cl, sl, fl, or gsfl)");
}

double comm_time(double bits, double rate) {
    if (!(rate > 0)) throw ConfigError("comm_time: rate must be strictly positive");
    if (bits < 0) throw ConfigError("comm_time: negative payload");
    return bits / rate;
}

std::int64_t flops(const ModelSpec& spec, std::size_t batch, Direction direction) {
    const std::vector<std::size_t> widths = layer_widths(spec);
    std::int64_t total = 0;
    const std::int64_t b = static_cast<std::int64_t>(batch);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        if (layer.kind == LayerKind::kDense) {
            const std::int64_t in = static_cast<std::int64_t>(layer.in_dim);
            const std::int64_t out = static_cast<std::int64_t>(layer.out_dim);
            total += (direction == Direction::kForward ? 2 : 4) * b * in * out;
        } else {
            total += b * static_cast<std::int64_t>(widths[i]);
        }
    }
    return total;
}

std::int64_t message_bits(MessageKind kind, const SplitModel& split, std::size_t batch,
                          std::int64_t bits_per_value) {
    const std::int64_t b = static_cast<std::int64_t>(batch);
    const std::int64_t cut_width = static_cast<std::int64_t>(split.cut_width());
    switch (kind) {
        case MessageKind::kSmashed:
            return b * cut_width * bits_per_value + b * bits_per_value;  // activations + labels
        case MessageKind::kGrad:
            return b * cut_width * bits_per_value;
        case MessageKind::kClientModel:
            return static_cast<std::int64_t>(param_count(split.client_spec)) * bits_per_value;
        case MessageKind::kFullModel:
            return static_cast<std::int64_t>(param_count(split.full_spec)) * bits_per_value;
    }
    throw ContractError("unknown message kind");
}

namespace {

struct SplitBatchCost {
    CostBreakdown client_fwd;
    CostBreakdown smashed_up;
    CostBreakdown server_fwd_bwd;
    CostBreakdown grad_down;
    CostBreakdown client_bwd;
    double total = 0.0;
};

CostBreakdown event(std::string label, double compute_s, double uplink_s, double downlink_s) {
    CostBreakdown e;
    e.label = std::move(label);
    e.compute_s = compute_s;
    e.uplink_s = uplink_s;
    e.downlink_s = downlink_s;
    e.total_s = compute_s + uplink_s + downlink_s;
    return e;
}

// Cost of `steps` split-training steps for one client, folded per phase.
SplitBatchCost split_steps_cost(const std::string& prefix, const SplitModel& split,
                                const LatencyParams& lp, std::int64_t steps,
                                std::size_t batch_size) {
    const double s = static_cast<double>(steps);
    const double client_fwd =
        s * static_cast<double>(flops(split.client_spec, batch_size, Direction::kForward)) /
        lp.client_flops;
    const double client_bwd =
        s * static_cast<double>(flops(split.client_spec, batch_size, Direction::kBackward)) /
        lp.client_flops;
    const double server_fwd_bwd =
        s *
        static_cast<double>(flops(split.server_spec, batch_size, Direction::kForward) +
                            flops(split.server_spec, batch_size, Direction::kBackward)) /
        lp.server_flops;
    const double up = s * comm_time(static_cast<double>(message_bits(
                                        MessageKind::kSmashed, split, batch_size, lp.bits_per_value)),
                                    lp.uplink_bps);
    const double down = s * comm_time(static_cast<double>(message_bits(
                                          MessageKind::kGrad, split, batch_size, lp.bits_per_value)),
                                      lp.downlink_bps);

    SplitBatchCost cost;
    cost.client_fwd = event(prefix + "client_fwd", client_fwd, 0, 0);
    cost.smashed_up = event(prefix + "smashed_up", 0, up, 0);
    cost.server_fwd_bwd = event(prefix + "server_fwd_bwd", server_fwd_bwd, 0, 0);
    cost.grad_down = event(prefix + "grad_down", 0, 0, down);
    cost.client_bwd = event(prefix + "client_bwd", client_bwd, 0, 0);
    cost.total = cost.client_fwd.total_s + cost.smashed_up.total_s + cost.server_fwd_bwd.total_s +
                 cost.grad_down.total_s + cost.client_bwd.total_s;
    return cost;
}

void append(RoundCost& rc, const SplitBatchCost& cost) {
    rc.events.push_back(cost.client_fwd);
    rc.events.push_back(cost.smashed_up);
    rc.events.push_back(cost.server_fwd_bwd);
    rc.events.push_back(cost.grad_down);
    rc.events.push_back(cost.client_bwd);
}

// Relay chain duration for an ordered client list: per-batch costs, then the
// model handoff (uplink to the AP, downlink to the next client; the chain's
// last client uplinks only).
double chain_cost(RoundCost& rc, const std::string& prefix, const SplitModel& split,
                  const LatencyParams& lp, const std::vector<std::size_t>& order,
                  const std::vector<std::int64_t>& steps_per_client, std::size_t batch_size) {
    const double model_up = comm_time(
        static_cast<double>(message_bits(MessageKind::kClientModel, split, 0, lp.bits_per_value)),
        lp.uplink_bps);
    const double model_down = comm_time(
        static_cast<double>(message_bits(MessageKind::kClientModel, split, 0, lp.bits_per_value)),
        lp.downlink_bps);
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t client = order[i];
        const std::string client_prefix = prefix + "c" + std::to_string(client) + "/";
        const SplitBatchCost cost =
            split_steps_cost(client_prefix, split, lp, steps_per_client[client], batch_size);
        append(rc, cost);
        const bool last = i + 1 == order.size();
        const CostBreakdown handoff =
            event(client_prefix + "model_handoff", 0, model_up, last ? 0.0 : model_down);
        rc.events.push_back(handoff);
        total += cost.total + handoff.total_s;
    }
    return total;
}

}  // namespace

RoundCost round_latency(Scheme scheme, const Topology& topo, const SplitModel& split,
                        const LatencyParams& lp, const std::vector<std::int64_t>& steps_per_client,
                        std::size_t batch_size, std::int64_t cl_data_upload_bits) {
    validate_latency_params(lp);
    validate_topology(topo);
    if (steps_per_client.size() != topo.n_clients) {
        throw ConfigError("round_latency: steps_per_client has " +
                          std::to_string(steps_per_client.size()) + " entries for " +
                          std::to_string(topo.n_clients) + " clients");
    }
    for (std::int64_t steps : steps_per_client) {
        if (steps < 0) throw ConfigError("round_latency: negative step count");
    }

    RoundCost rc;

    switch (scheme) {
        case Scheme::kCentralized: {
            std::int64_t steps = 0;
            for (std::int64_t s : steps_per_client) steps += s;
            const double compute =
                static_cast<double>(steps) *
                static_cast<double>(flops(split.full_spec, batch_size, Direction::kForward) +
                                    flops(split.full_spec, batch_size, Direction::kBackward)) /
                lp.server_flops;
            rc.events.push_back(event("epoch_compute", compute, 0, 0));
            rc.total_s = compute;
            if (cl_data_upload_bits > 0) {
                const double upload =
                    comm_time(static_cast<double>(cl_data_upload_bits), lp.uplink_bps);
                rc.events.push_back(event("data_upload", 0, upload, 0));
                rc.total_s += upload;
            }
            return rc;
        }

        case Scheme::kSplit: {
            // One chain over every client in ascending id order. The round
            // starts with the client-model downlink to the chain's first
            // client, mirroring the per-group distribution in gsfl.
            const double model_down = comm_time(
                static_cast<double>(
                    message_bits(MessageKind::kClientModel, split, 0, lp.bits_per_value)),
                lp.downlink_bps);
            rc.events.push_back(event("distribution", 0, 0, model_down));
            std::vector<std::size_t> order(topo.n_clients);
            for (std::size_t c = 0; c < topo.n_clients; ++c) order[c] = c;
            const double chain =
                chain_cost(rc, "", split, lp, order, steps_per_client, batch_size);
            rc.total_s = model_down + chain;
            return rc;
        }

        case Scheme::kGsfl: {
            const double model_down = comm_time(
                static_cast<double>(
                    message_bits(MessageKind::kClientModel, split, 0, lp.bits_per_value)),
                lp.downlink_bps);
            rc.events.push_back(event("distribution", 0, 0, model_down));
            double max_chain = 0.0;
            for (std::size_t g = 0; g < topo.n_groups; ++g) {
                const std::string prefix = "g" + std::to_string(g) + "/";
                const double chain =
                    chain_cost(rc, prefix, split, lp, topo.order[g], steps_per_client, batch_size);
                max_chain = std::max(max_chain, chain);
            }
            rc.events.push_back(event("aggregation", lp.aggregation_s, 0, 0));
            rc.total_s = max_chain + model_down + lp.aggregation_s;
            return rc;
        }

        case Scheme::kFederated: {
            const double model_bits = static_cast<double>(
                message_bits(MessageKind::kFullModel, split, 0, lp.bits_per_value));
            const double model_down = comm_time(model_bits, lp.downlink_bps);
            const double model_up = comm_time(model_bits, lp.uplink_bps);
            const std::int64_t step_flops =
                flops(split.full_spec, batch_size, Direction::kForward) +
                flops(split.full_spec, batch_size, Direction::kBackward);
            double max_client = 0.0;
            for (std::size_t c = 0; c < topo.n_clients; ++c) {
                const std::string prefix = "c" + std::to_string(c) + "/";
                const double compute = static_cast<double>(steps_per_client[c]) *
                                       static_cast<double>(step_flops) / lp.client_flops;
                rc.events.push_back(event(prefix + "model_down", 0, 0, model_down));
                rc.events.push_back(event(prefix + "local_train", compute, 0, 0));
                rc.events.push_back(event(prefix + "model_up", 0, model_up, 0));
                max_client = std::max(max_client, model_down + compute + model_up);
            }
            rc.events.push_back(event("aggregation", lp.aggregation_s, 0, 0));
            rc.total_s = max_client + lp.aggregation_s;
            return rc;
        }
    }
    throw ContractError("unknown scheme");
}

}  // namespace gsfl
