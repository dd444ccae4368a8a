#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsfl/split.hpp"
#include "gsfl/topology.hpp"

namespace gsfl {

// Parametric link and compute speeds. Rates are per client; the server is
// assumed to run one executor per group, so server compute never serializes
// across groups.
struct LatencyParams {
    double uplink_bps = 5e6;
    double downlink_bps = 20e6;
    double client_flops = 1e9;
    double server_flops = 100e9;
    std::int64_t bits_per_value = 32;
    double aggregation_s = 0.01;  // fixed overhead per aggregation event
};

void validate_latency_params(const LatencyParams& lp);

// One accounted event; total_s always equals the sum of the parts.
struct CostBreakdown {
    std::string label;
    double compute_s = 0.0;
    double uplink_s = 0.0;
    double downlink_s = 0.0;
    double total_s = 0.0;
};

struct RoundCost {
    double total_s = 0.0;
    std::vector<CostBreakdown> events;
};

enum class Scheme { kCentralized, kSplit, kFederated, kGsfl };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

enum class Direction { kForward, kBackward };

enum class MessageKind { kSmashed, kGrad, kClientModel, kFullModel };

// Transmission time in seconds for a payload of `bits` at `rate` bits/s.
double comm_time(double bits, double rate);

// Cost model: Dense forward 2*batch*in*out, Dense backward 4*batch*in*out,
// ReLU batch*width in either direction.
std::int64_t flops(const ModelSpec& spec, std::size_t batch, Direction direction);

// Wire size of each protocol message. Smashed batches carry one label per
// sample, also at bits_per_value.
std::int64_t message_bits(MessageKind kind, const SplitModel& split, std::size_t batch,
                          std::int64_t bits_per_value);

// Simulated duration of one round under each scheme:
//   sl   — the single relay chain over all clients, plus the round-start
//          client-model downlink to the first client;
//   gsfl — max over groups of the group's chain, plus the (overlapped,
//          counted once) distribution downlink and the aggregation overhead;
//   fl   — max over clients of local compute + full-model down/up, plus
//          aggregation overhead;
//   cl   — epoch compute on the server only; cl_data_upload_bits > 0 adds a
//          one-shot dataset upload event.
// steps_per_client[k] is the number of gradient steps client k performs this
// round (epochs already multiplied in); for cl the entries are summed.
RoundCost round_latency(Scheme scheme, const Topology& topo, const SplitModel& split,
                        const LatencyParams& lp, const std::vector<std::int64_t>& steps_per_client,
                        std::size_t batch_size, std::int64_t cl_data_upload_bits = 0);

}  // namespace gsfl
