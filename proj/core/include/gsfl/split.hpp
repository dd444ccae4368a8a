#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gsfl/model.hpp"
#include "gsfl/nn.hpp"

namespace gsfl {

// A model partitioned at a cut layer: client side holds layers [0, cut),
// server side holds layers [cut, L).
struct SplitModel {
    ModelSpec full_spec;
    std::size_t cut = 0;
    ModelSpec client_spec;
    ModelSpec server_spec;

    std::size_t cut_width() const { return client_spec.num_classes; }
};

// Cut-layer activations for one mini-batch, uplinked to the AP. Labels travel
// with the activations because the loss is computed server-side.
struct SmashedBatch {
    Tensor activations;  // batch x cut_width
    std::vector<std::size_t> labels;
    std::int64_t batch_id = 0;
};

// Loss gradient w.r.t. the smashed activations, downlinked to the client.
struct GradMessage {
    Tensor grad_smashed;  // batch x cut_width
    std::int64_t batch_id = 0;
    double loss_value = 0.0;
};

struct ClientForwardResult {
    SmashedBatch smashed;
    ForwardCache cache;
};

struct ServerStepResult {
    Params params;  // server params after the SGD step
    GradMessage grad;
};

SplitModel split_model(const ModelSpec& spec, std::size_t cut);

// Splits layer-aligned Params at the same index as the model cut.
std::pair<Params, Params> split_params(const Params& params, std::size_t cut);

// Inverse of splitting: concatenates the halves back into the full model.
std::pair<ModelSpec, Params> stitch_model(const SplitModel& split, const Params& client_params,
                                          const Params& server_params);

// Client-side forward pass; the cache stays with the client for the backward
// step once the gradient message arrives.
ClientForwardResult client_forward(const ModelSpec& client_spec, const Params& client_params,
                                   const Tensor& batch_x, const std::vector<std::size_t>& batch_y,
                                   std::int64_t batch_id);

// Server-side forward, loss, backward and SGD update. The returned gradient
// message is computed against the pre-update server parameters, which makes
// one split step equal one SGD step on the unsplit model.
ServerStepResult server_train_step(const ModelSpec& server_spec, const Params& server_params,
                                   const SmashedBatch& smashed, double lr);

// Backprops the gradient message through the client layers and applies one
// SGD step. sent_batch_id is the id the client recorded at client_forward
// time; a mismatch means a stale gradient.
Params client_backward_step(const ModelSpec& client_spec, const Params& client_params,
                            const ForwardCache& cache, std::int64_t sent_batch_id,
                            const GradMessage& grad, double lr);

}  // namespace gsfl
