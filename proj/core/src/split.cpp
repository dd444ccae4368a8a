#include "gsfl/split.hpp"

#include <string>

#include "gsfl/errors.hpp"

namespace gsfl {

SplitModel split_model(const ModelSpec& spec, std::size_t cut) {
    validate_structure(spec);
    const std::size_t n_layers = spec.layers.size();
    if (cut < 1 || cut > n_layers - 1) {
        throw ConfigError("cut " + std::to_string(cut) + " out of valid range [1, " +
                          std::to_string(n_layers - 1) + "]");
    }
    const std::vector<std::size_t> widths = layer_widths(spec);

    SplitModel split;
    split.full_spec = spec;
    split.cut = cut;

    split.client_spec.layers.assign(spec.layers.begin(),
                                    spec.layers.begin() + static_cast<std::ptrdiff_t>(cut));
    split.client_spec.input_dim = spec.input_dim;
    split.client_spec.num_classes = widths[cut];

    split.server_spec.layers.assign(spec.layers.begin() + static_cast<std::ptrdiff_t>(cut),
                                    spec.layers.end());
    split.server_spec.input_dim = widths[cut];
    split.server_spec.num_classes = spec.num_classes;
    return split;
}

std::pair<Params, Params> split_params(const Params& params, std::size_t cut) {
    if (cut < 1 || cut >= params.layers.size()) {
        throw ConfigError("cut " + std::to_string(cut) + " out of range for " +
                          std::to_string(params.layers.size()) + " parameter layers");
    }
    Params client, server;
    client.layers.assign(params.layers.begin(),
                         params.layers.begin() + static_cast<std::ptrdiff_t>(cut));
    server.layers.assign(params.layers.begin() + static_cast<std::ptrdiff_t>(cut),
                         params.layers.end());
    return {std::move(client), std::move(server)};
}

std::pair<ModelSpec, Params> stitch_model(const SplitModel& split, const Params& client_params,
                                          const Params& server_params) {
    validate_params(split.client_spec, client_params, "stitch_model(client)");
    validate_params(split.server_spec, server_params, "stitch_model(server)");
    Params full;
    full.layers = client_params.layers;
    full.layers.insert(full.layers.end(), server_params.layers.begin(), server_params.layers.end());
    return {split.full_spec, std::move(full)};
}

ClientForwardResult client_forward(const ModelSpec& client_spec, const Params& client_params,
                                   const Tensor& batch_x, const std::vector<std::size_t>& batch_y,
                                   std::int64_t batch_id) {
    if (batch_y.size() != batch_x.rows()) {
        throw ShapeError("client_forward: " + std::to_string(batch_y.size()) + " labels for batch " +
                         std::to_string(batch_x.rows()));
    }
    ForwardResult fwd = forward(client_spec, client_params, batch_x);
    ClientForwardResult result;
    result.smashed.activations = std::move(fwd.output);
    result.smashed.labels = batch_y;
    result.smashed.batch_id = batch_id;
    result.cache = std::move(fwd.cache);
    return result;
}

ServerStepResult server_train_step(const ModelSpec& server_spec, const Params& server_params,
                                   const SmashedBatch& smashed, double lr) {
    if (smashed.activations.shape.size() != 2 ||
        smashed.activations.cols() != server_spec.input_dim) {
        throw ProtocolError("server_train_step: smashed width " +
                            std::to_string(smashed.activations.shape.size() == 2
                                               ? smashed.activations.cols()
                                               : 0) +
                            " does not match server input width " +
                            std::to_string(server_spec.input_dim));
    }
    ForwardResult fwd = forward(server_spec, server_params, smashed.activations);
    LossResult loss = loss_softmax_ce(fwd.output, smashed.labels);
    BackwardResult bwd = backward(server_spec, server_params, fwd.cache, loss.grad_logits);

    ServerStepResult result;
    result.grad.grad_smashed = std::move(bwd.grad_input);
    result.grad.batch_id = smashed.batch_id;
    result.grad.loss_value = loss.loss;
    result.params = sgd_step(server_params, bwd.grads, lr);
    return result;
}

Params client_backward_step(const ModelSpec& client_spec, const Params& client_params,
                            const ForwardCache& cache, std::int64_t sent_batch_id,
                            const GradMessage& grad, double lr) {
    if (grad.batch_id != sent_batch_id) {
        throw ProtocolError("client_backward_step: stale gradient, batch_id " +
                            std::to_string(grad.batch_id) + " does not match sent id " +
                            std::to_string(sent_batch_id));
    }
    BackwardResult bwd = backward(client_spec, client_params, cache, grad.grad_smashed);
    return sgd_step(client_params, bwd.grads, lr);
}

}  // namespace gsfl
