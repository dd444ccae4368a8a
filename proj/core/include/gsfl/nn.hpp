#pragma once

#include <cstdint>
#include <vector>

#include "gsfl/model.hpp"
#include "gsfl/tensor.hpp"

namespace gsfl {

struct ForwardResult {
    Tensor output;
    ForwardCache cache;
};

struct LossResult {
    double loss = 0.0;            // mean over the batch
    Tensor grad_logits;           // d(mean loss)/d(logits)
};

struct BackwardResult {
    Params grads;                 // same shapes as the params
    Tensor grad_input;            // d(loss)/d(sub-model input)
};

// Glorot-uniform weights (uniform in +-sqrt(6/(in+out))), zero biases.
// Identical (spec, seed) pairs yield bit-identical Params.
Params init_params(const ModelSpec& spec, std::uint64_t seed);

// Dense rows compute x*W^T + b, ReLU is elementwise max(0, x). The cache
// records every layer input for the later backward pass.
ForwardResult forward(const ModelSpec& spec, const Params& params, const Tensor& input);

// Softmax cross-entropy with per-row max subtraction, mean reduction.
LossResult loss_softmax_ce(const Tensor& logits, const std::vector<std::size_t>& labels);

// Gradients of the loss w.r.t. every parameter and w.r.t. the sub-model's
// input; grad_input is what crosses the cut toward the client.
BackwardResult backward(const ModelSpec& spec, const Params& params, const ForwardCache& cache,
                        const Tensor& grad_output);

// One step of plain SGD: p <- p - lr * g. Pure; returns new Params.
Params sgd_step(const Params& params, const Params& grads, double lr);

}  // namespace gsfl
