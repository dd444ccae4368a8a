#include "gsfl/nn.hpp"

#include <cmath>
#include <string>

#include "gsfl/errors.hpp"
#include "gsfl/rng.hpp"

namespace gsfl {

Params init_params(const ModelSpec& spec, std::uint64_t seed) {
    validate_structure(spec);
    SeededRng rng(seed);
    Params params;
    params.layers.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        if (layer.kind != LayerKind::kDense) continue;
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
        Tensor weight = Tensor::matrix(layer.out_dim, layer.in_dim);
        for (double& w : weight.data) w = rng.uniform(-bound, bound);
        params.layers[i].weight = std::move(weight);
        params.layers[i].bias = Tensor::zeros({layer.out_dim});
    }
    return params;
}

namespace {

Tensor dense_forward(const LayerSpec& layer, const LayerParams& lp, const Tensor& x) {
    const std::size_t batch = x.rows();
    Tensor y = Tensor::matrix(batch, layer.out_dim);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xrow = &x.data[b * layer.in_dim];
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double* wrow = &lp.weight.data[o * layer.in_dim];
            double acc = lp.bias.data[o];
            for (std::size_t i = 0; i < layer.in_dim; ++i) acc += xrow[i] * wrow[i];
            y.data[b * layer.out_dim + o] = acc;
        }
    }
    return y;
}

Tensor relu_forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

}  // namespace

ForwardResult forward(const ModelSpec& spec, const Params& params, const Tensor& input) {
    validate_params(spec, params, "forward");
    if (input.shape.size() != 2 || input.cols() != spec.input_dim) {
        throw ShapeError("layer 0: input width does not match model input_dim " +
                         std::to_string(spec.input_dim));
    }
    ForwardResult result;
    result.cache.batch = input.rows();
    result.cache.layer_inputs.reserve(spec.layers.size());
    Tensor x = input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        result.cache.layer_inputs.push_back(x);
        if (layer.kind == LayerKind::kDense) {
            if (x.cols() != layer.in_dim) {
                throw ShapeError("layer " + std::to_string(i) + ": activation width " +
                                 std::to_string(x.cols()) + " does not match Dense in_dim " +
                                 std::to_string(layer.in_dim));
            }
            x = dense_forward(layer, params.layers[i], x);
        } else {
            x = relu_forward(x);
        }
    }
    result.output = std::move(x);
    return result;
}

LossResult loss_softmax_ce(const Tensor& logits, const std::vector<std::size_t>& labels) {
    const std::size_t batch = logits.rows();
    const std::size_t classes = logits.cols();
    if (labels.size() != batch) {
        throw ShapeError("loss: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(batch));
    }
    LossResult result;
    result.grad_logits = Tensor::matrix(batch, classes);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= classes) {
            throw DataError("loss: label " + std::to_string(labels[b]) + " out of range [0, " +
                            std::to_string(classes) + ") at row " + std::to_string(b));
        }
        const double* row = &logits.data[b * classes];
        double max = row[0];
        for (std::size_t c = 1; c < classes; ++c) max = row[c] > max ? row[c] : max;
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - max);
        const double log_sum = std::log(sum);
        loss_sum += -(row[labels[b]] - max - log_sum);
        double* grad = &result.grad_logits.data[b * classes];
        for (std::size_t c = 0; c < classes; ++c) {
            const double softmax = std::exp(row[c] - max) / sum;
            grad[c] = (softmax - (c == labels[b] ? 1.0 : 0.0)) / static_cast<double>(batch);
        }
    }
    result.loss = loss_sum / static_cast<double>(batch);
    return result;
}

BackwardResult backward(const ModelSpec& spec, const Params& params, const ForwardCache& cache,
                        const Tensor& grad_output) {
    validate_params(spec, params, "backward");
    if (cache.layer_inputs.size() != spec.layers.size()) {
        throw ContractError("backward: cache has " + std::to_string(cache.layer_inputs.size()) +
                            " entries for " + std::to_string(spec.layers.size()) + " layers");
    }
    if (grad_output.shape.size() != 2 || grad_output.rows() != cache.batch ||
        grad_output.cols() != output_dim(spec)) {
        throw ContractError("backward: grad_output shape does not match the forward output");
    }

    BackwardResult result;
    result.grads.layers.resize(spec.layers.size());
    Tensor grad = grad_output;
    for (std::size_t idx = spec.layers.size(); idx-- > 0;) {
        const LayerSpec& layer = spec.layers[idx];
        const Tensor& x = cache.layer_inputs[idx];
        if (x.rows() != cache.batch) {
            throw ContractError("backward: cache entry " + std::to_string(idx) +
                                " batch does not match");
        }
        if (layer.kind == LayerKind::kDense) {
            if (x.cols() != layer.in_dim || grad.cols() != layer.out_dim) {
                throw ContractError("backward: cache/spec mismatch at layer " + std::to_string(idx));
            }
            const std::size_t batch = cache.batch;
            Tensor grad_w = Tensor::matrix(layer.out_dim, layer.in_dim);
            Tensor grad_b = Tensor::zeros({layer.out_dim});
            Tensor grad_x = Tensor::matrix(batch, layer.in_dim);
            for (std::size_t b = 0; b < batch; ++b) {
                const double* grow = &grad.data[b * layer.out_dim];
                const double* xrow = &x.data[b * layer.in_dim];
                double* gxrow = &grad_x.data[b * layer.in_dim];
                for (std::size_t o = 0; o < layer.out_dim; ++o) {
                    const double g = grow[o];
                    grad_b.data[o] += g;
                    double* gwrow = &grad_w.data[o * layer.in_dim];
                    const double* wrow = &params.layers[idx].weight.data[o * layer.in_dim];
                    for (std::size_t i = 0; i < layer.in_dim; ++i) {
                        gwrow[i] += g * xrow[i];
                        gxrow[i] += g * wrow[i];
                    }
                }
            }
            result.grads.layers[idx].weight = std::move(grad_w);
            result.grads.layers[idx].bias = std::move(grad_b);
            grad = std::move(grad_x);
        } else {
            if (grad.shape != x.shape) {
                throw ContractError("backward: cache/spec mismatch at layer " + std::to_string(idx));
            }
            Tensor grad_x = grad;
            for (std::size_t i = 0; i < grad_x.data.size(); ++i) {
                if (x.data[i] <= 0.0) grad_x.data[i] = 0.0;
            }
            grad = std::move(grad_x);
        }
    }
    result.grad_input = std::move(grad);
    return result;
}

Params sgd_step(const Params& params, const Params& grads, double lr) {
    if (params.layers.size() != grads.layers.size()) {
        throw ContractError("sgd_step: params and grads differ in layer count");
    }
    Params next = params;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const LayerParams& g = grads.layers[i];
        LayerParams& p = next.layers[i];
        if (p.weight.shape != g.weight.shape || p.bias.shape != g.bias.shape) {
            throw ContractError("sgd_step: shape mismatch at layer " + std::to_string(i));
        }
        for (std::size_t k = 0; k < p.weight.data.size(); ++k) p.weight.data[k] -= lr * g.weight.data[k];
        for (std::size_t k = 0; k < p.bias.data.size(); ++k) p.bias.data[k] -= lr * g.bias.data[k];
    }
    return next;
}

}  // namespace gsfl
