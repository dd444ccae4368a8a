#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gsfl/tensor.hpp"

namespace gsfl {

enum class LayerKind { kDense, kRelu };

struct LayerSpec {
    LayerKind kind;
    // Dense only; ReLU widths are inferred from the preceding layer.
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;

    static LayerSpec dense(std::size_t in_dim, std::size_t out_dim) {
        return {LayerKind::kDense, in_dim, out_dim};
    }
    static LayerSpec relu() { return {LayerKind::kRelu, 0, 0}; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Ordered layer sequence. For a full classifier, output_dim == num_classes;
// sub-models produced by splitting keep the same representation with
// num_classes set to the width their last layer produces.
struct ModelSpec {
    std::vector<LayerSpec> layers;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Per-layer trainable parameters, index-aligned with ModelSpec::layers.
// ReLU entries hold empty tensors.
struct LayerParams {
    Tensor weight;  // out_dim x in_dim
    Tensor bias;    // out_dim

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct Params {
    std::vector<LayerParams> layers;

    std::size_t count() const;

    friend bool operator==(const Params&, const Params&) = default;
};

// Layer inputs recorded during a forward pass, consumed by backward().
struct ForwardCache {
    std::vector<Tensor> layer_inputs;  // one entry per layer traversed
    std::size_t batch = 0;
};

// Width of the activation entering each layer; index L holds the output width.
// Throws ConfigError if adjacent layers are dimension-incompatible.
std::vector<std::size_t> layer_widths(const ModelSpec& spec);

std::size_t output_dim(const ModelSpec& spec);

// Structural checks every layer sequence must satisfy (positive dims,
// adjacency). Sub-models from splitting pass this.
void validate_structure(const ModelSpec& spec);

// Full-classifier checks on top of the structural ones: at least 2 layers so
// a nontrivial cut exists, and the last Dense output equals num_classes.
void validate_model(const ModelSpec& spec);

std::size_t param_count(const ModelSpec& spec);

// Checks that params shapes match the spec exactly.
void validate_params(const ModelSpec& spec, const Params& params, const std::string& context);

// The default experiment architecture:
// Dense(d,64) - ReLU - Dense(64,32) - ReLU - Dense(32,C).
ModelSpec default_model(std::size_t input_dim, std::size_t num_classes);

}  // namespace gsfl
