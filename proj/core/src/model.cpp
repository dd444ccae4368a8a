#include "gsfl/model.hpp"

#include <string>

#include "gsfl/errors.hpp"

namespace gsfl {

std::size_t Params::count() const {
    std::size_t n = 0;
    for (const LayerParams& lp : layers) n += lp.weight.size() + lp.bias.size();
    return n;
}

std::vector<std::size_t> layer_widths(const ModelSpec& spec) {
    std::vector<std::size_t> widths;
    widths.reserve(spec.layers.size() + 1);
    std::size_t width = spec.input_dim;
    widths.push_back(width);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        if (layer.kind == LayerKind::kDense) {
            if (layer.in_dim == 0 || layer.out_dim == 0) {
                throw ConfigError("layer " + std::to_string(i) + ": Dense dims must be positive");
            }
            if (layer.in_dim != width) {
                throw ConfigError("layer " + std::to_string(i) + ": Dense in_dim " +
                                  std::to_string(layer.in_dim) + " does not match incoming width " +
                                  std::to_string(width));
            }
            width = layer.out_dim;
        }
        widths.push_back(width);
    }
    return widths;
}

std::size_t output_dim(const ModelSpec& spec) { return layer_widths(spec).back(); }

void validate_structure(const ModelSpec& spec) {
    if (spec.input_dim == 0) throw ConfigError("model input_dim must be positive");
    if (spec.layers.empty()) throw ConfigError("model must have at least one layer");
    layer_widths(spec);
}

void validate_model(const ModelSpec& spec) {
    validate_structure(spec);
    if (spec.layers.size() < 2) {
        throw ConfigError("model must have at least 2 layers so a nontrivial cut exists");
    }
    if (spec.num_classes < 2) throw ConfigError("model num_classes must be at least 2");
    if (output_dim(spec) != spec.num_classes) {
        throw ConfigError("last Dense output dim " + std::to_string(output_dim(spec)) +
                          " does not equal num_classes " + std::to_string(spec.num_classes));
    }
}

std::size_t param_count(const ModelSpec& spec) {
    std::size_t n = 0;
    for (const LayerSpec& layer : spec.layers) {
        if (layer.kind == LayerKind::kDense) n += layer.out_dim * layer.in_dim + layer.out_dim;
    }
    return n;
}

void validate_params(const ModelSpec& spec, const Params& params, const std::string& context) {
    if (params.layers.size() != spec.layers.size()) {
        throw ContractError(context + ": params have " + std::to_string(params.layers.size()) +
                            " layers, spec has " + std::to_string(spec.layers.size()));
    }
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        const LayerParams& lp = params.layers[i];
        if (layer.kind == LayerKind::kDense) {
            if (lp.weight.shape != std::vector<std::size_t>{layer.out_dim, layer.in_dim} ||
                lp.bias.shape != std::vector<std::size_t>{layer.out_dim}) {
                throw ContractError(context + ": layer " + std::to_string(i) +
                                    " params do not match Dense(" + std::to_string(layer.in_dim) +
                                    "," + std::to_string(layer.out_dim) + ")");
            }
        } else {
            if (!lp.weight.empty() || !lp.bias.empty()) {
                throw ContractError(context + ": layer " + std::to_string(i) +
                                    " is ReLU but owns parameters");
            }
        }
    }
}

ModelSpec default_model(std::size_t input_dim, std::size_t num_classes) {
    ModelSpec spec;
    spec.input_dim = input_dim;
    spec.num_classes = num_classes;
    spec.layers = {LayerSpec::dense(input_dim, 64), LayerSpec::relu(), LayerSpec::dense(64, 32),
                   LayerSpec::relu(), LayerSpec::dense(32, num_classes)};
    validate_model(spec);
    return spec;
}

}  // namespace gsfl
