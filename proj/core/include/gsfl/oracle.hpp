#pragma once

#include <cstdint>

#include "gsfl/model.hpp"
#include "gsfl/nn.hpp"

namespace gsfl {

// Independent verification routes. gradcheck differentiates the loss by
// central finite differences (forward passes only) and never touches
// backward(); split_equivalence replays the same batch stream through plain
// unsplit SGD and through the split protocol and compares the stitched
// result. The CLI exposes both, and the test suites gate on them.

struct GradCheckReport {
    double max_rel_err = 0.0;
    int models = 0;
    long params_checked = 0;
};

// Random models with up to 3 Dense layers, dims <= 8, batch <= 4. Relative
// error uses an absolute floor of 1e-4 so near-zero gradients (dead ReLU
// paths) do not divide by noise; step h = 1e-6.
GradCheckReport gradcheck(std::uint64_t seed, int trials);

struct SplitEquivReport {
    double max_abs_diff = 0.0;
    int trials = 0;
};

// Random (spec <= 4 Dense layers, cut, seed, lr, 10 batches) configurations;
// reports the largest elementwise parameter distance between split-then-
// stitched training and unsplit SGD.
SplitEquivReport split_equivalence(std::uint64_t seed, int trials);

// Scalar mean softmax-CE loss via a forward pass only; the quantity both
// oracles differentiate or replay.
double forward_loss(const ModelSpec& spec, const Params& params, const Tensor& x,
                    const std::vector<std::size_t>& y);

}  // namespace gsfl
