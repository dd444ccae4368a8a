#include "gsfl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsfl/rng.hpp"
#include "gsfl/split.hpp"

namespace gsfl {

namespace {

// Random Dense/ReLU stack: `max_dense` Dense layers at most, widths in
// [2, 8], a ReLU coin-flipped after every non-final Dense.
ModelSpec random_spec(SeededRng& rng, std::size_t max_dense) {
    const std::size_t n_dense = 1 + rng.below(max_dense);
    std::vector<std::size_t> widths(n_dense + 1);
    for (std::size_t& w : widths) w = 2 + rng.below(7);
    ModelSpec spec;
    spec.input_dim = widths[0];
    spec.num_classes = widths[n_dense];
    for (std::size_t i = 0; i < n_dense; ++i) {
        spec.layers.push_back(LayerSpec::dense(widths[i], widths[i + 1]));
        if (i + 1 < n_dense && rng.below(2) == 0) spec.layers.push_back(LayerSpec::relu());
    }
    return spec;
}

Tensor random_batch(SeededRng& rng, std::size_t batch, std::size_t dim) {
    Tensor x = Tensor::matrix(batch, dim);
    for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
    return x;
}

std::vector<std::size_t> random_labels(SeededRng& rng, std::size_t batch, std::size_t classes) {
    std::vector<std::size_t> y(batch);
    for (std::size_t& label : y) label = rng.below(classes);
    return y;
}

}  // namespace

double forward_loss(const ModelSpec& spec, const Params& params, const Tensor& x,
                    const std::vector<std::size_t>& y) {
    return loss_softmax_ce(forward(spec, params, x).output, y).loss;
}

GradCheckReport gradcheck(std::uint64_t seed, int trials) {
    const double h = 1e-6;
    const double denom_floor = 1e-4;
    GradCheckReport report;
    for (int trial = 0; trial < trials; ++trial) {
        SeededRng rng(derive_seed(seed, 0x67726164, static_cast<std::uint64_t>(trial)));
        const ModelSpec spec = random_spec(rng, 3);
        Params params = init_params(spec, rng.next_u64());
        const std::size_t batch = 1 + rng.below(4);
        const Tensor x = random_batch(rng, batch, spec.input_dim);
        const std::vector<std::size_t> y = random_labels(rng, batch, spec.num_classes);

        ForwardResult fwd = forward(spec, params, x);
        LossResult loss = loss_softmax_ce(fwd.output, y);
        BackwardResult bwd = backward(spec, params, fwd.cache, loss.grad_logits);

        for (std::size_t layer = 0; layer < params.layers.size(); ++layer) {
            for (Tensor LayerParams::* field : {&LayerParams::weight, &LayerParams::bias}) {
                Tensor& values = params.layers[layer].*field;
                const Tensor& grads = bwd.grads.layers[layer].*field;
                for (std::size_t k = 0; k < values.data.size(); ++k) {
                    const double saved = values.data[k];
                    values.data[k] = saved + h;
                    const double loss_plus = forward_loss(spec, params, x, y);
                    values.data[k] = saved - h;
                    const double loss_minus = forward_loss(spec, params, x, y);
                    values.data[k] = saved;
                    const double fd = (loss_plus - loss_minus) / (2.0 * h);
                    const double bp = grads.data[k];
                    const double rel =
                        std::abs(fd - bp) / std::max({denom_floor, std::abs(fd), std::abs(bp)});
                    report.max_rel_err = std::max(report.max_rel_err, rel);
                    ++report.params_checked;
                }
            }
        }
        ++report.models;
    }
    return report;
}

SplitEquivReport split_equivalence(std::uint64_t seed, int trials) {
    SplitEquivReport report;
    report.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        SeededRng rng(derive_seed(seed, 0x73706c74, static_cast<std::uint64_t>(trial)));
        ModelSpec spec = random_spec(rng, 4);
        while (spec.layers.size() < 2) spec = random_spec(rng, 4);
        const std::size_t cut = 1 + rng.below(spec.layers.size() - 1);
        const Params start = init_params(spec, rng.next_u64());
        const double lr = rng.uniform(0.01, 0.5);

        const int n_batches = 10;
        std::vector<Tensor> xs;
        std::vector<std::vector<std::size_t>> ys;
        for (int b = 0; b < n_batches; ++b) {
            const std::size_t batch = 1 + rng.below(4);
            xs.push_back(random_batch(rng, batch, spec.input_dim));
            ys.push_back(random_labels(rng, batch, spec.num_classes));
        }

        // Route 1: plain SGD on the unsplit model.
        Params unsplit = start;
        for (int b = 0; b < n_batches; ++b) {
            ForwardResult fwd = forward(spec, unsplit, xs[static_cast<std::size_t>(b)]);
            LossResult loss = loss_softmax_ce(fwd.output, ys[static_cast<std::size_t>(b)]);
            BackwardResult bwd = backward(spec, unsplit, fwd.cache, loss.grad_logits);
            unsplit = sgd_step(unsplit, bwd.grads, lr);
        }

        // Route 2: the split protocol, stitched back afterwards.
        const SplitModel split = split_model(spec, cut);
        auto [client_params, server_params] = split_params(start, cut);
        for (int b = 0; b < n_batches; ++b) {
            ClientForwardResult fwd =
                client_forward(split.client_spec, client_params, xs[static_cast<std::size_t>(b)],
                               ys[static_cast<std::size_t>(b)], b);
            ServerStepResult server =
                server_train_step(split.server_spec, server_params, fwd.smashed, lr);
            server_params = server.params;
            client_params =
                client_backward_step(split.client_spec, client_params, fwd.cache, b, server.grad, lr);
        }
        const Params stitched = stitch_model(split, client_params, server_params).second;

        for (std::size_t layer = 0; layer < stitched.layers.size(); ++layer) {
            for (std::size_t k = 0; k < stitched.layers[layer].weight.data.size(); ++k) {
                report.max_abs_diff =
                    std::max(report.max_abs_diff, std::abs(stitched.layers[layer].weight.data[k] -
                                                           unsplit.layers[layer].weight.data[k]));
            }
            for (std::size_t k = 0; k < stitched.layers[layer].bias.data.size(); ++k) {
                report.max_abs_diff =
                    std::max(report.max_abs_diff, std::abs(stitched.layers[layer].bias.data[k] -
                                                           unsplit.layers[layer].bias.data[k]));
            }
        }
    }
    return report;
}

}  // namespace gsfl
