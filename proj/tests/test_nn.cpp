#include <cmath>
#include <vector>

#include <doctest.h>

#include "gsfl/errors.hpp"
#include "gsfl/nn.hpp"
#include "gsfl/oracle.hpp"
#include "gsfl/rng.hpp"
#include "test_util.hpp"

using namespace gsfl;
using test::max_param_diff;
using test::random_labels;
using test::random_spec;
using test::random_tensor;

namespace {

ModelSpec single_dense(std::size_t in, std::size_t out) {
    ModelSpec spec;
    spec.input_dim = in;
    spec.num_classes = out;
    spec.layers = {LayerSpec::dense(in, out)};
    return spec;
}

Params dense_params(std::size_t in, std::size_t out, std::initializer_list<double> w,
                    std::initializer_list<double> b) {
    Params p;
    p.layers.resize(1);
    p.layers[0].weight = Tensor({out, in}, std::vector<double>(w));
    p.layers[0].bias = Tensor({out}, std::vector<double>(b));
    return p;
}

// Scalar-loop reference for a Dense stack, independent of forward()'s
// traversal and caching.
Tensor dense_stack_reference(const ModelSpec& spec, const Params& params, const Tensor& input) {
    Tensor x = input;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& layer = spec.layers[l];
        if (layer.kind == LayerKind::kRelu) {
            for (double& v : x.data) v = std::max(0.0, v);
            continue;
        }
        Tensor y = Tensor::matrix(x.rows(), layer.out_dim);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                double acc = params.layers[l].bias.data[o];
                for (std::size_t i = 0; i < layer.in_dim; ++i) {
                    acc += x.at(r, i) * params.layers[l].weight.at(o, i);
                }
                y.at(r, o) = acc;
            }
        }
        x = y;
    }
    return x;
}

}  // namespace

TEST_CASE("init_params is deterministic with zero biases") {
    const ModelSpec spec = default_model(16, 4);
    const Params a = init_params(spec, 7);
    const Params b = init_params(spec, 7);
    CHECK(a == b);
    CHECK(max_param_diff(a, b) == 0.0);
    for (const LayerParams& lp : a.layers) {
        for (double bias : lp.bias.data) CHECK(bias == 0.0);
    }
    const Params c = init_params(spec, 8);
    CHECK(max_param_diff(a, c) > 0.0);
}

TEST_CASE("init_params draws weights inside the glorot bound") {
    const ModelSpec spec = single_dense(100, 100);
    const double bound = std::sqrt(6.0 / 200.0);
    for (std::uint64_t seed : {1ULL, 99ULL, 31337ULL}) {
        const Params p = init_params(spec, seed);
        for (double w : p.layers[0].weight.data) {
            CHECK(w > -bound);
            CHECK(w < bound);
        }
    }
}

TEST_CASE("forward: identity dense passes input through") {
    const ModelSpec spec = single_dense(2, 2);
    const Params p = dense_params(2, 2, {1, 0, 0, 1}, {0, 0});
    const Tensor x = Tensor::row_major(1, 2, {3, 4});
    const ForwardResult fwd = forward(spec, p, x);
    CHECK(fwd.output.data == std::vector<double>{3, 4});
    CHECK(fwd.cache.layer_inputs.size() == 1);
    CHECK(fwd.cache.layer_inputs[0] == x);
}

TEST_CASE("forward: relu clamps negatives") {
    ModelSpec spec;
    spec.input_dim = 2;
    spec.num_classes = 2;
    spec.layers = {LayerSpec::relu()};
    Params p;
    p.layers.resize(1);
    const ForwardResult fwd = forward(spec, p, Tensor::row_major(1, 2, {-1, 2}));
    CHECK(fwd.output.data == std::vector<double>{0, 2});
}

TEST_CASE("forward: hand matrix multiply confirmed by scalar-loop oracle") {
    const ModelSpec spec = single_dense(2, 2);
    const Params p = dense_params(2, 2, {1, 2, 3, 4}, {1, 1});
    const Tensor x = Tensor::row_major(1, 2, {1, 1});
    const ForwardResult fwd = forward(spec, p, x);
    CHECK(fwd.output.data == std::vector<double>{4, 8});
    CHECK(dense_stack_reference(spec, p, x).data == fwd.output.data);
}

TEST_CASE("forward matches the scalar-loop oracle on random stacks") {
    SeededRng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const ModelSpec spec = random_spec(rng, 3, 8);
        const Params p = init_params(spec, rng.next_u64());
        const Tensor x = random_tensor(rng, 1 + rng.below(4), spec.input_dim, -2, 2);
        const ForwardResult fwd = forward(spec, p, x);
        CHECK(dense_stack_reference(spec, p, x).data == fwd.output.data);
    }
}

TEST_CASE("forward rejects shape mismatches naming the layer") {
    const ModelSpec spec = single_dense(3, 2);
    const Params p = init_params(spec, 1);
    CHECK_THROWS_AS(forward(spec, p, Tensor::matrix(1, 4)), ShapeError);
    CHECK_THROWS_WITH_AS(forward(spec, p, Tensor::matrix(1, 4)),
                         doctest::Contains("layer 0"), ShapeError);
}

TEST_CASE("loss: uniform logits give ln 2") {
    const LossResult r = loss_softmax_ce(Tensor::row_major(1, 2, {0, 0}), {0});
    CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss: extreme logits stay finite") {
    const LossResult r = loss_softmax_ce(Tensor::row_major(1, 2, {1000, 0}), {0});
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.grad_logits.all_finite());
}

TEST_CASE("loss: gradient matches central differences at h=1e-6") {
    const Tensor logits = Tensor::row_major(1, 3, {1, 2, 3});
    const std::vector<std::size_t> labels = {2};
    const LossResult r = loss_softmax_ce(logits, labels);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 3; ++k) {
        Tensor plus = logits, minus = logits;
        plus.data[k] += h;
        minus.data[k] -= h;
        const double fd =
            (loss_softmax_ce(plus, labels).loss - loss_softmax_ce(minus, labels).loss) / (2 * h);
        const double bp = r.grad_logits.data[k];
        CHECK(std::abs(fd - bp) / std::max(std::abs(fd), std::abs(bp)) < 1e-6);
    }
}

TEST_CASE("loss: gradient rows sum to zero") {
    SeededRng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t batch = 1 + rng.below(6);
        const std::size_t classes = 2 + rng.below(7);
        const Tensor logits = random_tensor(rng, batch, classes, -5, 5);
        const LossResult r = loss_softmax_ce(logits, random_labels(rng, batch, classes));
        for (std::size_t b = 0; b < batch; ++b) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < classes; ++c) row_sum += r.grad_logits.at(b, c);
            CHECK(std::abs(row_sum) < 1e-12);
        }
    }
}

TEST_CASE("loss rejects out-of-range labels") {
    CHECK_THROWS_AS(loss_softmax_ce(Tensor::matrix(1, 3), {3}), DataError);
}

TEST_CASE("backward: zero upstream gradient gives zero gradients") {
    const ModelSpec spec = default_model(4, 2);
    const Params p = init_params(spec, 3);
    SeededRng rng(1);
    const ForwardResult fwd = forward(spec, p, random_tensor(rng, 3, 4, -1, 1));
    const BackwardResult bwd = backward(spec, p, fwd.cache, Tensor::matrix(3, 2));
    for (const LayerParams& lp : bwd.grads.layers) {
        for (double g : lp.weight.data) CHECK(g == 0.0);
        for (double g : lp.bias.data) CHECK(g == 0.0);
    }
    for (double g : bwd.grad_input.data) CHECK(g == 0.0);
}

TEST_CASE("backward: identity dense passes the gradient through") {
    const ModelSpec spec = single_dense(2, 2);
    const Params p = dense_params(2, 2, {1, 0, 0, 1}, {0, 0});
    const ForwardResult fwd = forward(spec, p, Tensor::row_major(2, 2, {1, 2, 3, 4}));
    const Tensor g = Tensor::row_major(2, 2, {0.5, -1.5, 2.0, 0.25});
    const BackwardResult bwd = backward(spec, p, fwd.cache, g);
    CHECK(bwd.grad_input == g);
}

TEST_CASE("backward: finite differences over all parameters of a 2-layer model") {
    SeededRng rng(11);
    ModelSpec spec;
    spec.input_dim = 5;
    spec.num_classes = 3;
    spec.layers = {LayerSpec::dense(5, 4), LayerSpec::relu(), LayerSpec::dense(4, 3)};
    Params params = init_params(spec, rng.next_u64());
    const Tensor x = random_tensor(rng, 4, 5, -2, 2);
    const std::vector<std::size_t> y = random_labels(rng, 4, 3);

    const ForwardResult fwd = forward(spec, params, x);
    const LossResult loss = loss_softmax_ce(fwd.output, y);
    const BackwardResult bwd = backward(spec, params, fwd.cache, loss.grad_logits);

    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (Tensor LayerParams::* field : {&LayerParams::weight, &LayerParams::bias}) {
            Tensor& values = params.layers[l].*field;
            const Tensor& grads = bwd.grads.layers[l].*field;
            for (std::size_t k = 0; k < values.data.size(); ++k) {
                const double saved = values.data[k];
                values.data[k] = saved + h;
                const double up = forward_loss(spec, params, x, y);
                values.data[k] = saved - h;
                const double down = forward_loss(spec, params, x, y);
                values.data[k] = saved;
                const double fd = (up - down) / (2 * h);
                const double rel = std::abs(fd - grads.data[k]) /
                                   std::max({1e-4, std::abs(fd), std::abs(grads.data[k])});
                max_rel = std::max(max_rel, rel);
            }
        }
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("backward rejects a cache from a different forward") {
    const ModelSpec spec = default_model(4, 2);
    const Params p = init_params(spec, 3);
    SeededRng rng(5);
    const ForwardResult fwd = forward(spec, p, random_tensor(rng, 3, 4, -1, 1));
    CHECK_THROWS_AS(backward(spec, p, fwd.cache, Tensor::matrix(3, 5)), ContractError);
    ForwardCache truncated = fwd.cache;
    truncated.layer_inputs.pop_back();
    CHECK_THROWS_AS(backward(spec, p, truncated, Tensor::matrix(3, 2)), ContractError);
}

TEST_CASE("gradcheck property: random small models stay under 1e-5") {
    const GradCheckReport report = gradcheck(1234, 10);
    CHECK(report.models == 10);
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("sgd_step arithmetic") {
    ModelSpec spec = single_dense(1, 1);
    const Params p = dense_params(1, 1, {1.0}, {0.0});
    Params g = dense_params(1, 1, {0.5}, {0.0});

    const Params frozen = sgd_step(p, g, 0.0);
    CHECK(frozen == p);

    const Params stepped = sgd_step(p, g, 0.1);
    CHECK(stepped.layers[0].weight.data[0] == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("sgd_step inverts with negated learning rate") {
    SeededRng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelSpec spec = random_spec(rng, 3, 8);
        const Params p = init_params(spec, rng.next_u64());
        Params g = init_params(spec, rng.next_u64());
        const double lr = rng.uniform(0.01, 1.0);
        const Params back = sgd_step(sgd_step(p, g, lr), g, -lr);
        CHECK(max_param_diff(back, p) < 1e-12);
    }
}

TEST_CASE("sgd_step rejects mismatched shapes") {
    const Params p = dense_params(1, 1, {1.0}, {0.0});
    const Params g = dense_params(2, 1, {0.5, 0.5}, {0.0});
    CHECK_THROWS_AS(sgd_step(p, g, 0.1), ContractError);
}

TEST_CASE("engine produces no NaN or Inf for inputs up to 1e3") {
    SeededRng rng(23);
    for (int trial = 0; trial < 15; ++trial) {
        const ModelSpec spec = random_spec(rng, 3, 8);
        const Params p = init_params(spec, rng.next_u64());
        const std::size_t batch = 1 + rng.below(4);
        const Tensor x = random_tensor(rng, batch, spec.input_dim, -1e3, 1e3);
        const ForwardResult fwd = forward(spec, p, x);
        CHECK(fwd.output.all_finite());
        const LossResult loss = loss_softmax_ce(fwd.output, random_labels(rng, batch, spec.num_classes));
        CHECK(std::isfinite(loss.loss));
        const BackwardResult bwd = backward(spec, p, fwd.cache, loss.grad_logits);
        CHECK(bwd.grad_input.all_finite());
        for (const LayerParams& lp : bwd.grads.layers) {
            CHECK(lp.weight.all_finite());
            CHECK(lp.bias.all_finite());
        }
    }
}

TEST_CASE("forward and backward are bit-deterministic") {
    SeededRng data_rng(31);
    const ModelSpec spec = default_model(8, 3);
    const Params p = init_params(spec, 77);
    const Tensor x = random_tensor(data_rng, 4, 8, -2, 2);
    const std::vector<std::size_t> y = random_labels(data_rng, 4, 3);

    auto run_once = [&] {
        const ForwardResult fwd = forward(spec, p, x);
        const LossResult loss = loss_softmax_ce(fwd.output, y);
        return backward(spec, p, fwd.cache, loss.grad_logits);
    };
    const BackwardResult a = run_once();
    const BackwardResult b = run_once();
    CHECK(a.grad_input == b.grad_input);
    CHECK(a.grads == b.grads);
}
