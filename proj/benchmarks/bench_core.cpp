#include <benchmark/benchmark.h>

#include "gsfl/latency.hpp"
#include "gsfl/nn.hpp"
#include "gsfl/rng.hpp"
#include "gsfl/schemes.hpp"
#include "gsfl/split.hpp"

namespace {

gsfl::Tensor random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    gsfl::SeededRng rng(seed);
    gsfl::Tensor x = gsfl::Tensor::matrix(rows, cols);
    for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
    return x;
}

std::vector<std::size_t> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
    gsfl::SeededRng rng(seed);
    std::vector<std::size_t> y(n);
    for (std::size_t& label : y) label = rng.below(classes);
    return y;
}

void BM_ForwardDefaultModel(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    const gsfl::ModelSpec spec = gsfl::default_model(16, 4);
    const gsfl::Params params = gsfl::init_params(spec, 1);
    const gsfl::Tensor x = random_batch(batch, 16, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsfl::forward(spec, params, x));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ForwardDefaultModel)->Arg(10)->Arg(64)->Arg(256);

void BM_TrainStepUnsplit(benchmark::State& state) {
    const gsfl::ModelSpec spec = gsfl::default_model(16, 4);
    gsfl::Params params = gsfl::init_params(spec, 1);
    const gsfl::Tensor x = random_batch(10, 16, 3);
    const auto y = random_labels(10, 4, 4);
    for (auto _ : state) {
        gsfl::ForwardResult fwd = gsfl::forward(spec, params, x);
        gsfl::LossResult loss = gsfl::loss_softmax_ce(fwd.output, y);
        gsfl::BackwardResult bwd = gsfl::backward(spec, params, fwd.cache, loss.grad_logits);
        params = gsfl::sgd_step(params, bwd.grads, 0.01);
    }
}
BENCHMARK(BM_TrainStepUnsplit);

void BM_TrainStepSplit(benchmark::State& state) {
    const gsfl::ModelSpec spec = gsfl::default_model(16, 4);
    const gsfl::SplitModel split = gsfl::split_model(spec, 2);
    auto [client, server] = gsfl::split_params(gsfl::init_params(spec, 1), 2);
    const gsfl::Tensor x = random_batch(10, 16, 3);
    const auto y = random_labels(10, 4, 4);
    std::int64_t id = 0;
    for (auto _ : state) {
        gsfl::ClientForwardResult fwd = gsfl::client_forward(split.client_spec, client, x, y, id);
        gsfl::ServerStepResult step =
            gsfl::server_train_step(split.server_spec, server, fwd.smashed, 0.01);
        server = std::move(step.params);
        client = gsfl::client_backward_step(split.client_spec, client, fwd.cache, id, step.grad,
                                            0.01);
        ++id;
    }
}
BENCHMARK(BM_TrainStepSplit);

void BM_FedAvg(benchmark::State& state) {
    const auto n_models = static_cast<std::size_t>(state.range(0));
    const gsfl::ModelSpec spec = gsfl::default_model(16, 4);
    std::vector<gsfl::Params> models;
    std::vector<double> weights;
    for (std::size_t i = 0; i < n_models; ++i) {
        models.push_back(gsfl::init_params(spec, i + 1));
        weights.push_back(static_cast<double>(i + 1));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsfl::fedavg(models, weights));
    }
}
BENCHMARK(BM_FedAvg)->Arg(6)->Arg(30);

void BM_RoundLatencyAccounting(benchmark::State& state) {
    const gsfl::SplitModel split = gsfl::split_model(gsfl::default_model(16, 4), 2);
    const gsfl::Topology topo = gsfl::uniform_topology(30, 6);
    const gsfl::LatencyParams lp;
    const std::vector<std::int64_t> steps(30, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            gsfl::round_latency(gsfl::Scheme::kGsfl, topo, split, lp, steps, 10));
    }
}
BENCHMARK(BM_RoundLatencyAccounting);

void BM_GsflRound(benchmark::State& state) {
    gsfl::ExperimentConfig cfg;
    cfg.scheme = gsfl::Scheme::kGsfl;
    cfg.rounds = 1;
    cfg.dataset.synthetic = {4, 16, 600, 200};
    cfg.n_clients = 6;
    cfg.n_groups = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsfl::run_gsfl(cfg));
    }
}
BENCHMARK(BM_GsflRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
