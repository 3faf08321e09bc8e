#include <benchmark/benchmark.h>

#include <random>

#include "lru/bptt.hpp"
#include "lru/harness/finetune.hpp"
#include "lru/layer.hpp"
#include "lru/rtrl.hpp"

namespace {

lru::SeqMatrix random_inputs(lru::Index rows, lru::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    lru::SeqMatrix u(rows, cols);
    for (lru::Index i = 0; i < u.size(); ++i) u.data()[i] = nd(rng);
    return u;
}

lru::Network make_network(lru::Index m, std::vector<lru::Index> widths, lru::Index p) {
    lru::NetworkInit init;
    init.input_size = m;
    init.widths = std::move(widths);
    init.output_size = p;
    init.seed = 1;
    return lru::init_network(init);
}

void BM_ScanForward(benchmark::State& state) {
    const auto t = static_cast<lru::Index>(state.range(0));
    const bool parallel = state.range(1) != 0;
    const lru::LayerParams params = lru::init_layer(11, 16, 5, 0.9, 0.999, 3);
    const lru::SeqMatrix u = random_inputs(t, 11, 4);
    const lru::HiddenState h0 = lru::HiddenState::zeros(16);
    lru::ScanOptions opts;
    opts.parallel = parallel;
    for (auto _ : state) benchmark::DoNotOptimize(lru::scan_forward(params, h0, u, opts));
    state.SetItemsProcessed(state.iterations() * t);
}
BENCHMARK(BM_ScanForward)->ArgsProduct({{256, 4096, 65536}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_SequentialSteps(benchmark::State& state) {
    const auto t = static_cast<lru::Index>(state.range(0));
    const lru::LayerParams params = lru::init_layer(11, 16, 5, 0.9, 0.999, 3);
    const lru::LayerDynamics dyn = lru::LayerDynamics::from(params);
    const lru::SeqMatrix u = random_inputs(t, 11, 4);
    lru::Vector y(5);
    for (auto _ : state) {
        lru::HiddenState h = lru::HiddenState::zeros(16);
        for (lru::Index i = 0; i < t; ++i) lru::layer_step_inplace(params, dyn, h, u.row(i).transpose(), y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * t);
}
BENCHMARK(BM_SequentialSteps)->Arg(256)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);

// One online RTRL step: forward, trace update, and gradient read-out.
void BM_RtrlStep(benchmark::State& state) {
    const auto n = static_cast<lru::Index>(state.range(0));
    const lru::Network net = make_network(11, {n}, 5);
    lru::RtrlStepper stepper(net);
    lru::StepGradient grad = lru::StepGradient::zeros_like(net);
    const lru::SeqMatrix u = random_inputs(1024, 11, 5);
    const lru::Vector dl = lru::Vector::Constant(5, 0.1);
    lru::Index i = 0;
    for (auto _ : state) {
        stepper.forward(net, u.row(i).transpose());
        stepper.gradient(net, dl, grad);
        i = (i + 1) % u.rows();
    }
    state.counters["trace_bytes"] = static_cast<double>(stepper.traces().bytes());
}
BENCHMARK(BM_RtrlStep)->Arg(8)->Arg(16)->Arg(64)->Arg(256);

void BM_FinetuneStep(benchmark::State& state) {
    const lru::Network net = make_network(11, {16}, 5);
    lru::harness::OnlineFinetuner tuner(net, {});
    const lru::SeqMatrix u = random_inputs(1024, 11, 6);
    const lru::SeqMatrix y = random_inputs(1024, 5, 7);
    lru::Index i = 0;
    for (auto _ : state) {
        tuner.step(u.row(i).transpose(), y.row(i).transpose());
        i = (i + 1) % u.rows();
    }
}
BENCHMARK(BM_FinetuneStep);

void BM_BpttGradient(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    const int threads = static_cast<int>(state.range(1));
    const lru::Network net = make_network(11, {16}, 5);
    lru::WindowBatch b;
    b.window = 128;
    for (std::size_t k = 0; k < batch; ++k) {
        b.inputs.push_back(random_inputs(128, 11, 10 + k));
        b.targets.push_back(random_inputs(128, 5, 1000 + k));
    }
    const lru::HuberLoss loss(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(lru::bptt_gradient(net, b, loss, threads));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(batch) * 128);
}
BENCHMARK(BM_BpttGradient)->ArgsProduct({{32, 256}, {1, 4}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
