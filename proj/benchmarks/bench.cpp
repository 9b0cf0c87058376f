#include <benchmark/benchmark.h>

#include "microelast/elasticity.hpp"
#include "microelast/sampling.hpp"

namespace {

using namespace microelast;

Topology bench_topology() {
    Topology t;
    t.n_layers = 4;
    t.units_per_layer = 64;
    return t;
}

void BM_forward(benchmark::State& state) {
    Topology topo = bench_topology();
    Network net(topo);
    ParamVector p = init_params(topo, 0);
    Matrix x = Matrix::Random(2, state.range(0));
    for (auto _ : state) {
        Matrix y = net.forward(p, x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_forward)->Arg(256)->Arg(1024)->Arg(4096);

void BM_forward_with_jacobian(benchmark::State& state) {
    Topology topo = bench_topology();
    Network net(topo);
    ParamVector p = init_params(topo, 0);
    Matrix x = Matrix::Random(2, state.range(0));
    for (auto _ : state) {
        BatchEval e = net.forward_with_jacobian(p, x);
        benchmark::DoNotOptimize(e.y.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_forward_with_jacobian)->Arg(256)->Arg(1024)->Arg(4096);

void BM_loss_and_grad(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Topology topo = bench_topology();
    ConstantMaterial material(
        lame_from_engineering({1.0e4, 0.4}), 2.0);
    BvpSpec bvp = BvpSpec::uniaxial(2.0, 0.025, material);
    CollocationSet points = regular_grid(side, 2.0);
    PinnProblem problem(topo, bvp.rules, material, bvp.scales,
                        bvp.edge_length, points.interior, points.boundary);
    ParamVector p = init_params(topo, 0);
    for (auto _ : state) {
        auto [loss, grad] = problem.loss_and_grad(p);
        benchmark::DoNotOptimize(grad.data());
    }
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_loss_and_grad)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
