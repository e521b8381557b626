// Lagged memory term: full-history sums against the exponential-mode recurrence.

#include "fracpme/history.hpp"
#include "fracpme/kernel.hpp"
#include "fracpme/stepper.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace fracpme;

namespace {

constexpr std::size_t kWidth = 63;

void march(benchmark::State& state, MemoryPath path) {
    const auto steps = static_cast<std::size_t>(state.range(0));
    const auto grid = TimeGrid::uniform(1.0, steps);
    const auto pair = KernelPair::fractional(0.5);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> increment(kWidth), lagged(kWidth);
    for (auto _ : state) {
        auto history = make_history(path, pair, grid, kWidth, 1e-9);
        for (std::size_t n = 1; n <= steps; ++n) {
            history->lagged(n, lagged);
            for (auto& x : increment) x = g(rng);
            history->push(n, increment);
        }
        benchmark::DoNotOptimize(lagged.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_LaggedNaive(benchmark::State& state) { march(state, MemoryPath::Naive); }
void BM_LaggedSoE(benchmark::State& state) { march(state, MemoryPath::SoE); }

void BM_Weights(benchmark::State& state) {
    const auto steps = static_cast<std::size_t>(state.range(0));
    const auto pair = KernelPair::tempered(0.4, 1.0);
    const auto grid = state.range(1) == 0 ? TimeGrid::uniform(1.0, steps) : TimeGrid::graded(1.0, steps, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(conv_weights(pair, grid));
}

void BM_SolvePme(benchmark::State& state) {
    MeshSpec mesh;
    mesh.cells_x = 32;
    const SpatialProblem problem(mesh, constant_coefficient(1.0), 1.0);
    const auto grid = TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0)));
    SpaceProfile bump;
    bump.kind = ProfileKind::Bump;
    const NodalField u0 = sample_field(problem, bump);
    const auto f = zero_forcing(problem, grid);
    SolverOptions options;
    options.memory = state.range(1) == 0 ? MemoryPath::Naive : MemoryPath::SoE;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(problem, KernelPair::fractional(0.5),
                                       NonlinearityProfile::porous_medium(2.0, 1.0, 1.0), grid, u0, f,
                                       options));
    }
}

}  // namespace

BENCHMARK(BM_LaggedNaive)->RangeMultiplier(2)->Range(256, 4096)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LaggedSoE)->RangeMultiplier(2)->Range(256, 4096)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Weights)->Args({1024, 0})->Args({1024, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolvePme)->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
