// Parallel kernels against their serial reference versions, plus the solver
// and a full network initialization.

#include <benchmark/benchmark.h>

#include <random>

#include "sylvinit/dataio.hpp"
#include "sylvinit/initdriver.hpp"
#include "sylvinit/patches.hpp"
#include "sylvinit/reference.hpp"
#include "sylvinit/sylvester.hpp"

using namespace sylvinit;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (double& v : m.data()) v = dist(rng);
    return m;
}

Tensor4 random_tensor(Tensor4::Dims dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Tensor4 t(dims);
    for (double& v : t.data()) v = dist(rng);
    return t;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}

void BM_MatmulReference(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(reference::matmul(a, b));
}

void BM_Gram(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(d, 4 * d, 3);
    for (auto _ : state) benchmark::DoNotOptimize(gram(x));
}

void BM_GramReference(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(d, 4 * d, 3);
    for (auto _ : state) benchmark::DoNotOptimize(reference::gram(x));
}

void BM_SymEig(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = gram(random_matrix(n, 2 * n, 4));
    for (auto _ : state) benchmark::DoNotOptimize(sym_eig(a));
}

void BM_SymEigReference(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = gram(random_matrix(n, 2 * n, 4));
    for (auto _ : state) benchmark::DoNotOptimize(reference::sym_eig(a));
}

void BM_ConvIm2col(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor4 acts = random_tensor({32, 16, 16, c}, 5), weight = random_tensor({c, c, 3, 3}, 6);
    const ConvGeometry g{16, 16, c, 3, 3, 1, 1};
    const Matrix w = flatten_weight(weight);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(w, im2col(acts, g)));
}

void BM_ConvReference(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor4 acts = random_tensor({32, 16, 16, c}, 5), weight = random_tensor({c, c, 3, 3}, 6);
    for (auto _ : state) benchmark::DoNotOptimize(reference::conv2d(acts, weight, 1, 1));
}

void BM_SylvesterSolve(benchmark::State& state) {
    const auto d_i = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(d_i, 4 * d_i, 7), s = random_matrix(d_i / 4, 4 * d_i, 8);
    const SylvesterOperands ops = build_operands(x, s);
    for (auto _ : state) benchmark::DoNotOptimize(solve(ops));
}

void BM_InitializeSmallCnn(benchmark::State& state) {
    const auto per_class = static_cast<std::size_t>(state.range(0));
    const LabeledDataset data = synth_blobs(3, 8, 1, per_class, 0.1, 9);
    const Network net(small_cnn({8, 8, 1}, 3));
    InitConfig cfg;
    cfg.per_class_samples = per_class;
    for (auto _ : state) benchmark::DoNotOptimize(initialize(net, data, cfg));
}

}  // namespace

BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);
BENCHMARK(BM_MatmulReference)->Arg(64)->Arg(256);
BENCHMARK(BM_Gram)->Arg(64)->Arg(288);
BENCHMARK(BM_GramReference)->Arg(64)->Arg(288);
BENCHMARK(BM_SymEig)->Arg(64)->Arg(288);
BENCHMARK(BM_SymEigReference)->Arg(64)->Arg(288);
BENCHMARK(BM_ConvIm2col)->Arg(4)->Arg(16);
BENCHMARK(BM_ConvReference)->Arg(4)->Arg(16);
BENCHMARK(BM_SylvesterSolve)->Arg(64)->Arg(288);
BENCHMARK(BM_InitializeSmallCnn)->Arg(5)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
