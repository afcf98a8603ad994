// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include "qctc/numeric/kernels.hpp"
#include "qctc/numeric/parameter.hpp"

using namespace qctc;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return uniform_tensor(rows, cols, -1.0, 1.0, rng);
}

template <Tensor (*Fn)(const Tensor&, const Tensor&)>
void bm_product(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <Tensor (*Fn)(const Tensor&)>
void bm_softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

}  // namespace

BENCHMARK(bm_product<kernels::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_product<kernels::parallel::matmul>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_product<kernels::serial::matmul_nt>)->Name("matmul_nt/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_product<kernels::parallel::matmul_nt>)->Name("matmul_nt/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_product<kernels::serial::matmul_tn>)->Name("matmul_tn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_product<kernels::parallel::matmul_tn>)->Name("matmul_tn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bm_softmax<kernels::serial::softmax_rows>)->Name("softmax/serial")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(bm_softmax<kernels::parallel::softmax_rows>)->Name("softmax/parallel")->RangeMultiplier(4)->Range(64, 1024);

BENCHMARK_MAIN();
