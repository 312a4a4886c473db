// Parallel kernels against the serial reference implementations.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "phaselab/matrix.hpp"
#include "phaselab/qsim.hpp"
#include "phaselab/reference.hpp"
#include "phaselab/spectral.hpp"

namespace {

using namespace phaselab;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Matrix m(r, c);
  for (double& v : m.data()) v = d(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_NaiveMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::naive_matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_NaiveMatmul)->Arg(64)->Arg(128)->Arg(256);

// Batch of 256 rows of length n.
void BM_HilbertRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(256, n, 3);
  std::vector<double> out(x.size());
  for (auto _ : state) {
    spectral::kernels::hilbert_rows(x.data(), out, 256, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_HilbertRows)->Arg(8)->Arg(64)->Arg(63)->Arg(512);

void BM_NaiveHilbertRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(256, n, 3);
  for (auto _ : state) {
    for (std::size_t r = 0; r < 256; ++r) benchmark::DoNotOptimize(reference::naive_hilbert(x.row_span(r)));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_NaiveHilbertRows)->Arg(8)->Arg(64)->Arg(63)->Arg(512);

void BM_RunQnn(benchmark::State& state) {
  const int reps = static_cast<int>(state.range(0));
  const Matrix in = random_matrix(1, 4, 4), p = random_matrix(1, 12 * static_cast<std::size_t>(reps), 5);
  for (auto _ : state) benchmark::DoNotOptimize(qsim::run_qnn(in.data(), p.data(), {reps, qsim::Encoding::raw}));
}
BENCHMARK(BM_RunQnn)->Arg(1)->Arg(2);

void BM_DenseCircuit(benchmark::State& state) {
  const int reps = static_cast<int>(state.range(0));
  const Matrix in = random_matrix(1, 4, 4), p = random_matrix(1, 12 * static_cast<std::size_t>(reps), 5);
  for (auto _ : state) benchmark::DoNotOptimize(reference::dense_circuit_expectations(in.data(), p.data(), reps));
}
BENCHMARK(BM_DenseCircuit)->Arg(1)->Arg(2);

void BM_ParamShift(benchmark::State& state) {
  const Matrix in = random_matrix(1, 4, 6), p = random_matrix(1, 24, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qsim::param_shift_grad(in.data(), p.data(), qsim::CircuitSpec::double_block()));
  }
}
BENCHMARK(BM_ParamShift);

}  // namespace

BENCHMARK_MAIN();
