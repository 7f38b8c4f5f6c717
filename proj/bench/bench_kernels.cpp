// Serial vs parallel tree search and the batch successor kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "mimosd/linalg.hpp"
#include "mimosd/oracle.hpp"
#include "mimosd/parallel.hpp"
#include "mimosd/search.hpp"

namespace {

using namespace mimosd;

std::vector<PreprocessedProblem> problems(int m, Modulation mod, double snr, int count) {
  std::vector<PreprocessedProblem> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(i)));
    out.push_back(preprocess(generate_instance(m, m, make_constellation(mod), snr, rng),
                             RadiusPolicy::infinite()));
  }
  return out;
}

const std::vector<PreprocessedProblem>& search_set() {
  static const auto set = problems(8, Modulation::QAM16, 10.0, 32);
  return set;
}

void BM_SerialBestFs(benchmark::State& state) {
  const auto& set = search_set();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sd_decode(set[i++ % set.size()], Strategy::BestFS));
}
BENCHMARK(BM_SerialBestFs)->Unit(benchmark::kMicrosecond);

void BM_ParallelLeaf(benchmark::State& state) {
  const auto& set = search_set();
  const int threads = static_cast<int>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(pl_sd_decode(set[i++ % set.size()], threads, 20));
}
BENCHMARK(BM_ParallelLeaf)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_MasterWorker(benchmark::State& state) {
  const auto& set = search_set();
  const PsdConfig cfg{static_cast<int>(state.range(0)), Balancing::Dynamic, 1};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(psd_decode(set[i++ % set.size()], cfg));
}
BENCHMARK(BM_MasterWorker)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

struct Batch {
  Eigen::MatrixXcd R;
  Eigen::VectorXcd y;
  Eigen::MatrixXcd V;
};

Batch make_batch(int v, int k) {
  Rng rng(5);
  const auto c = make_constellation(Modulation::QAM64);
  Batch b{Eigen::MatrixXcd::Zero(v, v), Eigen::VectorXcd(v), Eigen::MatrixXcd(v, k)};
  for (int i = 0; i < v; ++i) {
    for (int j = i; j < v; ++j) b.R(i, j) = complex_gaussian(rng, 1.0);
    b.y(i) = complex_gaussian(rng, 1.0);
    for (int j = 0; j < k; ++j) b.V(i, j) = c.points[rng() % c.size()];
  }
  return b;
}

void BM_BatchMatrix(benchmark::State& state) {
  const auto b = make_batch(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_evaluate(b.R, b.y, b.V));
}
BENCHMARK(BM_BatchMatrix)->Args({2, 64})->Args({4, 4096})->Unit(benchmark::kMicrosecond);

void BM_BatchOpenMp(benchmark::State& state) {
  const auto b = make_batch(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_evaluate_omp(b.R, b.y, b.V, 4));
}
BENCHMARK(BM_BatchOpenMp)->Args({2, 64})->Args({4, 4096})->Unit(benchmark::kMicrosecond);

void BM_BatchScalarReference(benchmark::State& state) {
  const auto b = make_batch(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_evaluate_reference(b.R, b.y, b.V));
}
BENCHMARK(BM_BatchScalarReference)->Args({2, 64})->Args({4, 4096})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
