#include <benchmark/benchmark.h>

#include <random>

#include "qkalman/decomposition.hpp"
#include "qkalman/random_systems.hpp"

namespace {

qk::QLSystem make_system(Eigen::Index n) {
  std::mt19937_64 rng(1234 + static_cast<unsigned long long>(n));
  return qk::testing::random_general(rng, n, 2);
}

void BM_decompose(benchmark::State& state) {
  const qk::QLSystem sys = make_system(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qk::decompose(sys));
  }
}
BENCHMARK(BM_decompose)->DenseRange(2, 6);

void BM_kalman_subspaces(benchmark::State& state) {
  const qk::QLSystem sys = make_system(state.range(0));
  const qk::StructureTolerance tol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qk::kalman_subspaces(sys, tol));
  }
}
BENCHMARK(BM_kalman_subspaces)->DenseRange(2, 6);

void BM_observability_matrix(benchmark::State& state) {
  const qk::QLSystem sys = make_system(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        qk::observability_matrix(sys, qk::ObservabilityKind::kHamiltonianOnly));
  }
}
BENCHMARK(BM_observability_matrix)->DenseRange(2, 6);

void BM_transfer_function(benchmark::State& state) {
  const qk::QLSystem sys = make_system(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qk::transfer_function(sys, qk::Complex(0.9, 0.3)));
  }
}
BENCHMARK(BM_transfer_function);

void BM_decompose_passive(benchmark::State& state) {
  std::mt19937_64 rng(99);
  const qk::PassiveQLSystem sys = qk::testing::random_passive(rng, state.range(0), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qk::decompose_passive(sys));
  }
}
BENCHMARK(BM_decompose_passive)->DenseRange(2, 6);

}  // namespace
