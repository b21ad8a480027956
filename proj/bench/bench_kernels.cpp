// Throughput comparison of the OpenMP ensemble kernels against the serial
// reference implementations. Run manually: build/bench/bench_kernels

#include <benchmark/benchmark.h>

#include "expfam/attention.hpp"
#include "expfam/dynamics.hpp"
#include "expfam/harness/instance_gen.hpp"
#include "expfam/oracle.hpp"
#include "expfam/serial_ref.hpp"

using namespace expfam;

namespace {

ParamEnsemble make_ensemble(Eigen::Index n, Eigen::Index d) {
  harness::InstanceGen gen(12345);
  return ParamEnsemble(gen.rows(n, d));
}

void bm_attention_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ParamEnsemble e = make_ensemble(n, 8);
  const IntrinsicMeasure h = DiscretePoints(make_ensemble(n, 8).params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(attention_update(e, h, AttentionConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_attention_serial_ref(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ParamEnsemble e = make_ensemble(n, 8);
  const IntrinsicMeasure h = DiscretePoints(make_ensemble(n, 8).params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial_ref::attention_update(e, h, AttentionConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_renormalize_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ParamEnsemble e = make_ensemble(n, 16);
  const RenormSpec spec(Vec::Zero(16), PsdMatrix::identity(16));
  for (auto _ : state) {
    benchmark::DoNotOptimize(renormalize(e, spec));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_renormalize_serial_ref(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const ParamEnsemble e = make_ensemble(n, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        serial_ref::renormalize(e, Vec::Zero(16), Mat::Identity(16, 16), 1e-8));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_mc_log_partition(benchmark::State& state) {
  harness::InstanceGen gen(777);
  const IntrinsicMeasure h = gen.gaussian(4);
  const NaturalParam eta(gen.vec(4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        oracle::mc_log_partition(h, eta, oracle::McSpec(state.range(0), 99)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_attention_parallel)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_attention_serial_ref)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_renormalize_parallel)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_renormalize_serial_ref)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mc_log_partition)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
