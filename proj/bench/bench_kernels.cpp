// Serial reference vs OpenMP path for the enumeration kernels.

#include <benchmark/benchmark.h>

#include "ltcd/derand.hpp"
#include "ltcd/instances.hpp"
#include "ltcd/sampler.hpp"
#include "ltcd/sources.hpp"

using namespace ltcd;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

void BM_AcceptanceCount(benchmark::State& s) {
  const ThresholdCircuit c = random_depth2(20, 8, 2, 6, 3, 1);
  for (auto _ : s) benchmark::DoNotOptimize(acceptance_count(c, Budget::unlimited(), mode(s)));
  label(s);
}

void BM_OutputHistogram(benchmark::State& s) {
  const AlmostKwiseSource src(16, 4, Rat(1, 16));
  for (auto _ : s) benchmark::DoNotOptimize(output_histogram(src, Budget::unlimited(), mode(s)));
  label(s);
}

void BM_SamplerHistograms(benchmark::State& s) {
  static const SamplerSpec spec = desk_sampler_spec(10, 2, 6, 5, Rat(1, 5));
  for (auto _ : s) benchmark::DoNotOptimize(sampler_histograms(spec, Budget::unlimited(), mode(s)));
  label(s);
}

void BM_Depth2(benchmark::State& s) {
  const Depth2Params p = depth2_params(6, Rat(2, 5));
  const Depth2Sources src = uniform_depth2_sources(p);
  const ThresholdCircuit c = point_exception_circuit(6, {3, 17});
  for (auto _ : s) benchmark::DoNotOptimize(derandomize_depth2(c, p, src, Budget::unlimited(), mode(s)));
  label(s);
}

void BM_Quantified(benchmark::State& s) {
  DerandConfig cfg;
  cfg.eps = Rat(1, 40);
  cfg.restrict_opt.override_mode = true;
  cfg.restrict_opt.params = [](std::size_t n, const Rat&) { return desk_layer_params(n); };
  cfg.y = make_uniform(6);
  cfg.z = make_uniform(6);
  cfg.B = Int(1);
  const ThresholdCircuit c = point_exception_circuit(6, {5});
  for (auto _ : s) benchmark::DoNotOptimize(quantified_derandomize(c, cfg, Budget::unlimited(), mode(s)));
  label(s);
}

}  // namespace

BENCHMARK(BM_AcceptanceCount)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OutputHistogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplerHistograms)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Depth2)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Quantified)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
