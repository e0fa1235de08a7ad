#include <benchmark/benchmark.h>

#include "cutoff/distance.hpp"
#include "cutoff/dynamics.hpp"
#include "cutoff/levy_model.hpp"
#include "cutoff/rng.hpp"
#include "cutoff/sampling.hpp"
#include "cutoff/simulate.hpp"

using namespace cutoff;

namespace {

VectorFieldModel fput1() {
  Mat A(1, 1), B(1, 1);
  A << 1.0;
  B << 1.0;
  return VectorFieldModel::fput(A, B);
}

void BM_StandardStable(benchmark::State& state) {
  RngStream rng(1, 0);
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(standard_symmetric_stable(alpha, rng));
}
BENCHMARK(BM_StandardStable)->Arg(8)->Arg(15)->Arg(19);

void BM_IncrementSampler(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  LevyMeasureSpec spec = make_isotropic_stable(d, 1.5, 1.0, 1.0);
  spec.profile.kind = ProfileKind::tempered;
  spec.profile.rate = 1.0;
  const IncrementSampler s(spec, 1e-2);
  RngStream rng(2, 0);
  Vec out(d);
  for (auto _ : state) {
    s.sample(rng, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_IncrementSampler)->Arg(1)->Arg(2);

void BM_TvHist(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(3, 0);
  Mat a(1, n), b(1, n);
  for (int j = 0; j < n; ++j) {
    a(0, j) = rng.normal();
    b(0, j) = rng.normal() + 0.5;
  }
  HistOptions o;
  o.bootstrap = 50;
  for (auto _ : state) benchmark::DoNotOptimize(tv_hist(a, b, o).value);
}
BENCHMARK(BM_TvHist)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Flow(benchmark::State& state) {
  const VectorFieldModel vf = fput1();
  Vec x(1);
  x << 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(flow(vf, x, 5.0).phi(0));
}
BENCHMARK(BM_Flow);

void BM_SimulateX(benchmark::State& state) {
  const VectorFieldModel vf = fput1();
  const LevyMeasureSpec spec = make_isotropic_stable(1, 1.5, 1.0, 1.0);
  SimOptions opts;
  opts.scheme = state.range(0) == 0 ? Scheme::euler : Scheme::strang;
  opts.threads = 1;
  Vec x(1);
  x << 1.0;
  for (auto _ : state) {
    RngStream rng(4, 0);
    benchmark::DoNotOptimize(simulate_X(vf, spec, 0.1, x, {1.0}, 1000, rng, opts).endpoints[0](0, 0));
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 100);
}
BENCHMARK(BM_SimulateX)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
