// Serial reference against the OpenMP kernels: boundary sampling on one ray and
// sector sampling on the cube system. Arg = thread count for the parallel runs.

#include <benchmark/benchmark.h>

#include "support.hpp"
#include "weylrec/spectral.hpp"

using namespace weylrec;

namespace {

const std::vector<double> kX{0.5, 1.0, 2.0};

std::vector<double> radii() {
  std::vector<double> t;
  for (int j = 1; j <= 16; ++j) t.push_back(2.5 * j);
  return t;
}

void ray_samples(benchmark::State& state, Execution mode) {
  const ValidatedSystem s = require_valid(testing::reference_spec());
  const auto t = radii();
  for (auto _ : state) {
    auto out = sample_ray(s, 0, t, kX, {}, mode, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}

void sector_samples(benchmark::State& state, Execution mode) {
  const ValidatedSystem s = require_valid(testing::cube_spec());
  const Sector& g = s.geometry.sectors[0];
  std::vector<cplx> rho;
  for (int j = 0; j < 20; ++j) rho.push_back(std::polar(2.0 + 4.0 * j, g.begin + (g.end - g.begin) * (j + 0.5) / 20));
  for (auto _ : state) {
    auto out = sample_sector(s, 0, rho, kX, {}, mode, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rho.size()));
}

}  // namespace

BENCHMARK_CAPTURE(ray_samples, serial, Execution::Serial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(ray_samples, openmp, Execution::Parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(sector_samples, serial, Execution::Serial)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(sector_samples, openmp, Execution::Parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
